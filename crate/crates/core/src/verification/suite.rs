//! The complete invariant suite for one spectrum.

use super::numerov::numerov_eigenvalues;
use super::report::{CheckRecord, VerificationReport};
use crate::bound_states::{bound_states, potential_via_states, BoundStateSet};
use crate::error::Result;
use crate::exec::Execution;
use crate::marchenko::{
    asymptotic_amplitudes, log_det, norm_constants, norm_constants_via_cauchy, potential, potential_fd_oracle,
    potential_profile, NormConstants, PotentialProfile,
};
use crate::numerics::{stencil, Bits, Escalation, Grid, Precision, PrecisionPolicy};
use crate::scattering::{incident_intensity, reflection_fit, scattering_residual, scattering_state, transmission};
use crate::spectrum::Spectrum;

/// Scattering energies swept by [`full_verify`].
pub const SCATTERING_ENERGIES: [f64; 4] = [0.5, 1.0, 5.0, 20.0];
/// Escalation threshold for wave-function checks under automatic escalation.
pub const WAVE_CONDITION_THRESHOLD: f64 = 1e8;
/// Sample points of the finite-difference cross-check of `V`.
pub const FD_POINTS: [f64; 7] = [-2.5, -1.0, -0.3, 0.0, 0.3, 1.0, 2.5];

pub mod tol {
    pub const NORM_CONSTANTS: f64 = 1e-6;
    pub const SYMMETRY: f64 = 1e-8;
    pub const DECAY: f64 = 1e-2;
    pub const NEGATIVITY: f64 = 1e-12;
    pub const SUM_RULE: f64 = 1e-3;
    pub const FINITE_DIFFERENCE: f64 = 1e-6;
    pub const ROUND_TRIP: f64 = 1e-3;
    pub const NORMALIZATION: f64 = 1e-4;
    pub const ORTHOGONALITY: f64 = 1e-4;
    pub const PARITY: f64 = 1e-6;
    pub const RESIDUAL: f64 = 1e-4;
    pub const ASYMPTOTICS: f64 = 0.02;
    pub const CROSS_FORMULA: f64 = 1e-5;
    pub const TRANSMISSION: f64 = 1e-3;
    pub const REFLECTION: f64 = 1e-3;
    pub const TAIL_BOUND: f64 = 1e-3;
}

/// The policy for wave functions and the Cauchy route: under automatic
/// escalation the threshold drops to [`WAVE_CONDITION_THRESHOLD`].
pub fn wave_policy(policy: &PrecisionPolicy) -> PrecisionPolicy {
    if policy.escalation == Escalation::Auto {
        policy.with_threshold(policy.condition_threshold.min(WAVE_CONDITION_THRESHOLD))
    } else {
        *policy
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

fn sign_changes(v: &[f64]) -> usize {
    let floor = 1e-10 * max_of(v.iter().map(|x| x.abs()));
    let signs: Vec<bool> = v.iter().filter(|x| x.abs() > floor).map(|x| *x < 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Checks that need only the potential.
pub fn verify_potential(s: &Spectrum, grid: &Grid, policy: &PrecisionPolicy) -> Result<VerificationReport> {
    policy.validate()?;
    let c = norm_constants(s)?;
    let profile = potential_profile(s, &c, grid, policy, Execution::Parallel)?;
    let mut r = VerificationReport::new(format!("{} states", s.len()));
    norm_constant_checks(&mut r, s, &c, &wave_policy(policy));
    potential_checks(&mut r, s, &c, grid, &profile, policy);
    round_trip_checks(&mut r, s, grid, &profile);
    Ok(r)
}

/// Every invariant: potential, bound states, scattering states, round trip.
pub fn full_verify(s: &Spectrum, grid: &Grid, policy: &PrecisionPolicy) -> Result<VerificationReport> {
    let mut r = verify_potential(s, grid, policy)?;
    let c = norm_constants(s)?;
    let profile = potential_profile(s, &c, grid, policy, Execution::Parallel)?;
    let wave = wave_policy(policy);
    match bound_states(s, &c, grid, &wave, Execution::Parallel) {
        Ok(states) => {
            bound_state_checks(&mut r, &states, &profile);
            cross_formula_check(&mut r, s, &c, grid, &wave);
            scattering_checks(&mut r, &states, &profile);
        }
        Err(e) => r.push(CheckRecord::failed("bound.states", &e)),
    }
    Ok(r)
}

fn norm_constant_checks(r: &mut VerificationReport, s: &Spectrum, c: &NormConstants, policy: &PrecisionPolicy) {
    match norm_constants_via_cauchy(s, policy) {
        Ok(ev) => {
            let dev = max_of(
                ev.value
                    .c_sq()
                    .iter()
                    .zip(c.c_sq())
                    .map(|(a, b)| (a - b).abs() / b),
            );
            r.push(CheckRecord::new("norm_constants.cauchy", dev, tol::NORM_CONSTANTS, ev.precision));
        }
        Err(e) => r.push(CheckRecord::failed("norm_constants.cauchy", &e)),
    }
    match asymptotic_amplitudes(s, policy) {
        Ok(ev) => {
            let wrong = ev
                .value
                .iter()
                .enumerate()
                .filter(|(n, d)| (**d < 0.0) != (n % 2 == 0))
                .count();
            r.push(
                CheckRecord::new("norm_constants.sign", wrong as f64, 0.0, ev.precision)
                    .with_detail("psi_n e^(kappa_n x) -> (-1)^n c_n^2 as x -> +inf"),
            );
        }
        Err(e) => r.push(CheckRecord::failed("norm_constants.sign", &e)),
    }
}

fn potential_checks(
    r: &mut VerificationReport,
    s: &Spectrum,
    c: &NormConstants,
    grid: &Grid,
    profile: &PotentialProfile,
    policy: &PrecisionPolicy,
) {
    let v = &profile.values;
    let p = profile.precision;
    match log_det(s, c, 0.0, policy) {
        Ok(ev) => {
            let budget = policy.condition_threshold * (ev.precision.bits() as f64 - 53.0).exp2();
            r.push(
                CheckRecord::new("condition.i_plus_c_at_origin", ev.condition, budget, ev.precision)
                    .with_detail("1-norm condition estimate of I + C(0)"),
            );
        }
        Err(e) => r.push(CheckRecord::failed("condition.i_plus_c_at_origin", &e)),
    }
    if grid.is_symmetric() {
        let asym = max_of((0..v.len()).map(|i| (v[i] - v[grid.mirror(i).expect("symmetric")]).abs()));
        r.push(CheckRecord::new("potential.symmetry", asym, tol::SYMMETRY, p));
    }
    r.push(CheckRecord::new(
        "potential.decay",
        v[0].abs().max(v[v.len() - 1].abs()),
        tol::DECAY,
        p,
    ));
    let depth = profile.min().abs();
    r.push(CheckRecord::new(
        "potential.negative",
        max_of(v.iter().copied()) / depth,
        tol::NEGATIVITY,
        p,
    ));
    let exact = -4.0 * s.kappas().iter().sum::<f64>();
    let integral = stencil::simpson(v, grid.spacing());
    r.push(CheckRecord::new(
        "potential.sum_rule",
        ((integral - exact) / exact).abs(),
        tol::SUM_RULE,
        p,
    ));
    r.push(finite_difference_check(s, c, policy));
}

fn finite_difference_check(s: &Spectrum, c: &NormConstants, policy: &PrecisionPolicy) -> CheckRecord {
    let name = "potential.finite_difference";
    let mut worst: f64 = 0.0;
    let mut precision = Precision::Native;
    for x in FD_POINTS {
        let fd = match potential_fd_oracle(s, c, x, Bits(policy.escalation_bits as usize)) {
            Ok(v) => v,
            Err(e) => return CheckRecord::failed(name, &e),
        };
        match potential(s, c, x, policy) {
            Ok(ev) => {
                precision = precision.max(ev.precision);
                worst = worst.max((ev.value - fd).abs());
            }
            Err(e) => return CheckRecord::failed(name, &e),
        }
    }
    CheckRecord::new(name, worst, tol::FINITE_DIFFERENCE, precision)
        .with_detail("five-point stencil of ln det(I + C) in extended arithmetic")
}

fn round_trip_checks(r: &mut VerificationReport, s: &Spectrum, grid: &Grid, profile: &PotentialProfile) {
    let energies = s.energies();
    let found = match numerov_eigenvalues(&profile.values, grid, s.len()) {
        Ok(e) => e,
        Err(e) => {
            r.push(CheckRecord::failed("roundtrip.eigenvalues", &e));
            return;
        }
    };
    let rel = max_of(found.iter().zip(&energies).map(|(a, b)| ((a - b) / b).abs()));
    r.push(
        CheckRecord::new("roundtrip.eigenvalues", rel, tol::ROUND_TRIP, Precision::Native)
            .with_detail(format!("{found:.6?}")),
    );
    let ratios = max_of(
        found
            .iter()
            .zip(&energies)
            .map(|(a, b)| ((a / found[0]) / (b / energies[0]) - 1.0).abs()),
    );
    r.push(CheckRecord::new("roundtrip.ratios", ratios, tol::ROUND_TRIP, Precision::Native));
    let unordered = found.windows(2).filter(|w| !(w[0] < w[1])).count();
    r.push(CheckRecord::new(
        "roundtrip.separation",
        unordered as f64,
        0.0,
        Precision::Native,
    ));
}

fn bound_state_checks(r: &mut VerificationReport, states: &BoundStateSet, profile: &PotentialProfile) {
    let g = states.grid();
    let h = g.spacing();
    let p = states.precision();
    let n = states.len();
    let normalized: Vec<Vec<f64>> = (0..n).map(|k| states.normalized(k)).collect();
    let overlap = |a: &[f64], b: &[f64]| {
        let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        stencil::simpson(&prod, h)
    };

    let norm = max_of(normalized.iter().map(|v| (overlap(v, v) - 1.0).abs()));
    r.push(CheckRecord::new("bound.normalization", norm, tol::NORMALIZATION, p));
    let mut ortho: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            ortho = ortho.max(overlap(&normalized[a], &normalized[b]).abs());
        }
    }
    r.push(CheckRecord::new("bound.orthogonality", ortho, tol::ORTHOGONALITY, p));

    if g.is_symmetric() {
        let parity = max_of(normalized.iter().enumerate().map(|(k, v)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            max_of((0..v.len()).map(|i| (v[g.mirror(i).expect("symmetric")] - sign * v[i]).abs()))
        }));
        r.push(CheckRecord::new("bound.parity", parity, tol::PARITY, p));
    }

    let wrong_nodes = normalized
        .iter()
        .enumerate()
        .filter(|(k, v)| sign_changes(v) != *k)
        .count();
    r.push(CheckRecord::new("bound.nodes", wrong_nodes as f64, 0.0, p));

    let v = &profile.values;
    let energies = states.energies();
    let residual = max_of(normalized.iter().enumerate().map(|(k, psi)| {
        let scale = max_of(psi.iter().map(|x| x.abs()));
        max_of(
            stencil::interior(psi.len())
                .map(|i| (-stencil::second_derivative(psi, i, h) + (v[i] - energies[k]) * psi[i]).abs()),
        ) / scale
    }));
    r.push(CheckRecord::new("bound.residual", residual, tol::RESIDUAL, p));

    let last = g.len() - 1;
    let mut asym: f64 = 0.0;
    let mut wrong_sign = 0;
    for k in 0..n {
        let c_sq = states.c_sq()[k];
        let right = states.scaled(k)[last];
        let left = states.raw(k)[0] * (-states.kappas()[k] * g.x_min()).exp();
        asym = asym.max((right.abs() / c_sq - 1.0).abs()).max((left.abs() / c_sq - 1.0).abs());
        let right_negative = k % 2 == 0;
        if (right < 0.0) != right_negative || left >= 0.0 {
            wrong_sign += 1;
        }
    }
    r.push(CheckRecord::new("bound.asymptotics", asym, tol::ASYMPTOTICS, p));
    r.push(
        CheckRecord::new("bound.asymptotic_sign", wrong_sign as f64, 0.0, p)
            .with_detail("left tail -c_n^2, right tail (-1)^n c_n^2"),
    );
}

/// `V` against `2 d/dx Σψ_n e^{κ_n x}` on a grid of half the spacing, so
/// that the five-point stencil error stays below the tolerance.
fn cross_formula_check(r: &mut VerificationReport, s: &Spectrum, c: &NormConstants, grid: &Grid, policy: &PrecisionPolicy) {
    let name = "potential.cross_formula";
    let fine = match Grid::new(grid.x_min(), grid.x_max(), 2 * grid.len() - 1) {
        Ok(g) => g,
        Err(e) => return r.push(CheckRecord::failed(name, &e)),
    };
    let states = match bound_states(s, c, &fine, policy, Execution::Parallel) {
        Ok(st) => st,
        Err(e) => return r.push(CheckRecord::failed(name, &e)),
    };
    let profile = match potential_profile(s, c, &fine, policy, Execution::Parallel) {
        Ok(p) => p,
        Err(e) => return r.push(CheckRecord::failed(name, &e)),
    };
    let mut worst: f64 = 0.0;
    for i in stencil::interior(fine.len()) {
        match potential_via_states(&states, fine.x(i)) {
            Ok(v) => worst = worst.max((v - profile.values[i]).abs()),
            Err(e) => return r.push(CheckRecord::failed(name, &e)),
        }
    }
    r.push(
        CheckRecord::new(name, worst, tol::CROSS_FORMULA, states.precision().max(profile.precision))
            .with_detail(format!("grid {fine}")),
    );
}

fn scattering_checks(r: &mut VerificationReport, states: &BoundStateSet, profile: &PotentialProfile) {
    let p = states.precision();
    let (mut trans, mut refl, mut phase, mut resid): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut tail = 0.0;
    for e in SCATTERING_ENERGIES {
        let st = match scattering_state(states, e) {
            Ok(st) => st,
            Err(err) => return r.push(CheckRecord::failed("scattering.state", &err)),
        };
        let t = transmission(&st);
        trans = trans.max((t - 1.0).abs());
        refl = refl.max(reflection_fit(&st).reflection_ratio());
        phase = phase.max((t.sqrt() - incident_intensity(&st).sqrt()).abs());
        match scattering_residual(&profile.values, &st) {
            Ok(x) => resid = resid.max(x),
            Err(err) => return r.push(CheckRecord::failed("scattering.residual", &err)),
        }
        tail = st.tail_error_bound();
    }
    r.push(CheckRecord::new("scattering.transmission", trans, tol::TRANSMISSION, p));
    r.push(CheckRecord::new("scattering.reflection", refl, tol::REFLECTION, p));
    r.push(CheckRecord::new("scattering.phase_only", phase, tol::TRANSMISSION, p));
    r.push(CheckRecord::new("scattering.residual", resid, tol::RESIDUAL, p));
    r.push(
        CheckRecord::new("scattering.tail_bound", tail, tol::TAIL_BOUND, Precision::Native)
            .with_detail("exp(-2 kappa_N x_max)"),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::PresetKind;

    #[test]
    fn single_state_passes() {
        let s = Spectrum::from_kappas(&[1.0]).unwrap();
        let r = full_verify(&s, &Grid::default_figure(), &PrecisionPolicy::default()).unwrap();
        assert!(r.passed, "{}", r.render_table());
    }

    #[test]
    fn oscillator_passes() {
        let s = PresetKind::sho().spectrum().unwrap();
        let r = full_verify(&s, &Grid::default_figure(), &PrecisionPolicy::default()).unwrap();
        assert!(r.passed, "{}", r.render_table());
        assert_eq!(r.get("bound.nodes").unwrap().measured, 0.0);
    }

    #[test]
    fn wave_policy_tightens_auto_threshold() {
        let p = PrecisionPolicy::default();
        assert_eq!(wave_policy(&p), p);
        assert_eq!(wave_policy(&PrecisionPolicy::auto()).condition_threshold, WAVE_CONDITION_THRESHOLD);
    }

    #[test]
    fn lost_passes_natively() {
        let s = PresetKind::Lost.spectrum().unwrap();
        let r = full_verify(&s, &Grid::default_figure(), &PrecisionPolicy::default()).unwrap();
        assert!(r.passed, "{}", r.render_table());
    }

    #[test]
    fn report_is_deterministic() {
        let s = Spectrum::from_kappas(&[2.0, 1.0]).unwrap();
        let g = Grid::new(-10.0, 10.0, 801).unwrap();
        let a = full_verify(&s, &g, &PrecisionPolicy::default()).unwrap().to_json();
        let b = full_verify(&s, &g, &PrecisionPolicy::default()).unwrap().to_json();
        assert_eq!(a, b);
    }
}
