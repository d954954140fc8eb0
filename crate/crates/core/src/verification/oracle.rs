//! Closed forms for a single bound state and the oracle report built on them.

use num_complex::Complex64;

use super::report::{CheckRecord, VerificationReport};
use crate::exec::Execution;
use crate::marchenko::{norm_constants, potential_profile};
use crate::numerics::{Grid, Precision, PrecisionPolicy};
use crate::scattering::{scattering_state, transmission};
use crate::spectrum::Spectrum;

pub const POTENTIAL_TOL: f64 = 1e-10;
pub const WAVE_FUNCTION_TOL: f64 = 1e-10;
pub const SCATTERING_TOL: f64 = 1e-8;
/// Allowed distance of the finite-`x` transmission from its limit 1.
pub const TAIL_TOL: f64 = 1e-3;

/// `−2κ² sech²(κx)`.
pub fn potential(kappa: f64, x: f64) -> f64 {
    let s = 1.0 / (kappa * x).cosh();
    -2.0 * kappa * kappa * s * s
}

/// `−√(κ/2) sech(κx)`.
pub fn bound_state(kappa: f64, x: f64) -> f64 {
    -(kappa / 2.0).sqrt() / (kappa * x).cosh()
}

/// `(ik − κ tanh κx)/(κ + ik) · e^{ikx}` with `k = √E`.
pub fn scattering(kappa: f64, energy: f64, x: f64) -> Complex64 {
    let k = energy.sqrt();
    Complex64::new(-kappa * (kappa * x).tanh(), k) / Complex64::new(kappa, k) * Complex64::from_polar(1.0, k * x)
}

/// Compares the full pipeline against the closed forms for one state.
pub fn oracle_n1(kappa: f64, grid: &Grid, energies: &[f64]) -> VerificationReport {
    let subject = format!("single state, kappa = {kappa}");
    let spectrum = match Spectrum::from_kappas(&[kappa]) {
        Ok(s) => s,
        Err(e) => return VerificationReport::from_error(subject, "oracle.spectrum", &e),
    };
    let c = match norm_constants(&spectrum) {
        Ok(c) => c,
        Err(e) => return VerificationReport::from_error(subject, "oracle.norm_constants", &e),
    };
    let policy = PrecisionPolicy::default();
    let mut report = VerificationReport::new(subject);
    let xs = grid.points();
    let max_dev = |f: &dyn Fn(usize) -> f64| (0..xs.len()).map(f).fold(0.0, f64::max);

    match potential_profile(&spectrum, &c, grid, &policy, Execution::Parallel) {
        Ok(p) => report.push(CheckRecord::new(
            "oracle.potential",
            max_dev(&|i| (p.values[i] - potential(kappa, xs[i])).abs()),
            POTENTIAL_TOL,
            p.precision,
        )),
        Err(e) => report.push(CheckRecord::failed("oracle.potential", &e)),
    }

    let states = match crate::bound_states::bound_states(&spectrum, &c, grid, &policy, Execution::Parallel) {
        Ok(s) => s,
        Err(e) => {
            report.push(CheckRecord::failed("oracle.wave_function", &e));
            return report;
        }
    };
    let psi = states.normalized(0);
    report.push(CheckRecord::new(
        "oracle.wave_function",
        max_dev(&|i| (psi[i] - bound_state(kappa, xs[i])).abs()),
        WAVE_FUNCTION_TOL,
        states.precision(),
    ));

    let mut scatter_dev: f64 = 0.0;
    let mut trans_dev: f64 = 0.0;
    let mut limit_dev: f64 = 0.0;
    for &e in energies {
        match scattering_state(&states, e) {
            Ok(st) => {
                scatter_dev = scatter_dev.max(max_dev(&|i| (st.psi[i] - scattering(kappa, e, xs[i])).norm()));
                let closed = scattering(kappa, e, grid.x_max()).norm_sqr();
                trans_dev = trans_dev.max((transmission(&st) - closed).abs());
                limit_dev = limit_dev.max((closed - 1.0).abs());
            }
            Err(err) => {
                report.push(CheckRecord::failed(format!("oracle.scattering(E={e})"), &err));
            }
        }
    }
    let p = states.precision();
    report.push(CheckRecord::new("oracle.scattering", scatter_dev, SCATTERING_TOL, p));
    report.push(CheckRecord::new("oracle.transmission", trans_dev, SCATTERING_TOL, p));
    report.push(
        CheckRecord::new("oracle.transmission_limit", limit_dev, TAIL_TOL, Precision::Native)
            .with_detail("closed form at x_max versus 1"),
    );
    report
}
