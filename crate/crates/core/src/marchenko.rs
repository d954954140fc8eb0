//! Normalization constants, the `C` matrix and the reflectionless potential
//!
//! ```text
//! c_n² = 2κ_n ∏_{m≠n} |(κ_m + κ_n)/(κ_m − κ_n)|
//! C_ij = c_i c_j/(κ_i + κ_j) · e^{−(κ_i+κ_j)x}
//! V(x) = −2 d²/dx² ln det(I + C)
//! ```
//!
//! The second derivative is taken analytically. With `K = diag(κ_i)`,
//! `C′ = −(KC + CK)` and `C″ = K²C + 2KCK + CK²`. Writing
//! `E = (I + C)⁻¹C` and using `(I + C)⁻¹ = I − E`, the large entries of `C`
//! cancel from `V = −2[tr(A⁻¹C″) − tr((A⁻¹C′)²)]`, leaving
//!
//! ```text
//! V = −8[tr(K²E) − tr((KE)²)]
//! ```
//!
//! `E` has its eigenvalues in `[0, 1)` and is small where `C` is, so the
//! tails keep their relative accuracy.
//!
//! For `x < 0` the entries of `C` grow like `e^{2κ_1|x|}`. There the
//! left-side determinant is used instead. With `Q_ij = 1/(κ_i+κ_j)`,
//! `Q⁻¹ = Σ·diag(a)·Q·diag(a)·Σ` where `a_n` is the product formula and
//! `Σ = diag((−1)^n)`, so
//!
//! ```text
//! det(I + C(x)) = ∏ c_i² e^{−2κ_i x} · det Q · det(I + C̃(−x)),   c̃_n = a_n/c_n
//! ```
//!
//! and `V(x) = V_c̃(−x)`. Both determinants stay well conditioned on their
//! own half-line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numerics::{Evaluated, Grid, Lu, Matrix, Precision, PrecisionPolicy, Real};
use crate::spectrum::Spectrum;

/// Normalization constants `c_n²`, in the same order as the spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormConstants {
    c_sq: Vec<f64>,
}

impl NormConstants {
    /// Wraps externally supplied constants; all must be positive.
    pub fn new(c_sq: Vec<f64>) -> Result<Self> {
        if let Some(&v) = c_sq.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NonPositiveInput(v));
        }
        Ok(NormConstants { c_sq })
    }

    pub fn c_sq(&self) -> &[f64] {
        &self.c_sq
    }

    /// `c_n = +√(c_n²)`.
    pub fn c(&self) -> Vec<f64> {
        self.c_sq.iter().map(|v| v.sqrt()).collect()
    }

    pub fn len(&self) -> usize {
        self.c_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_sq.is_empty()
    }
}

fn product_formula<T: Real>(kappas: &[T]) -> Result<Vec<T>> {
    let ctx = kappas[0].ctx();
    let mut out = Vec::with_capacity(kappas.len());
    for (n, kn) in kappas.iter().enumerate() {
        let mut acc = T::lift(2.0, ctx) * kn.clone();
        for (m, km) in kappas.iter().enumerate() {
            if m == n {
                continue;
            }
            let gap = (km.clone() - kn.clone()).abs();
            if gap.to_f64() == 0.0 {
                return Err(Error::DegenerateSpectrum {
                    first: kn.to_f64(),
                    second: km.to_f64(),
                });
            }
            acc = acc * (km.clone() + kn.clone()) / gap;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Normalization constants from the closed product formula.
pub fn norm_constants(s: &Spectrum) -> Result<NormConstants> {
    let c_sq = product_formula(s.kappas())?;
    NormConstants::new(c_sq)
}

/// The Cauchy matrix `Q_nν = 1/(κ_n + κ_ν)`.
pub fn cauchy_matrix(s: &Spectrum) -> Matrix<f64> {
    let k = s.kappas();
    Matrix::from_fn(k.len(), |i, j| 1.0 / (k[i] + k[j]))
}

/// Solves `Q·d = −1`, the large-`x` limit of the Kay–Moses system.
///
/// `d_n` is the limit of `ψ_n(x)·e^{κ_n x}`. Its magnitude is `c_n²`, and
/// its sign is `(−1)^n` with the ground state `n = 1`.
pub fn asymptotic_amplitudes(s: &Spectrum, policy: &PrecisionPolicy) -> Result<Evaluated<Vec<f64>>> {
    fn kernel<T: Real>(kappas: &[f64], ctx: T::Ctx) -> Result<(Vec<f64>, f64)> {
        let k: Vec<T> = kappas.iter().map(|&v| T::lift(v, ctx)).collect();
        let one = T::lift(1.0, ctx);
        let q = Matrix::from_fn(k.len(), |i, j| one.clone() / (k[i].clone() + k[j].clone()));
        let lu = Lu::factor(&q)?;
        let d = lu.solve(&vec![-one; k.len()]);
        Ok((d.iter().map(Real::to_f64).collect(), lu.condition_estimate()))
    }
    policy.validate()?;
    policy.evaluate(
        || kernel::<f64>(s.kappas(), ()),
        |bits| kernel::<crate::numerics::Extended>(s.kappas(), bits),
    )
}

/// `c_n² = |d_n|` from [`asymptotic_amplitudes`]; an independent route to
/// [`norm_constants`].
pub fn norm_constants_via_cauchy(s: &Spectrum, policy: &PrecisionPolicy) -> Result<Evaluated<NormConstants>> {
    let d = asymptotic_amplitudes(s, policy)?;
    let precision = d.precision;
    let condition = d.condition;
    let c_sq = d.value.iter().map(|v| v.abs()).collect();
    Ok(Evaluated {
        value: NormConstants::new(c_sq)?,
        precision,
        condition,
    })
}

/// Spectrum and constants lifted into the working arithmetic.
#[derive(Clone, Debug)]
pub(crate) struct Lifted<T> {
    pub kappa: Vec<T>,
    pub c_sq: Vec<T>,
    pub c: Vec<T>,
}

impl<T: Real> Lifted<T> {
    pub fn new(s: &Spectrum, c: &NormConstants, ctx: T::Ctx) -> Result<Self> {
        if c.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                found: c.len(),
            });
        }
        let kappa: Vec<T> = s.kappas().iter().map(|&k| T::lift(k, ctx)).collect();
        let c_sq: Vec<T> = c.c_sq().iter().map(|&v| T::lift(v, ctx)).collect();
        let c = c_sq.iter().map(|v| v.sqrt()).collect();
        Ok(Lifted { kappa, c_sq, c })
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn ctx(&self) -> T::Ctx {
        self.kappa[0].ctx()
    }

    pub fn sum_kappa(&self, i: usize, j: usize) -> T {
        self.kappa[i].clone() + self.kappa[j].clone()
    }

    /// The left-side constants `c̃_n² = a_n²/c_n²`, `a_n` the product formula.
    pub fn mirrored(&self) -> Result<Self> {
        let a = product_formula(&self.kappa)?;
        let c_sq: Vec<T> = a
            .into_iter()
            .zip(&self.c_sq)
            .map(|(a, c2)| a.clone() / c2.clone() * a)
            .collect();
        let c = c_sq.iter().map(|v| v.sqrt()).collect();
        Ok(Lifted {
            kappa: self.kappa.clone(),
            c_sq,
            c,
        })
    }
}

fn checked_exp<T: Real>(arg: T) -> Result<T> {
    let a = arg.to_f64();
    if a > T::max_exp_arg(arg.ctx()) {
        return Err(Error::Overflow { exponent: a });
    }
    Ok(arg.exp())
}

pub(crate) fn c_matrix_in<T: Real>(p: &Lifted<T>, x: f64) -> Result<Matrix<T>> {
    let n = p.len();
    let xt = T::lift(x, p.ctx());
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = p.sum_kappa(i, j);
            let e = checked_exp(-(s.clone() * xt.clone()))?;
            let weight = if i == j {
                p.c_sq[i].clone()
            } else {
                p.c[i].clone() * p.c[j].clone()
            };
            let v = weight / s * e;
            if !v.is_finite() {
                return Err(Error::Overflow {
                    exponent: -(p.sum_kappa(i, j) * xt).to_f64(),
                });
            }
            entries.push(v);
        }
    }
    let mut it = entries.into_iter();
    Ok(Matrix::from_fn(n, |_, _| it.next().expect("n² entries")))
}

/// The symmetric matrix `C(x)` in native precision.
pub fn c_matrix(s: &Spectrum, c: &NormConstants, x: f64) -> Result<Matrix<f64>> {
    let p = Lifted::<f64>::new(s, c, ())?;
    c_matrix_in(&p, x).map_err(|e| e.at(x))
}

fn one_plus_c<T: Real>(p: &Lifted<T>, x: f64) -> Result<(Matrix<T>, Matrix<T>)> {
    let c = c_matrix_in(p, x)?;
    let one = T::lift(1.0, p.ctx());
    let a = Matrix::from_fn(p.len(), |i, j| {
        if i == j {
            one.clone() + c[(i, j)].clone()
        } else {
            c[(i, j)].clone()
        }
    });
    Ok((a, c))
}

/// `ln det Q = Σ_{i<j} 2 ln|κ_i − κ_j| − Σ_{i,j} ln(κ_i + κ_j)`.
fn ln_det_cauchy<T: Real>(p: &Lifted<T>) -> T {
    let two = T::lift(2.0, p.ctx());
    let mut acc = T::lift(0.0, p.ctx());
    for i in 0..p.len() {
        for j in 0..p.len() {
            acc = acc - p.sum_kappa(i, j).ln();
            if i < j {
                acc = acc + two.clone() * (p.kappa[i].clone() - p.kappa[j].clone()).abs().ln();
            }
        }
    }
    acc
}

pub(crate) fn log_det_in<T: Real>(p: &Lifted<T>, x: f64) -> Result<(T, f64)> {
    if x >= 0.0 {
        let (a, _) = one_plus_c(p, x)?;
        let lu = Lu::factor(&a)?;
        Ok((lu.ln_abs_det(), lu.condition_estimate()))
    } else {
        let (left, cond) = log_det_in(&p.mirrored()?, -x)?;
        let xt = T::lift(x, p.ctx());
        let two = T::lift(2.0, p.ctx());
        let mut acc = left + ln_det_cauchy(p);
        for i in 0..p.len() {
            acc = acc + p.c_sq[i].ln() - two.clone() * p.kappa[i].clone() * xt.clone();
        }
        Ok((acc, cond))
    }
}

pub(crate) fn potential_in<T: Real>(p: &Lifted<T>, x: f64) -> Result<(T, f64)> {
    if x < 0.0 {
        return potential_in(&p.mirrored()?, -x);
    }
    let n = p.len();
    let ctx = p.ctx();
    let (a, c) = one_plus_c(p, x)?;
    let lu = Lu::factor(&a)?;
    let cols: Vec<Vec<T>> = (0..n)
        .map(|j| lu.solve(&(0..n).map(|i| c[(i, j)].clone()).collect::<Vec<_>>()))
        .collect();
    let e = Matrix::from_fn(n, |i, j| cols[j][i].clone());
    // V = −8[tr(K²E) − tr((KE)²)]
    let mut acc = T::lift(0.0, ctx);
    for i in 0..n {
        acc = acc + p.kappa[i].clone() * p.kappa[i].clone() * e[(i, i)].clone();
        for j in 0..n {
            acc = acc - p.kappa[i].clone() * e[(i, j)].clone() * p.kappa[j].clone() * e[(j, i)].clone();
        }
    }
    Ok((T::lift(-8.0, ctx) * acc, lu.condition_estimate()))
}

/// Step of the finite-difference oracle; a power of two, so that `x ± kh`
/// is exact for the sample points used.
pub(crate) const FD_STEP: f64 = 1.0 / 8192.0;

/// `−2 d²/dx² ln det(I + C)` by the five-point stencil, evaluated entirely
/// in `bits`-bit arithmetic. Test oracle for [`potential`].
pub(crate) fn potential_fd_oracle(s: &Spectrum, c: &NormConstants, x: f64, bits: crate::numerics::Bits) -> Result<f64> {
    use crate::numerics::Extended;
    let p = Lifted::<Extended>::new(s, c, bits)?;
    let f = (-2..=2)
        .map(|k| log_det_in(&p, x + k as f64 * FD_STEP).map(|(v, _)| v))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(x))?;
    let lift = |v: f64| Extended::lift(v, bits);
    let num = lift(16.0) * (f[1].clone() + f[3].clone())
        - (f[0].clone() + f[4].clone())
        - lift(30.0) * f[2].clone();
    Ok((lift(-2.0) * num / lift(12.0 * FD_STEP * FD_STEP)).to_f64())
}

/// Runs a lifted kernel under `policy`.
pub(crate) fn with_policy<R>(
    s: &Spectrum,
    c: &NormConstants,
    x: f64,
    policy: &PrecisionPolicy,
    native: impl Fn(&Lifted<f64>) -> Result<(R, f64)>,
    extended: impl Fn(&Lifted<crate::numerics::Extended>) -> Result<(R, f64)>,
) -> Result<Evaluated<R>> {
    policy.validate()?;
    let lifted = Lifted::<f64>::new(s, c, ())?;
    policy
        .evaluate(
            || native(&lifted),
            |bits| extended(&Lifted::new(s, c, bits)?),
        )
        .map_err(|e| e.at(x))
}

/// `ln det(I + C(x))`.
pub fn log_det(s: &Spectrum, c: &NormConstants, x: f64, policy: &PrecisionPolicy) -> Result<Evaluated<f64>> {
    with_policy(
        s,
        c,
        x,
        policy,
        |p| log_det_in(p, x),
        |p| log_det_in(p, x).map(|(v, k)| (v.to_f64(), k)),
    )
}

/// Reflectionless potential `V(x)` by the analytic trace identity.
pub fn potential(s: &Spectrum, c: &NormConstants, x: f64, policy: &PrecisionPolicy) -> Result<Evaluated<f64>> {
    with_policy(
        s,
        c,
        x,
        policy,
        |p| potential_in(p, x),
        |p| potential_in(p, x).map(|(v, k)| (v.to_f64(), k)),
    )
}

/// `V` sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialProfile {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Widest precision any sample needed.
    pub precision: Precision,
    pub max_condition: f64,
}

impl PotentialProfile {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn potential_profile(
    s: &Spectrum,
    c: &NormConstants,
    grid: &Grid,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<PotentialProfile> {
    let samples = exec.try_map(grid.len(), |i| potential(s, c, grid.x(i), policy))?;
    Ok(PotentialProfile {
        grid: *grid,
        precision: samples.iter().fold(Precision::Native, |p, e| p.max(e.precision)),
        max_condition: samples.iter().map(|e| e.condition).fold(0.0, f64::max),
        values: samples.into_iter().map(|e| e.value).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Extended;

    /// `ln det(I + C(x))` straight from the definition at 512 bits.
    fn direct_log_det(s: &Spectrum, c: &NormConstants, x: f64) -> f64 {
        let p = Lifted::<Extended>::new(s, c, crate::numerics::Bits(512)).unwrap();
        let (a, _) = one_plus_c(&p, x).unwrap();
        Lu::factor(&a).unwrap().ln_abs_det().to_f64()
    }

    #[test]
    fn two_state_potential_at_origin_matches_fd_oracle() {
        let (s, c) = constants(&[2.0, 1.0]);
        let fd = potential_fd_oracle(&s, &c, 0.0, crate::numerics::Bits(256)).unwrap();
        let v = potential(&s, &c, 0.0, &PrecisionPolicy::default()).unwrap().value;
        assert!((fd + 6.0).abs() < 1e-9, "{fd}");
        assert!((v - fd).abs() < 1e-10, "{v} vs {fd}");
    }

    #[test]
    fn left_side_determinant_matches_definition() {
        let s = Spectrum::from_kappas(&[2.0, 1.0]).unwrap();
        for c in [norm_constants(&s).unwrap(), NormConstants::new(vec![30.0, 2.0]).unwrap()] {
            for x in [-3.0, -0.7, -0.01] {
                let got = log_det(&s, &c, x, &PrecisionPolicy::default()).unwrap().value;
                let want = direct_log_det(&s, &c, x);
                assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn asymmetric_constants_give_fd_consistent_potential() {
        let s = Spectrum::from_kappas(&[2.0, 1.0]).unwrap();
        let c = NormConstants::new(vec![30.0, 2.0]).unwrap();
        for x in [-2.0, -0.5, 0.5, 2.0] {
            let fd = potential_fd_oracle(&s, &c, x, crate::numerics::Bits(256)).unwrap();
            let v = potential(&s, &c, x, &PrecisionPolicy::default()).unwrap().value;
            assert!((v - fd).abs() < 1e-9, "x={x}: {v} vs {fd}");
        }
        let v = |x: f64| potential(&s, &c, x, &PrecisionPolicy::default()).unwrap().value;
        assert!((v(1.0) - v(-1.0)).abs() > 1e-3);
    }

    fn constants(k: &[f64]) -> (Spectrum, NormConstants) {
        let s = Spectrum::from_kappas(k).unwrap();
        let c = norm_constants(&s).unwrap();
        (s, c)
    }

    #[test]
    fn norm_constant_examples() {
        for k in [0.3, 1.0, 2.5] {
            assert_eq!(norm_constants(&Spectrum::from_kappas(&[k]).unwrap()).unwrap().c_sq(), &[2.0 * k]);
        }
        let (_, c) = constants(&[2.0, 1.0]);
        assert_eq!(c.c_sq(), &[12.0, 6.0]);
    }

    #[test]
    fn cauchy_route_matches_with_alternating_sign() {
        let (s, c) = constants(&[4.0, 3.0, 2.0, 1.0]);
        let d = asymptotic_amplitudes(&s, &PrecisionPolicy::default()).unwrap().value;
        for (n, (dn, cn)) in d.iter().zip(c.c_sq()).enumerate() {
            let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
            assert!((dn - sign * cn).abs() <= 1e-9 * cn, "n={n}: {dn} vs {cn}");
        }
    }

    #[test]
    fn c_matrix_examples() {
        let (s, c) = constants(&[1.0]);
        assert_eq!(c_matrix(&s, &c, 0.0).unwrap()[(0, 0)], 1.0);
        assert!(c_matrix(&s, &c, 50.0).unwrap()[(0, 0)] < 1e-40);
        let (s, c) = constants(&[2.0, 1.0]);
        let m = c_matrix(&s, &c, 0.0).unwrap();
        assert_eq!(m[(0, 0)], 3.0);
        assert_eq!(m[(1, 1)], 3.0);
        assert!((m[(0, 1)] - 72f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(m[(0, 1)], m[(1, 0)]);
    }

    #[test]
    fn c_matrix_overflow_native_but_not_extended() {
        let (s, c) = constants(&[1.0]);
        let err = c_matrix(&s, &c, -400.0).unwrap_err();
        assert!(matches!(err, Error::AtPoint { ref source, .. } if matches!(**source, Error::Overflow { .. })));
        let p = Lifted::<Extended>::new(&s, &c, crate::numerics::Bits(256)).unwrap();
        let m = c_matrix_in(&p, -400.0).unwrap();
        assert!((m[(0, 0)].ln().to_f64() - 800.0).abs() < 1e-12);
    }

    #[test]
    fn single_state_potential_is_sech_squared() {
        let (s, c) = constants(&[1.0]);
        let v0 = potential(&s, &c, 0.0, &PrecisionPolicy::default()).unwrap();
        assert!((v0.value + 2.0).abs() < 1e-15);
        for x in [-7.0, -2.5, -0.3, 0.7, 4.0] {
            let v = potential(&s, &c, x, &PrecisionPolicy::default()).unwrap().value;
            let sech = 1.0 / f64::cosh(x);
            assert!((v + 2.0 * sech * sech).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn log_det_examples() {
        let p = PrecisionPolicy::default();
        let (s, c) = constants(&[1.0]);
        assert!((log_det(&s, &c, 0.0, &p).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert!(log_det(&s, &c, 40.0, &p).unwrap().value.abs() < 1e-30);
        let (s, c) = constants(&[2.0, 1.0]);
        // det [[4, √72/3], [√72/3, 4]] = 16 − 8
        assert!((log_det(&s, &c, 0.0, &p).unwrap().value - 8f64.ln()).abs() < 1e-14);
        // continuous across the switch between the two matrix forms
        let left = log_det(&s, &c, -1e-9, &p).unwrap().value;
        let right = log_det(&s, &c, 1e-9, &p).unwrap().value;
        assert!((left - right).abs() < 1e-7);
    }

    #[test]
    fn log_det_is_decreasing() {
        let (s, c) = constants(&[3.0, 1.7, 0.6]);
        let p = PrecisionPolicy::default();
        let vals: Vec<f64> = (-20..=20)
            .map(|i| log_det(&s, &c, i as f64 * 0.4, &p).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn extended_agrees_with_native() {
        let (s, c) = constants(&[3.0, 2.0, 1.2]);
        for x in [-3.0, -0.4, 0.0, 0.9, 3.3] {
            let n = potential(&s, &c, x, &PrecisionPolicy::default()).unwrap();
            let e = potential(&s, &c, x, &PrecisionPolicy::extended(256)).unwrap();
            assert_eq!(e.precision, Precision::Extended { bits: 256 });
            assert!((n.value - e.value).abs() < 1e-11 * e.value.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn mismatched_constants_rejected() {
        let s = Spectrum::from_kappas(&[2.0, 1.0]).unwrap();
        let c = NormConstants::new(vec![1.0]).unwrap();
        assert!(potential(&s, &c, 0.0, &PrecisionPolicy::default()).is_err());
        assert!(NormConstants::new(vec![1.0, -1.0]).is_err());
    }
}
