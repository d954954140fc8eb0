//! Bound states from the Kay–Moses linear system
//!
//! ```text
//! ψ_n(x) + Σ_ν c_n² e^{κ_n x} e^{κ_ν x}/(κ_n + κ_ν) · ψ_ν(x) = −c_n² e^{κ_n x}
//! ```
//!
//! Solutions are unnormalized with `∫ψ_n² = c_n²`. The system is not solved
//! in this form, whose scaling spreads with `c_n²`. Writing `ψ_n = c_n w_n`,
//! for `x ≤ 0` it becomes `(I + C(−x))·w = −c e^{κx}` with the symmetric `C`
//! of the potential. For `x > 0`, the Woodbury identity with
//! `Q⁻¹ = Σ·diag(a)·Q·diag(a)·Σ` reduces it to
//!
//! ```text
//! w_n = (−1)^n u_n,   (I + C̃(x))·u = c̃ e^{−κx},   c̃_n = a_n/c_n
//! ```
//!
//! where `a_n` is the product formula and `C̃` is built from `c̃`. Both
//! matrices are near the identity on their own half-line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::marchenko::{c_matrix_in, with_policy, Lifted, NormConstants};
use crate::numerics::{stencil, Evaluated, Grid, Lu, Matrix, Precision, PrecisionPolicy, Real};
use crate::spectrum::Spectrum;

/// The raw system matrix and right-hand side at `x`.
pub fn kay_moses_matrix(s: &Spectrum, c: &NormConstants, x: f64) -> Result<(Matrix<f64>, Vec<f64>)> {
    let k = s.kappas();
    let c_sq = c.c_sq();
    if c_sq.len() != k.len() {
        return Err(Error::DimensionMismatch {
            expected: k.len(),
            found: c_sq.len(),
        });
    }
    let worst = 2.0 * k[0] * x + c_sq.iter().fold(0.0, |m: f64, v| m.max(v.ln()));
    if worst > f64::MAX.ln() {
        return Err(Error::Overflow { exponent: worst }.at(x));
    }
    let e: Vec<f64> = k.iter().map(|kn| (kn * x).exp()).collect();
    let m = Matrix::from_fn(k.len(), |n, v| {
        let off = c_sq[n] * e[n] * e[v] / (k[n] + k[v]);
        if n == v {
            1.0 + off
        } else {
            off
        }
    });
    let b = (0..k.len()).map(|n| -c_sq[n] * e[n]).collect();
    Ok((m, b))
}

type StatePair = (Vec<f64>, Vec<f64>);

/// `(ψ, φ)` at `x` in the working arithmetic.
fn states_in<T: Real>(p: &Lifted<T>, x: f64) -> Result<(StatePair, f64)> {
    let n = p.len();
    let ctx = p.ctx();
    let (q, y) = if x <= 0.0 { (p.clone(), -x) } else { (p.mirrored()?, x) };
    let yt = T::lift(y, ctx);
    let one = T::lift(1.0, ctx);
    let c = c_matrix_in(&q, y)?;
    let a = Matrix::from_fn(n, |i, j| if i == j { one.clone() + c[(i, j)].clone() } else { c[(i, j)].clone() });
    let g: Vec<T> = (0..n)
        .map(|i| q.c[i].clone() * (-(q.kappa[i].clone() * yt.clone())).exp())
        .collect();
    let lu = Lu::factor(&a)?;
    let u = lu.solve(&g);
    let xt = T::lift(x, ctx);
    let mut psi = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    for (i, ui) in u.iter().enumerate() {
        let flip = x <= 0.0 || i % 2 == 0;
        let normalized = if flip { -ui.clone() } else { ui.clone() };
        let raw = p.c[i].clone() * normalized;
        phi.push((raw.clone() * (p.kappa[i].clone() * xt.clone()).exp()).to_f64());
        psi.push(raw.to_f64());
    }
    Ok(((psi, phi), lu.condition_estimate()))
}

/// Unnormalized `ψ_n(x)` for all states.
pub fn states_at(s: &Spectrum, c: &NormConstants, x: f64, policy: &PrecisionPolicy) -> Result<Evaluated<Vec<f64>>> {
    Ok(scaled_states_at(s, c, x, policy)?.map(|(psi, _)| psi))
}

fn scaled_states_at(
    s: &Spectrum,
    c: &NormConstants,
    x: f64,
    policy: &PrecisionPolicy,
) -> Result<Evaluated<StatePair>> {
    with_policy(s, c, x, policy, |p| states_in(p, x), |p| states_in(p, x))
}

/// All bound states sampled on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundStateSet {
    kappas: Vec<f64>,
    c_sq: Vec<f64>,
    grid: Grid,
    /// `raw[n][i] = ψ_n(x_i)`.
    raw: Vec<Vec<f64>>,
    /// `scaled[n][i] = ψ_n(x_i) e^{κ_n x_i}`.
    scaled: Vec<Vec<f64>>,
    precision: Precision,
    max_condition: f64,
}

impl BoundStateSet {
    /// No bound states at all: the free particle.
    pub fn free(grid: Grid) -> Self {
        BoundStateSet {
            kappas: Vec::new(),
            c_sq: Vec::new(),
            grid,
            raw: Vec::new(),
            scaled: Vec::new(),
            precision: Precision::Native,
            max_condition: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }

    pub fn kappas(&self) -> &[f64] {
        &self.kappas
    }

    pub fn c_sq(&self) -> &[f64] {
        &self.c_sq
    }

    pub fn energies(&self) -> Vec<f64> {
        self.kappas.iter().map(|k| -k * k).collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Widest precision any grid point needed.
    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn max_condition(&self) -> f64 {
        self.max_condition
    }

    /// Unnormalized state `n` (0 is the ground state).
    pub fn raw(&self, n: usize) -> &[f64] {
        &self.raw[n]
    }

    /// `ψ_n e^{κ_n x}` for state `n`.
    pub fn scaled(&self, n: usize) -> &[f64] {
        &self.scaled[n]
    }

    /// Unit-norm state `ψ_n / c_n`.
    pub fn normalized(&self, n: usize) -> Vec<f64> {
        let c = self.c_sq[n].sqrt();
        self.raw[n].iter().map(|v| v / c).collect()
    }
}

/// Solves the Kay–Moses system at every grid point.
pub fn bound_states(
    s: &Spectrum,
    c: &NormConstants,
    grid: &Grid,
    policy: &PrecisionPolicy,
    exec: Execution,
) -> Result<BoundStateSet> {
    let tail = (-s.min_kappa() * grid.x_max().abs().min(grid.x_min().abs())).exp();
    if tail >= 0.05 {
        log::warn!("grid {grid} is narrow for kappa_N = {}: tails reach {tail:.3}", s.min_kappa());
    }
    let samples = exec.try_map(grid.len(), |i| scaled_states_at(s, c, grid.x(i), policy))?;
    let n = s.len();
    let mut raw = vec![Vec::with_capacity(grid.len()); n];
    let mut scaled = vec![Vec::with_capacity(grid.len()); n];
    let mut precision = Precision::Native;
    let mut max_condition: f64 = 0.0;
    for ev in samples {
        precision = precision.max(ev.precision);
        max_condition = max_condition.max(ev.condition);
        let (psi, phi) = ev.value;
        for k in 0..n {
            raw[k].push(psi[k]);
            scaled[k].push(phi[k]);
        }
    }
    Ok(BoundStateSet {
        kappas: s.kappas().to_vec(),
        c_sq: c.c_sq().to_vec(),
        grid: *grid,
        raw,
        scaled,
        precision,
        max_condition,
    })
}

/// `V(x) = 2 d/dx Σ ψ_n(x) e^{κ_n x}` at a grid point, by a five-point
/// central stencil.
pub fn potential_via_states(states: &BoundStateSet, x: f64) -> Result<f64> {
    let g = &states.grid;
    let i = g.index_of(x).ok_or(Error::OffGrid { x })?;
    if !stencil::interior(g.len()).contains(&i) {
        return Err(Error::EdgeOfGrid { x });
    }
    let sum: Vec<f64> = (i - 2..=i + 2)
        .map(|j| states.scaled.iter().map(|phi| phi[j]).sum())
        .collect();
    Ok(2.0 * stencil::first_derivative(&sum, 2, g.spacing()))
}
