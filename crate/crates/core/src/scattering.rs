//! Scattering states at positive energy
//!
//! ```text
//! Ψ(x, E) = [1 + Σ_n ψ_n(x) e^{κ_n x}/(κ_n + i√E)] e^{i√E x}
//! ```
//!
//! The sum uses the unnormalized Kay–Moses solutions `ψ_n`, not `ψ_n/c_n`.
//! `Ψ → e^{ikx}` on the left; on the right it tends to a pure phase times
//! `e^{ikx}` with no reflected `e^{−ikx}` part.

use num_complex::Complex64;
use serde::Serialize;

use crate::bound_states::BoundStateSet;
use crate::error::{Error, Result};
use crate::numerics::{stencil, Grid};

/// Tail fraction below which the bound-state terms count as decayed.
const TAIL_DECAY: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatteringState {
    pub energy: f64,
    pub k: f64,
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    /// Smallest bound-state decay constant, `None` for the free particle.
    pub min_kappa: Option<f64>,
}

impl ScatteringState {
    /// `|Ψ|²` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Finite-tail error bound `e^{−2κ_N x_max}` (zero without bound states).
    pub fn tail_error_bound(&self) -> f64 {
        self.min_kappa.map_or(0.0, |k| (-2.0 * k * self.grid.x_max()).exp())
    }
}

pub fn scattering_state(states: &BoundStateSet, energy: f64) -> Result<ScatteringState> {
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::NonPositiveEnergy { energy });
    }
    let k = energy.sqrt();
    let grid = *states.grid();
    let weights: Vec<Complex64> = states
        .kappas()
        .iter()
        .map(|&kn| Complex64::new(kn, k).inv())
        .collect();
    let psi = (0..grid.len())
        .map(|i| {
            let x = grid.x(i);
            let mut amp = Complex64::new(1.0, 0.0);
            for (n, w) in weights.iter().enumerate() {
                amp += w * states.scaled(n)[i];
            }
            amp * Complex64::from_polar(1.0, k * x)
        })
        .collect();
    Ok(ScatteringState {
        energy,
        k,
        grid,
        psi,
        min_kappa: states.kappas().last().copied(),
    })
}

/// `|Ψ(x_max, E)|²`.
pub fn transmission(state: &ScatteringState) -> f64 {
    state.psi.last().map_or(0.0, |z| z.norm_sqr())
}

/// `|Ψ(x_min, E)|²`, the incident intensity.
pub fn incident_intensity(state: &ScatteringState) -> f64 {
    state.psi.first().map_or(0.0, |z| z.norm_sqr())
}

/// `max |−Ψ″ + VΨ − EΨ| / max|Ψ|` over interior points.
pub fn scattering_residual(v: &[f64], state: &ScatteringState) -> Result<f64> {
    if v.len() != state.psi.len() {
        return Err(Error::DimensionMismatch {
            expected: state.psi.len(),
            found: v.len(),
        });
    }
    let h = state.grid.spacing();
    let psi = &state.psi;
    let scale = psi.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let worst = stencil::interior(psi.len())
        .map(|i| (-stencil::second_derivative(psi, i, h) + psi[i] * (v[i] - state.energy)).norm())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Least-squares fit of `αe^{ikx} + βe^{−ikx}` on the right tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub window_start: f64,
    pub points: usize,
}

impl TailFit {
    /// `|β|/|α|`.
    pub fn reflection_ratio(&self) -> f64 {
        self.beta.norm() / self.alpha.norm()
    }
}

/// Start of the right-tail window: where the slowest bound-state term has
/// decayed to [`TAIL_DECAY`], kept between the grid center and ten steps
/// before the edge.
pub fn tail_window_start(grid: &Grid, min_kappa: Option<f64>) -> f64 {
    let center = 0.5 * (grid.x_min() + grid.x_max());
    let decayed = min_kappa.map_or(center, |k| -TAIL_DECAY.ln() / (2.0 * k));
    decayed.max(center).min(grid.x_max() - 10.0 * grid.spacing())
}

pub fn reflection_fit(state: &ScatteringState) -> TailFit {
    let g = &state.grid;
    let start = tail_window_start(g, state.min_kappa);
    let k = state.k;
    // normal equations for the basis u = e^{ikx}, w = e^{−ikx}
    let mut m = 0.0;
    let mut cross = Complex64::new(0.0, 0.0);
    let mut ru = Complex64::new(0.0, 0.0);
    let mut rw = Complex64::new(0.0, 0.0);
    for i in 0..g.len() {
        let x = g.x(i);
        if x < start {
            continue;
        }
        let u = Complex64::from_polar(1.0, k * x);
        let w = u.conj();
        m += 1.0;
        cross += u.conj() * w;
        ru += u.conj() * state.psi[i];
        rw += w.conj() * state.psi[i];
    }
    // [[m, cross], [conj(cross), m]]·[α, β] = [ru, rw]
    let det = m * m - cross.norm_sqr();
    let alpha = (ru * m - cross * rw) / det;
    let beta = (rw * m - cross.conj() * ru) / det;
    TailFit {
        alpha,
        beta,
        window_start: start,
        points: m as usize,
    }
}
