//! Reflectionless potentials from a prescribed bound-state spectrum.
//!
//! Given levels `E_n = −κ_n²` (units with ħ²/2m = 1) the crate builds the
//! unique reflectionless potential supporting exactly those levels, its
//! bound states, its scattering states, and a suite of checks that
//! compare the reconstruction against independent numerics.
//!
//! ```
//! use reflectionless::{Reconstruction, PrecisionPolicy};
//!
//! let r = Reconstruction::from_energies(&[-1.0]).unwrap();
//! let v = r.potential(0.0, &PrecisionPolicy::default()).unwrap();
//! assert!((v.value + 2.0).abs() < 1e-14);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_states;
pub mod error;
pub mod exec;
pub mod marchenko;
pub mod numerics;
pub mod scattering;
pub mod spectrum;
pub mod verification;

pub use bound_states::{bound_states, kay_moses_matrix, potential_via_states, states_at, BoundStateSet};
pub use error::{Error, Result};
pub use exec::Execution;
pub use marchenko::{
    asymptotic_amplitudes, c_matrix, log_det, norm_constants, norm_constants_via_cauchy, potential,
    potential_profile, NormConstants, PotentialProfile,
};
pub use numerics::{Escalation, Evaluated, Grid, Precision, PrecisionMode, PrecisionPolicy};
pub use scattering::{scattering_state, ScatteringState};
pub use spectrum::{calibrate_length, preset, PresetKind, Spectrum, SpectrumOptions};
pub use verification::{full_verify, CheckRecord, VerificationReport};

/// A spectrum paired with its normalization constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub spectrum: Spectrum,
    pub norms: NormConstants,
}

impl Reconstruction {
    pub fn new(spectrum: Spectrum) -> Result<Self> {
        let norms = norm_constants(&spectrum)?;
        Ok(Reconstruction { spectrum, norms })
    }

    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        Self::new(Spectrum::from_energies(energies)?)
    }

    pub fn from_preset(kind: &PresetKind) -> Result<Self> {
        Self::new(kind.spectrum()?)
    }

    pub fn potential(&self, x: f64, policy: &PrecisionPolicy) -> Result<Evaluated<f64>> {
        potential(&self.spectrum, &self.norms, x, policy)
    }

    pub fn potential_profile(&self, grid: &Grid, policy: &PrecisionPolicy, exec: Execution) -> Result<PotentialProfile> {
        potential_profile(&self.spectrum, &self.norms, grid, policy, exec)
    }

    pub fn bound_states(&self, grid: &Grid, policy: &PrecisionPolicy, exec: Execution) -> Result<BoundStateSet> {
        bound_states(&self.spectrum, &self.norms, grid, policy, exec)
    }
}
