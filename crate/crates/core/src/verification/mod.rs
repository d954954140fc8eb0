//! Independent checks of a reconstruction: a forward Numerov eigenvalue
//! solver, closed-form single-state oracles and the full invariant suite.

pub mod numerov;
pub mod oracle;
pub mod report;
pub mod suite;

pub use numerov::numerov_eigenvalues;
pub use oracle::oracle_n1;
pub use report::{CheckRecord, VerificationReport};
pub use suite::{full_verify, verify_potential, wave_policy, SCATTERING_ENERGIES};
