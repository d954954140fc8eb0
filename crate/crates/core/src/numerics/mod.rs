//! Evaluation grid, precision policy and the linear-algebra layer.

pub mod grid;
pub mod linalg;
pub mod precision;
pub mod real;
pub mod stencil;

pub use grid::Grid;
pub use linalg::{condition_estimate, solve_linear, LinearSolution, Lu, Matrix};
pub use precision::{Escalation, Evaluated, PrecisionMode, PrecisionPolicy, DEFAULT_EXTENDED_BITS};
pub use real::{Bits, Extended, Precision, Real};
