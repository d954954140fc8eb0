use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bound-state energy {energy} is not negative")]
    NonNegativeEnergy { energy: f64 },
    #[error("decay constant {kappa} is not positive")]
    NonPositiveKappa { kappa: f64 },
    #[error("degenerate spectrum: kappa {first} and {second} are within the separation tolerance")]
    DegenerateSpectrum { first: f64, second: f64 },
    #[error("{count} states exceed the cap of {max}")]
    TooManyStates { count: usize, max: usize },
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("invalid preset parameters: {0}")]
    InvalidParams(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("spectrum file: {0}")]
    SpectrumFile(String),
    #[error("inputs must be positive, got {0}")]
    NonPositiveInput(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid precision policy: {0}")]
    InvalidPolicy(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("singular matrix (pivot {pivot:e})")]
    SingularMatrix { pivot: f64 },
    #[error("exponent {exponent} overflows the active precision")]
    Overflow { exponent: f64 },
    #[error("scattering energy {energy} is not positive")]
    NonPositiveEnergy { energy: f64 },
    #[error("stencil at x = {x} leaves the grid")]
    EdgeOfGrid { x: f64 },
    #[error("x = {x} is not a grid point")]
    OffGrid { x: f64 },
    #[error("found {found} bound states, {requested} requested")]
    NotEnoughStates { found: usize, requested: usize },
    #[error("potential has not decayed at the grid edge (|V| = {tail:e})")]
    NonDecayedTail { tail: f64 },
    #[error("at x = {x}: {source}")]
    AtPoint {
        x: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Failures of the arithmetic rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularMatrix { .. }
            | Error::Overflow { .. }
            | Error::NotEnoughStates { .. }
            | Error::NonDecayedTail { .. } => true,
            Error::AtPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at(self, x: f64) -> Error {
        match self {
            e @ Error::AtPoint { .. } => e,
            e => Error::AtPoint {
                x,
                source: Box::new(e),
            },
        }
    }
}
