use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids or shapes do not match: {0}")]
    ShapeMismatch(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("requested mode count {requested} exceeds grid resolution (capacity {capacity})")]
    Aliasing { requested: usize, capacity: usize },

    #[error("conversion undefined: {0}")]
    ConversionUndefined(String),

    #[error("root bracketing failed: {0}")]
    NoRoot(String),

    #[error("step-size consistency check failed: discrepancy {discrepancy:.3e} exceeds {tolerance:.3e}")]
    StepSize { discrepancy: f64, tolerance: f64 },

    #[error("no admissible periodic-orbit case for these parameters")]
    NoAdmissibleCase,

    #[error("periodic orbit is degenerate (zero frequency)")]
    DegenerateOrbit,

    #[error("trajectory decays instead of escaping: parameters are not on an unstable branch")]
    Contradiction,

    #[error("fixed-point iteration is not contracting (ratio {ratio:.3})")]
    NoContraction { ratio: f64 },

    #[error("lambda left the resolvent disk (distance {distance:.3e}, radius {radius:.3e})")]
    ResolventDistance { distance: f64, radius: f64 },

    #[error("iteration failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
