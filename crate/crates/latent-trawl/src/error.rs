use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its domain (non-positive rate, weights not
    /// summing to one, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An input series or argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A moment or density that does not exist for the given parameters.
    #[error("undefined quantity: {0}")]
    Undefined(String),

    /// A pair density evaluated to a nonpositive value; carries the original
    /// observation indices so the offending pair can be inspected.
    #[error("nonpositive pair density {value:e} at pair ({i}, {j})")]
    NonpositivePairDensity { i: usize, j: usize, value: f64 },

    /// Adaptive quadrature could not reach the requested accuracy.
    #[error("quadrature error estimate {estimate:e} exceeds the hard limit {limit:e}")]
    QuadratureAccuracy { estimate: f64, limit: f64 },

    /// The numerical Hessian of the pairwise likelihood is singular.
    #[error("singular Hessian (condition number {condition:e})")]
    SingularHessian { condition: f64 },

    /// Root finding failed to bracket or converge.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// Malformed CSV input; `line` is 1-based and counts the header.
    #[error("csv error at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
