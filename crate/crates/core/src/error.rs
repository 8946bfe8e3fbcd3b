use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("impossible observation (z={z}, b={b}): every model assigns it zero likelihood")]
    ImpossibleObservation { z: usize, b: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("indeterminate KL gap between models {i} and {j}: both violate the user's support")]
    Indeterminate { i: usize, j: usize },

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("degenerate strategy: {0}")]
    DegenerateStrategy(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
