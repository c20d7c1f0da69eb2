use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid control limits in dimension {dim}: lo={lo} must be < hi={hi}")]
    InvalidLimits { dim: usize, lo: f64, hi: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{kind} needs {need}, got {got}")]
    TooFew {
        kind: &'static str,
        need: String,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("environment: {0}")]
    Environment(String),

    #[error("randomization of `{parameter}` produced no admissible value after {tries} tries")]
    Randomization { parameter: String, tries: usize },

    #[error("layout: {0}")]
    Layout(String),
}
