use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("zero actual value at index {index}; percentage error undefined")]
    ZeroActual { index: usize },

    #[error("DIMS `{id}`: {reason}")]
    Dims { id: String, reason: String },

    #[error("series too short: need {needed} observations, have {have}")]
    SeriesTooShort { needed: usize, have: usize },

    #[error("parameter `{name}` = {value} outside [{lo}, {hi}]")]
    ParameterOutOfBounds {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible fit at step {step}: {reason}")]
    InfeasibleFit { step: usize, reason: String },

    #[error("optimizer found no feasible point in {evals} evaluations")]
    NoFeasiblePoint { evals: usize },

    #[error("calendar: {0}")]
    Calendar(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
