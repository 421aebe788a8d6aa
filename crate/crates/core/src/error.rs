use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("missing cell: subject {subject:?} has no value for condition {condition:?}")]
    MissingCell { subject: String, condition: String },

    #[error("duplicate cell: subject {subject:?}, condition {condition:?} appears more than once")]
    DuplicateCell { subject: String, condition: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be at least 1, got {0}")]
    InvalidDf(u64),

    #[error("condition index {index} out of range for {count} conditions")]
    ConditionOutOfRange { index: usize, count: usize },

    #[error("pairwise comparison needs two distinct conditions, got {0} twice")]
    SameCondition(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate posterior for condition {condition}: scale is zero")]
    DegeneratePosterior { condition: usize },

    #[error("unsupported model/prior pairing: {0}")]
    UnsupportedPairing(String),

    #[error("sampler did not converge: variance ratio {ratio:.4} for condition {condition} exceeds {threshold}")]
    NonConvergence {
        condition: usize,
        ratio: f64,
        threshold: f64,
    },

    #[error("plot error: {0}")]
    Plot(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}
