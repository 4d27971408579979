use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("parse error at line {line}: {message}")]
    ParseLine { line: usize, message: String },

    #[error("invalid configuration field `{0}`")]
    Validation(String),

    #[error("timestep {got} is not greater than last recorded timestep {last}")]
    Order { last: usize, got: usize },

    #[error("histograms have incompatible bin edges")]
    BinMismatch,

    #[error("series of length {len} is too short for lag {lag}")]
    TooShort { len: usize, lag: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("prediction is not finite")]
    NonFinite,

    #[error("target variance is zero; R² undefined")]
    Degenerate,

    #[error("no alternative model in a repository of {0}")]
    NoAlternative(usize),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown version `{0}`")]
    UnknownVersion(String),

    #[error("need {needed} readings for retraining, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("negative flow at line {line}")]
    NegativeFlow { line: usize },

    #[error("invalid drift segment: {0}")]
    Segment(String),

    #[error("invalid experiment plan: {0}")]
    Plan(String),

    #[error("seed sets differ between result sets")]
    SeedMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
