use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter space: {0}")]
    InvalidSpace(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("missing feature `{0}`")]
    MissingFeature(String),

    #[error("schema mismatch at column `{column}`: {detail}")]
    SchemaMismatch { column: String, detail: String },

    #[error("simulation failed at row {row} (theta = {theta:?}, run seed = {seed}): {reason}")]
    Simulation {
        row: usize,
        theta: Vec<f64>,
        seed: u64,
        reason: String,
    },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("tables share {0} row(s); evaluation data must not have been used for fitting")]
    SharedRows(usize),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("no proposal was accepted: {0}")]
    NoAcceptance(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a simulator while running an experiment.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::Simulation { .. } | Error::NoAcceptance(_))
    }
}
