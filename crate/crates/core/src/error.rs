use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero: {0}")]
    Division(String),

    /// A required angle is missing from the scan grid.
    #[error("grid error: {0}")]
    Grid(String),

    #[error("post-selection left an empty subspace")]
    PostSelectionEmpty,

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("conflicting records: {0}")]
    Conflict(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Division(_) => "division",
            Error::Grid(_) => "grid",
            Error::PostSelectionEmpty => "post_selection_empty",
            Error::Numeric(_) => "numeric",
            Error::Sampling(_) => "sampling",
            Error::Statistics(_) => "statistics",
            Error::Parse { .. } => "parse",
            Error::Conflict(_) => "conflict",
            Error::EmptyInput(_) => "empty_input",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
