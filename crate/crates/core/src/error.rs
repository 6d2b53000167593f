use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ForecastError>;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series is empty")]
    EmptySeries,

    #[error("unknown calendar feature `{0}`")]
    UnknownFeature(String),

    #[error("calendar covers {available} days but {needed} are required")]
    CalendarTooShort { needed: usize, available: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("history of {found} days is shorter than the required {required}")]
    InsufficientHistory { required: usize, found: usize },

    #[error("trajectory set is empty")]
    EmptyTrajectories,

    #[error("trajectory shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("node `{0}` has no bottom-level trajectories")]
    MissingDescendant(String),

    #[error("horizon mismatch: actuals have {actuals} days, forecast has {forecast}")]
    HorizonMismatch { actuals: usize, forecast: usize },

    #[error("in-sample series needs at least two observations")]
    EmptyInsample,

    #[error("missing forecast row `{0}`")]
    MissingForecast(String),

    #[error("{path}:{line}: {message}")]
    Data {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl ForecastError {
    pub(crate) fn data(path: &str, line: usize, message: impl Into<String>) -> Self {
        ForecastError::Data {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        ForecastError::InvalidParameter(message.into())
    }

    /// Process exit status for the command-line front end: 2 for configuration
    /// problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ForecastError::Config(_) => 2,
            _ => 1,
        }
    }
}
