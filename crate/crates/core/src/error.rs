use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate direction: zero-length vector")]
    DegenerateDirection,

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("rotation axis must be unit length (got norm {0})")]
    NonUnitAxis(f64),

    #[error("no observations")]
    NoObservations,

    #[error("degenerate fusion: both variances are zero")]
    DegenerateFusion,

    #[error("degenerate distribution: sigma must be positive")]
    DegenerateDistribution,

    #[error("target sets differ ({0} vs {1} targets)")]
    TargetMismatch(usize, usize),

    #[error("arbitration weight {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("empty sample")]
    EmptySample,

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("unknown session {0}")]
    SessionNotFound(String),

    #[error("session {0} has terminated")]
    SessionTerminated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field, reason: reason.into() }
    }
}
