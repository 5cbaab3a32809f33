use thiserror::Error;

/// Crate-wide error type. Variants map onto the CLI exit codes via
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    /// A variance level (or time) beyond what the profile represents.
    /// Carries the largest representable level so callers can see how far
    /// the horizon actually reaches.
    #[error("level {level} exceeds the horizon; largest representable level is {max_level}")]
    HorizonExceeded { level: f64, max_level: f64 },

    #[error("level {level} is below the first cumulative variance {first}")]
    BelowFirstLevel { level: f64, first: f64 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("schedule infeasible: {0}")]
    ScheduleInfeasible(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 config, 3 horizon/capacity, 4 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::HorizonExceeded { .. } | Error::Capacity(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
