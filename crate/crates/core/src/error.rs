use thiserror::Error;

/// Failures reported by the numerical and counting operations.
///
/// The CLI maps `Domain` and `Resolution` to exit code 2 and `Resource` to
/// exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A grid or panel count below what the integrand's bandwidth requires.
    #[error("insufficient resolution: {what} needs at least {required:?}, got {given:?}")]
    Resolution {
        what: String,
        required: Vec<u64>,
        given: Vec<u64>,
    },

    #[error("resource guard: {what} needs {required}, limit is {limit}")]
    Resource { what: String, required: u64, limit: u64 },

    #[error("wall-time budget exhausted during {0}")]
    Deadline(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl Error {
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. } | Error::Deadline(_))
    }
}
