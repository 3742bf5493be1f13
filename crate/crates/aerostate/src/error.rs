use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violated a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear-algebra step lost numerical validity (e.g. a covariance
    /// that stays non-positive-definite after jitter retries).
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// Every particle weight was -inf; there is nothing to resample from.
    #[error("degenerate weights: all log-weights are -inf")]
    DegenerateWeights,

    /// Feature matching produced too few correspondences to solve for a pose.
    #[error("insufficient matches: found {found}, need at least 2")]
    InsufficientMatches { found: usize },

    /// Roll/pitch too close to vertical for the slant-range model.
    #[error("singular attitude: cos(pitch)*cos(roll) = {cos_product:.3e}")]
    SingularAttitude { cos_product: f64 },

    /// A flight-log line failed to parse.
    #[error("malformed log at line {line}: {message}")]
    MalformedLog { line: usize, message: String },

    /// A flight-log line declared an unsupported schema version.
    #[error("unsupported log schema version {found} at line {line} (expected 1)")]
    VersionMismatch { line: usize, found: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::NumericalDegeneracy(msg.into())
    }
}
