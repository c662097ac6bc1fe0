use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("degenerate state (norm = {norm:e} is below 1e-12)")]
    Degenerate { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid set pair: {0}")]
    InvalidPair(String),

    #[error("majorization fails at l = {l}: no deterministic LOCC conversion exists")]
    MajorizationFails { l: usize },

    #[error("malformed protocol: {0}")]
    MalformedProtocol(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unsupported input form: {0}")]
    UnsupportedForm(String),

    #[error("unknown fixture id `{0}`")]
    UnknownFixture(String),

    #[error("known-fact table violates class monotonicity for `{0}`")]
    NonMonotoneFacts(String),

    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
