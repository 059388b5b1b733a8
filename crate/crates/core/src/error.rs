use thiserror::Error;

/// Errors raised by state construction, channels, metrics and the sweep runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state has zero norm (norm² = {norm_sqr:e}); the superposition is degenerate")]
    ZeroNorm { norm_sqr: f64 },

    #[error("truncation cap n_cap = {n_cap} reached with tail mass {tail:e} > {epsilon:e}")]
    TruncationCapExceeded { n_cap: usize, tail: f64, epsilon: f64 },

    #[error("estimated photon budget ⟨n⟩ + 8√⟨n⟩ = {need:.1} exceeds n_cap = {n_cap}")]
    PhotonBudgetExceeded { need: f64, n_cap: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("mode transformation is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("insufficient guard margin: {lost:e} of the norm lies outside the cropped space")]
    GuardMargin { lost: f64 },

    #[error("filter annihilates state (success probability {0:e})")]
    FilterAnnihilates(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroNorm { .. } => "zero_norm",
            Error::TruncationCapExceeded { .. } => "truncation_cap_exceeded",
            Error::PhotonBudgetExceeded { .. } => "photon_budget_exceeded",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::NonUnitary(_) => "non_unitary",
            Error::InvalidDensity(_) => "invalid_density",
            Error::GuardMargin { .. } => "guard_margin",
            Error::FilterAnnihilates(_) => "filter_annihilates_state",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::OracleMismatch(_) => "oracle_mismatch",
            Error::EigenFailure => "eigen_failure",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
