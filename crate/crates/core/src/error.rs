use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("not a permutation: offending index {index} ({reason})")]
    NotBijection { index: usize, reason: String },
    #[error("factor mismatch: {0}")]
    FactorMismatch(String),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("non-unitary payload on gate {label} (deviation {deviation:.3e})")]
    NonUnitary { label: String, deviation: f64 },
    #[error("infeasible epsilon: {eps} is below the floor {floor}")]
    InfeasibleEpsilon { eps: f64, floor: f64 },
    #[error("parameter domain: {0}")]
    Domain(String),
    #[error("routing failure: {0}")]
    Routing(String),
    #[error("missing builder: {0}")]
    MissingBuilder(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable kind, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSize(_) => "invalid-size",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InvalidCircuit(_) => "invalid-circuit",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::NotBijection { .. } => "not-bijection",
            Error::FactorMismatch(_) => "factor-mismatch",
            Error::UnsupportedMode(_) => "unsupported-mode",
            Error::UnsupportedSize(_) => "unsupported-size",
            Error::UnsupportedGate(_) => "unsupported-gate",
            Error::NonUnitary { .. } => "non-unitary",
            Error::InfeasibleEpsilon { .. } => "infeasible-epsilon",
            Error::Domain(_) => "domain",
            Error::Routing(_) => "routing",
            Error::MissingBuilder(_) => "missing-builder",
            Error::Parse(_) => "parse",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
