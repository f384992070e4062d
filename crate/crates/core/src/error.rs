use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. Each variant names the module that produced
/// it so front ends can surface where a computation failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("symbolic: symbol {symbol} at position {position} is outside an alphabet of size {alphabet_size}")]
    InvalidWord {
        symbol: u8,
        position: usize,
        alphabet_size: u8,
    },

    #[error("symbolic: invalid target word: {0}")]
    InvalidTarget(String),

    #[error("symbolic: invalid substitution: {0}")]
    InvalidSubstitution(String),

    #[error("symbolic: seed {seed} is not the first letter of its own image")]
    NotAFixedPoint { seed: u8 },

    #[error("symbolic: iterates of seed {seed} stopped growing at length {length}")]
    DivergenceFailure { seed: u8, length: usize },

    #[error("{module}: window of length {needed} does not fit in {available}")]
    Window {
        module: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("sturmian: invalid continued fraction: {0}")]
    InvalidContinuedFraction(String),

    #[error("{module}: level {requested} exceeds available depth {available}")]
    Depth {
        module: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("{module}: invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        module: &'static str,
        name: &'static str,
        reason: String,
    },

    #[error("circlemap: orbit point at index {index} lies within the guard distance of the boundary {boundary}")]
    BoundaryAmbiguity { index: i64, boundary: String },

    #[error("{module}: index range [{lo}, {hi}] is not covered by the window [{window_lo}, {window_hi}]")]
    Range {
        module: &'static str,
        lo: i64,
        hi: i64,
        window_lo: i64,
        window_hi: i64,
    },

    #[error("operator: seed (0, 0) generates only the zero solution")]
    DegenerateSeed,

    #[error("operator: numeric failure: {0}")]
    Numeric(String),

    #[error("spectrum: found {found} bands for period {expected}: {detail}")]
    Resolution {
        expected: usize,
        found: usize,
        detail: String,
    },

    #[error("spectrum: coupling must be non-zero")]
    InvalidCoupling,

    #[error("stability: certificate precondition failed: {0}")]
    CertificateRequired(String),
}

impl Error {
    /// Module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidWord { .. }
            | Error::InvalidTarget(_)
            | Error::InvalidSubstitution(_)
            | Error::NotAFixedPoint { .. }
            | Error::DivergenceFailure { .. } => "symbolic",
            Error::InvalidContinuedFraction(_) => "sturmian",
            Error::BoundaryAmbiguity { .. } => "circlemap",
            Error::Window { module, .. }
            | Error::Depth { module, .. }
            | Error::Range { module, .. }
            | Error::InvalidParameter { module, .. } => module,
            Error::DegenerateSeed | Error::Numeric(_) => "operator",
            Error::Resolution { .. } | Error::InvalidCoupling => "spectrum",
            Error::CertificateRequired(_) => "stability",
        }
    }
}
