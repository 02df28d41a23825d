use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes shared by all modules.
///
/// Numerical constructions in this crate are *audited*: whenever a build step
/// carries a mathematical guarantee (positivity of a conformal factor, a
/// derivative bound, a division floor), the code checks it and refuses to hand
/// back an object that violates its own contract.  Those refusals surface as
/// [`Error::BoundViolated`], [`Error::Degenerate`] and friends rather than as
/// silently wrong data.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A field or matrix contains NaN/inf where finite values are required.
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    /// A level threshold is degenerate: too many cells fall inside the
    /// equality-tolerance band for component counts to be meaningful.
    #[error("degenerate threshold: {in_band} of {total} cells within tolerance band of level {level}")]
    DegenerateThreshold {
        level: f64,
        in_band: usize,
        total: usize,
    },

    /// A construction-time bound check failed (the object is not returned).
    #[error("construction bound violated: {0}")]
    BoundViolated(String),

    /// A quantity that must stay positive (weight, conformal factor,
    /// denominator) dipped below its guard floor.
    #[error("positivity guard tripped: {0}")]
    Degenerate(String),

    /// An iterative solver did not reach its tolerance within its budget.
    #[error("solver failed to converge: {0}")]
    NoConvergence(String),

    /// Requested spectral data lies outside the reliably resolved range.
    #[error("spectral truncation insufficient: {0}")]
    Truncation(String),

    /// File / serialization problems.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed on-disk field or config data.
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Shorthand for [`Error::InvalidArgument`] with formatted text.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand for [`Error::BoundViolated`] with formatted text.
    pub fn bound(msg: impl Into<String>) -> Self {
        Error::BoundViolated(msg.into())
    }
}
