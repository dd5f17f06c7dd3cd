use thiserror::Error;

/// Errors across the toolkit, grouped by how the CLI reports them:
/// validation problems (exit 2), numeric/degenerate failures (exit 3) and
/// I/O problems (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition or invariant before any computation.
    #[error("validation: {0}")]
    Validation(String),

    /// A geometrically or algebraically degenerate configuration: parallel
    /// wavevectors, vanishing discriminants, rank-deficient angle systems.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Numeric failure during a computation (blow-up, step failure, NaN).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A traced ray left the medium's domain; carries the boundary hit point.
    #[error("ray exited domain at t={t}, x=({},{},{})", x[0], x[1], x[2])]
    ExitedDomain { t: f64, x: [f64; 3] },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
