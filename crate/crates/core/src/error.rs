use thiserror::Error;

/// Coarse error category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: parameter domain, malformed files, preconditions.
    Domain,
    /// A numerical routine could not deliver a trustworthy answer.
    Numerical,
    /// Filesystem or stream failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{0}` is out of its domain")]
    OutOfDomain(&'static str),
    #[error("parameter `{0}` is not finite")]
    NonFinite(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("adaptive quadrature did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("sequence length {0} is not a power of two")]
    Size(usize),
    #[error("probability level {alpha} is outside the tabulated mass ({lo}, {hi})")]
    OutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("cdf table is not monotone at bracket {0}")]
    BracketFailure(usize),
    #[error("quartic has no sign change on [0, 1]")]
    NoBracket,
    #[error("{count} observation(s) fall outside the density grid, first {first:?}")]
    OutOfGrid { count: usize, first: Vec<f64> },
    #[error("data has zero sample variance")]
    DegenerateData,
    #[error("hessian is singular")]
    SingularHessian,
    #[error("need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("expected bin count {expected} is below 5")]
    BinUnderflow { expected: f64 },
    #[error("observation {index} has cdf value on the boundary of (0, 1)")]
    BoundaryObservation { index: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: price must be positive")]
    NonPositivePrice { line: usize },
    #[error("line {line}: duplicate date")]
    DuplicateDate { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::NumericalFailure(_)
            | Error::ConvergenceFailure(_)
            | Error::BracketFailure(_)
            | Error::NoBracket
            | Error::SingularHessian => ErrorKind::Numerical,
            Error::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
