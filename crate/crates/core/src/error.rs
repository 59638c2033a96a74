use alloc::string::String;
use core::fmt;

/// Errors raised by the verification engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    EmptySet(&'static str),
    NonFinite(&'static str),
    /// Halfspace conversion is only available up to `max` dimensions.
    UnsupportedDimension { dim: usize, max: usize },
    /// The simplex iteration limit was hit before optimality.
    LpNoConvergence,
    InvalidTime { k: usize, min: usize },
    InvalidArgument(String),
    SizeLimit { needed: usize, limit: usize },
    /// The secret and nonsecret output sets do not meet; nothing to prune to.
    Unsalvageable { distance: f64 },
    PrunedSecretEmpty,
    OutputsDoNotMatch { gap: f64 },
    MissingWitness { index: usize },
    InvalidGraph(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch in {context}: expected {expected}, found {found}"
            ),
            Error::EmptySet(what) => write!(f, "{what} must be nonempty"),
            Error::NonFinite(what) => write!(f, "{what} contains NaN or infinite entries"),
            Error::UnsupportedDimension { dim, max } => write!(
                f,
                "operation needs dimension <= {max}, got {dim}; use a distance-based path"
            ),
            Error::LpNoConvergence => write!(f, "linear program did not converge"),
            Error::InvalidTime { k, min } => write!(f, "time index {k} is below {min}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SizeLimit { needed, limit } => write!(
                f,
                "enumeration needs {needed} elements, limit is {limit}; use a coarser setting"
            ),
            Error::Unsalvageable { distance } => write!(
                f,
                "unsalvageable secret: secret and nonsecret output sets are {distance:.3e} apart"
            ),
            Error::PrunedSecretEmpty => write!(f, "pruned secret set is empty"),
            Error::OutputsDoNotMatch { gap } => {
                write!(f, "outputs at the observation time differ by {gap:.3e}")
            }
            Error::MissingWitness { index } => {
                write!(f, "no output-controllability witness for vertex {index}")
            }
            Error::InvalidGraph(msg) => write!(f, "invalid communication graph: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
