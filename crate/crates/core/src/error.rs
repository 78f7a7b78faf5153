use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong in the library.
///
/// Numerical verdicts (a Holant identity failing to hold) are not errors; they
/// are reported through [`crate::report::HolantReport`]. Errors are reserved
/// for malformed inputs and violated preconditions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label {0} appears on both operands")]
    DuplicateLabel(String),
    #[error("label {0} is not carried by the operator")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operator dimension {dim} exceeds the limit of {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("state space of size {size} exceeds the enumeration guard of {limit}")]
    StateSpace { size: u128, limit: u128 },
    #[error("operator is not Hermitian (relative residual {0:e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (smallest eigenvalue {min:e}, largest {max:e})")]
    NotPsd { min: f64, max: f64 },
    #[error("superoperator is singular or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("invariant violated at {site}: {what} (residual {residual:e})")]
    Invariant {
        site: String,
        what: String,
        residual: f64,
    },
    #[error("no transform supplied for edge ({0}, {1})")]
    MissingTransform(String, String),
    #[error("transform supplied for ({0}, {1}), which is not an edge of the graph")]
    ExtraTransform(String, String),
    #[error("malformed graph: {0}")]
    Graph(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that signal a violated model invariant (as opposed to
    /// malformed input or I/O trouble).
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::Invariant { .. } | Error::NotPsd { .. } | Error::NotHermitian(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
