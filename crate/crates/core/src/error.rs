use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the range the operation is defined on.
    Domain(String),
    /// The measure violates the structural condition, or a pencil lacks a part.
    Structural(String),
    /// The lattice is too coarse for an interval.
    Resolution(String),
    Index(String),
    Shape {
        expected: usize,
        found: usize,
    },
    /// Cholesky breakdown of a matrix that must be positive definite.
    Definiteness(String),
    Numerical(String),
    /// A theorem hypothesis required by an experiment does not hold.
    Precondition(String),
}

impl Error {
    /// True for errors caused by the inputs rather than by the arithmetic.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Definiteness(_) | Error::Numerical(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Structural(m) => write!(f, "structural error: {m}"),
            Error::Resolution(m) => write!(f, "resolution error: {m}"),
            Error::Index(m) => write!(f, "index error: {m}"),
            Error::Shape { expected, found } => {
                write!(f, "shape error: expected length {expected}, found {found}")
            }
            Error::Definiteness(m) => write!(f, "definiteness error: {m}"),
            Error::Numerical(m) => write!(f, "numerical error: {m}"),
            Error::Precondition(m) => write!(f, "precondition error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
