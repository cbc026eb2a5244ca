use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("q = {q} does not divide p - 1 = {}", p - 1)]
    OrderDoesNotDivide { p: u64, q: u64 },
    #[error("{gamma} does not generate Z_{p}^*")]
    NotGenerator { p: u64, gamma: u64 },
    #[error("element {a} has order {actual} mod {p}, expected {expected}")]
    WrongOrder {
        p: u64,
        a: u64,
        expected: u64,
        actual: u64,
    },
    #[error("({a}, {b}) is not an element of the group")]
    NotInGroup { a: u64, b: u64 },
    #[error("{x} is not in the subgroup generated by {base} mod {p}")]
    NotInSubgroup { x: u64, base: u64, p: u64 },
    #[error("subgroup descriptor is invalid for this group: {0}")]
    InvalidSubgroup(String),
    #[error("enumeration of {size} elements exceeds the cap of {cap}")]
    CapExceeded { size: u64, cap: u64 },
    #[error("operation requires an affine group (q = p - 1)")]
    NotAffine,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("outcome spaces differ")]
    MismatchedSpaces,
    #[error("hidden subgroup unavailable: {0}")]
    HiddenUnavailable(String),
    #[error("oracle violates its promise: {0}")]
    PromiseViolation(String),
    #[error("trial budget of {0} exhausted")]
    TrialsExhausted(usize),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
