use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Value is not negative or not congruent to 0 or 1 mod 4.
    #[error("{0} is not a negative quadratic discriminant (need D < 0, D = 0 or 1 mod 4)")]
    NotADiscriminant(i64),
    #[error("discriminant {0} is not fundamental")]
    NotFundamental(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
