use thiserror::Error;

/// Errors produced by the library. Every public fallible operation returns
/// this type so the command-line front end can map it to an exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroExtensionDegree,
    #[error("field size {size} exceeds the cap of {cap}")]
    FieldTooLarge { size: u64, cap: u64 },
    #[error("element {value} is not a valid encoding in F_{q}")]
    InvalidElement { value: u32, q: u32 },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("operation `{0}` requires a second operand")]
    MissingOperand(&'static str),
    #[error("operands live in different fields")]
    MixedFields,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("the zero polynomial is not allowed here")]
    ZeroPolynomial,
    #[error("constant polynomials have no irreducibility status")]
    ConstantPolynomial,
    #[error("{what} needs {needed} but the cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("the given sunflower is not maximal: {0}")]
    NotMaximal(String),
    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error is a size/budget refusal rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            Error::CapExceeded { .. } | Error::FieldTooLarge { .. }
        )
    }
}
