use alloc::string::String;

/// Errors raised by the computational kernel.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: String,
        found: String,
    },
    #[error("differential does not square to zero at degree {degree}")]
    NotAComplex { degree: i32 },
    #[error("map is not a chain map at degree {degree}")]
    NotAChainMap { degree: i32 },
    #[error("cell set is not {expected}")]
    NotClosed { expected: &'static str },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("sheaf complexes live on different bases")]
    BaseMismatch,
    #[error("complex is not constructible: {0}")]
    NotConstructible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cannot parse rational `{0}`")]
    ParseRational(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
