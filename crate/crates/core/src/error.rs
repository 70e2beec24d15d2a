use thiserror::Error;

/// Errors raised by the simulator, the codec and the experiment tooling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register must hold at least one qubit")]
    EmptyRegister,
    #[error("{requested} qubits exceed the cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },
    #[error("qubit cap {0} exceeds the hard ceiling of {ceiling}", ceiling = crate::qcore::QubitCap::CEILING)]
    CapAboveCeiling(usize),
    #[error("qubit index {index} out of range 1..={num_qubits}")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit index {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("collapse onto a zero-probability branch")]
    ZeroProbabilityBranch,
    #[error("basis symbol {0} is not in 0..=3")]
    InvalidSymbol(u8),
    #[error("key must hold at least 8 bits")]
    EmptyKey,
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid attack: {0}")]
    InvalidAttack(String),
    #[error("invalid message: {0}")]
    InvalidMessage(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
