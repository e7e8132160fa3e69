use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("state is not physical: {0}")]
    NotPhysical(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no cited bound for graph {0}")]
    NoCitedBound(String),

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("pulse sequence error: {0}")]
    Pulse(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("code length must be odd, got {0}")]
    EvenCodeLength(usize),

    #[error("error target {0} is not a codeword qubit")]
    InvalidTarget(String),

    #[error("informationally incomplete settings: {covered} of {needed} Pauli operators covered")]
    InformationallyIncomplete { covered: usize, needed: usize },

    #[error("missing settings for Bell estimate: {}", .0.join(", "))]
    MissingSettings(Vec<String>),

    #[error("{requested} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { requested: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

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
