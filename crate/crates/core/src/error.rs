use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("malformed bitstring: expected {expected} binary digits, got {got:?}")]
    MalformedBitstring { expected: usize, got: String },

    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),

    #[error("{required} qubits requested but the configured maximum is {max}")]
    QubitCountExceeded { required: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective returned a non-finite value ({value}) at evaluation {evaluation}")]
    NonFiniteObjective { value: f64, evaluation: usize },

    #[error("counts cover {got} qubits but the oracle report covers {expected}")]
    InstanceMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed term list at line {line}: {message}")]
    MalformedTerms { line: usize, message: String },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("could not serialise output: {0}")]
    Output(String),
}
