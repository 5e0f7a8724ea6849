use thiserror::Error;

/// Errors raised by the core pipeline.
#[derive(Debug, Error)]
pub enum QidaError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("dimension cap exceeded: {n_qubits} qubits (limit {limit})")]
    DimensionCap { n_qubits: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("sites must differ, got ({0}, {0})")]
    SameSite(usize),

    #[error("unsupported Hamiltonian term: {0}")]
    UnsupportedTerm(String),

    #[error("density matrix trace {0} deviates from 1")]
    BadTrace(f64),

    #[error("invalid finesse ratio: {0}")]
    InvalidFinesse(String),

    #[error("thresholds exhausted: uncovered qubits {uncovered:?}, {components} disconnected components")]
    ThresholdsExhausted { uncovered: Vec<usize>, components: usize },

    #[error("layer merge rejected: {0}")]
    MergeConflict(String),

    #[error("empty layer plan")]
    EmptyPlan,

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamLength { expected: usize, got: usize },

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, QidaError>;
