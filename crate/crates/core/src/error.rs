use std::path::PathBuf;

use crate::optimizer::OptimizationTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty Pauli string")]
    EmptyPauliString,

    #[error("invalid Pauli character {ch:?} at position {position}")]
    InvalidPauliChar { ch: char, position: usize },

    #[error("Pauli string has length {found}, expected {expected}")]
    PauliLength { expected: usize, found: usize },

    #[error("non-finite coefficient {0}")]
    NonFiniteCoefficient(f64),

    #[error("qubit count must be at least 1")]
    ZeroQubits,

    #[error("{n} qubits exceeds the dense-matrix cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("Hermitian eigensolver did not converge")]
    EigenSolverFailed,

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("CZ needs two distinct qubits, got ({0}, {1})")]
    InvalidCzPair(usize, usize),

    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("state has {state} qubits but Hamiltonian has {hamiltonian}")]
    DimensionMismatch { state: usize, hamiltonian: usize },

    #[error("expectation value has imaginary part {0:e}; Hamiltonian is not Hermitian")]
    NonHermitian(f64),

    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("non-finite energy at parameters")]
    NonFiniteEnergy,

    #[error("parameter {0} is not finite")]
    NonFiniteParameter(usize),

    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("no table row for R = {0}")]
    MissingGridPoint(f64),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("optimization aborted at iteration {iteration}: {source}")]
    Aborted {
        iteration: usize,
        #[source]
        source: Box<Error>,
        partial: Box<OptimizationTrace>,
    },
}

impl Error {
    /// True for errors caused by malformed input files or arguments, as
    /// opposed to I/O or numerical failures.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::EmptyPauliString
            | Error::InvalidPauliChar { .. }
            | Error::PauliLength { .. }
            | Error::NonFiniteCoefficient(_)
            | Error::ZeroQubits
            | Error::InvalidConfig(_)
            | Error::Schema(_)
            | Error::MissingGridPoint(_)
            | Error::Json { .. } => true,
            Error::Csv { source, .. } => !matches!(source.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
