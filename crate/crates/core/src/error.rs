use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("linear index {index} out of range for {cells} cells")]
    IndexOutOfRange { index: u64, cells: u64 },
    #[error("coordinate {value} on axis {axis} out of range (axis has {cells} cells)")]
    CoordOutOfRange { axis: usize, value: u64, cells: u64 },
    #[error("{qubits} qubits exceeds the configured maximum of {max}")]
    TooManyQubits { qubits: u32, max: u32 },
    #[error("invalid qubit index {qubit} for a {n}-qubit register")]
    InvalidQubit { qubit: usize, n: u32 },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    RepeatedQubit(usize),
    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParamLength { got: usize, expected: usize },
    #[error("distribution is not normalized (sum = {sum})")]
    Unnormalized { sum: f64 },
    #[error("distribution has {got} entries, expected {expected}")]
    PmfLength { got: usize, expected: usize },
    #[error("negative cell average {value} in cell {cell}")]
    NegativeCellAverage { cell: u64, value: f64 },
    #[error("integrand returned a non-finite value {value} at {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },
    #[error("sobol sequence supports at most {max} dimensions, got {got}")]
    SobolDims { got: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("measured set is empty")]
    EmptyMeasuredSet,
    #[error("measured state {0} appears more than once")]
    DuplicateState(u64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
