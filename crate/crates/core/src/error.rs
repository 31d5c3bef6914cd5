use thiserror::Error;

use crate::sdp::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemIndex { index: usize, count: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no-signalling violated: residual {0:e}")]
    NoSignalling(f64),
    #[error("no correction unitary for outcome {0} carrying nonzero weight")]
    MissingCorrection(usize),
    #[error("input {0} is mixed; average fidelity needs pure inputs")]
    MixedInput(usize),
    #[error("solver finished with status {status:?}")]
    Solver { status: SolveStatus },
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
