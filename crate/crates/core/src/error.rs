use thiserror::Error;

/// Errors produced by the simulator and the sweep harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("reflectivity {0} is outside [0, 1]")]
    InvalidReflectivity(f64),

    #[error("noise half-width m = {0} is outside [0, 0.5]")]
    InvalidNoiseWidth(f64),

    #[error("matrix is not unitary (max |T^dagger T - I| = {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("{0} is not a permutation of 0..{1}")]
    InvalidPermutation(String, usize),

    #[error("empty list of {0}")]
    Empty(&'static str),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("count overflow computing {0}")]
    Overflow(&'static str),

    #[error("zero probability: {0}")]
    ZeroProbability(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
