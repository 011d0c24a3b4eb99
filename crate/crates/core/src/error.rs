use alloc::string::String;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("Hilbert-space dimension {dimension} exceeds the guard of {guard}")]
    DimensionGuard { dimension: usize, guard: usize },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("invalid mode set: {0}")]
    InvalidModeSet(String),

    #[error("transmissivity {0} outside the allowed range")]
    InvalidTransmissivity(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid measurement effect: {0}")]
    InvalidEffect(String),

    #[error("loss channel with zero transmissivity is not invertible")]
    NonInvertible,

    #[error("inverse loss channel is numerically singular at p = {0}")]
    NumericallySingular(f64),

    #[error("outcome almost surely impossible (probability {0:e})")]
    ImpossibleOutcome(f64),

    #[error("state is infeasible even without loss (minimum eigenvalue {0:e})")]
    Infeasible(f64),

    #[error("state has support above the cutoff in total photon number; interferometers are inexact")]
    TruncationInexact,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
