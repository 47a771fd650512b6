// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the simulation and estimation stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimension {0}: must be 2, 4 or 8")]
    InvalidDimension(usize),

    #[error("invalid qubit index {index} for a {n_qubits}-qubit register")]
    InvalidQubit { index: usize, n_qubits: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("time {t:.6e} s is outside the schedule span [0, {end:.6e}] s")]
    TimeOutOfRange { t: f64, end: f64 },

    #[error("integration failed at t = {t:.6e} s: {reason}")]
    Integration { t: f64, reason: String },

    #[error("fit did not converge: {0}")]
    FitFailed(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("calibration aborted at {step} step: {reason}")]
    Calibration { step: &'static str, reason: String },

    #[error("missing tomography setting {0}")]
    MissingSetting(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration or input files.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::ConfigParse(_)
                | Error::Csv(_)
                | Error::InvalidArgument(_)
                | Error::MissingSetting(_)
                | Error::InvalidSchedule(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
