// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration, orchestration and export.

pub mod config;
pub mod export;
pub mod presets;
pub mod run;

pub use config::{ExperimentConfig, OutputFormat, SequenceName, SweepParameter};
pub use run::{
    run_calibrate, run_diagnose, run_experiment, run_sweep, run_tomo, simulate, ExperimentResult, RunManifest,
};
