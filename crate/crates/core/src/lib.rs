// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

pub mod calibration;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod hamiltonian;
pub mod harness;
pub mod measurement;
pub mod numfmt;
pub mod pulses;
pub mod qcore;
pub mod random;
pub mod tomography;

pub use error::{Error, Result};
