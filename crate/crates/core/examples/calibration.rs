// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Recover a hidden qubit detuning: spectroscopy, Rabi, discriminator
//! training and Ramsey.

use std::f64::consts::PI;

use nvqsim::calibration::{run_calibration, CalibrationConfig};
use nvqsim::hamiltonian::{NoiseSpec, SystemSpec};

fn main() -> nvqsim::Result<()> {
    let mut spec = SystemSpec::new(1).with_noise(0, NoiseSpec::from_t2(40e-6, 30e-6)?);
    spec.frame_freq_hz[0] = 4.962e9;
    spec.detunings[0] = 2.0 * PI * 3.83e6;

    let cal = run_calibration(&spec, &CalibrationConfig::default())?;
    let q = &cal.report.qubits[0];
    println!("resonance       {:.6} GHz", q.resonance_hz * 1e-9);
    println!("pi amplitude    {:.5}", q.pi_amplitude);
    println!("assignment fid. {:.4}", q.assignment_fidelity);
    println!("detuning        {:.4} MHz (hidden 3.83 MHz)", q.estimated_detuning_hz * 1e-6);
    println!("residual        {:.2} kHz", q.residual_detuning_hz * 1e-3);
    println!("calibrated frame {:.6} GHz", q.calibrated_frame_hz * 1e-9);
    Ok(())
}
