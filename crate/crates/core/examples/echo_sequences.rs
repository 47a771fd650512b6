// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Ramsey fringes versus Hahn-echo refocusing of a static detuning.

use std::f64::consts::PI;

use nvqsim::dynamics::{evolve, IntegratorConfig};
use nvqsim::hamiltonian::SystemSpec;
use nvqsim::pulses::{build_sequence, GaussianPulse, SequenceKind};
use nvqsim::qcore::DensityMatrix;

fn excited(rho: &DensityMatrix) -> f64 {
    rho.op().data()[3].re
}

fn main() -> nvqsim::Result<()> {
    let spec = SystemSpec::new(1).with_detuning(0, 2.0 * PI * 0.25e6);
    let pi = spec.pi_pulse(&GaussianPulse::default());
    let cfg = IntegratorConfig::for_spec(&spec)?;
    let rho0 = DensityMatrix::basis(1, 0)?;
    println!("free time (us)  ramsey P1  echo P1");
    for k in 0..=8 {
        let t = k as f64 * 0.5e-6;
        let ramsey = build_sequence(SequenceKind::Ramsey { tau: 0.0 }.from_free_evolution(t), &pi)?;
        let echo = build_sequence(SequenceKind::HahnEcho { tau: 0.0 }.from_free_evolution(t), &pi)?;
        let pr = excited(evolve(&rho0, &ramsey, &spec, &cfg)?.final_state());
        let pe = excited(evolve(&rho0, &echo, &spec, &cfg)?.final_state());
        println!("{:>14.2}  {:>9.4}  {:>7.4}", t * 1e6, pr, pe);
    }
    Ok(())
}
