// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Free decay of a superposition under T1 and pure dephasing.

use std::f64::consts::PI;

use nvqsim::diagnostics::purity_suite_evolution;
use nvqsim::dynamics::{evolve, IntegratorConfig};
use nvqsim::hamiltonian::{NoiseSpec, SystemSpec};
use nvqsim::pulses::{PulseSchedule, ScheduleItem};
use nvqsim::qcore::{DensityMatrix, Operator, PauliLabel};

fn main() -> nvqsim::Result<()> {
    let (t1, t2) = (20e-6, 8e-6);
    let spec = SystemSpec::new(2)
        .with_detuning(0, 2.0 * PI * 0.5e6)
        .with_noise(0, NoiseSpec::from_t2(t1, t2)?)
        .with_noise(1, NoiseSpec::from_t2(t1, t2)?);
    let plus = [0.5f64.sqrt(), 0.5f64.sqrt()];
    let ket: Vec<f64> = (0..4).map(|k| plus[k >> 1] * plus[k & 1]).collect();
    let rho0 = DensityMatrix::from_real_pure(&ket)?;

    let mut schedule = PulseSchedule::new(2);
    schedule.push(0, 0.0, ScheduleItem::Idle { duration: 20e-6 })?;
    let cfg = IntegratorConfig::for_spec(&spec)?.with_stride(200);
    let ev = evolve(&rho0, &schedule, &spec, &cfg)?;

    let x0 = Operator::embed(&Operator::pauli(PauliLabel::X), 0, 2)?;
    let purities = purity_suite_evolution(&ev)?;
    for (k, (t, rho)) in ev.times.iter().zip(&ev.states).enumerate().step_by(4) {
        println!(
            "t = {:5.2} us  <X0> = {:+.4}  P0 = {:.4}  P01 - P0*P1 = {:+.2e}",
            t * 1e6,
            x0.expectation(rho.op()),
            purities.p0[k],
            purities.p01[k] - purities.p0[k] * purities.p1[k]
        );
    }
    println!("max product deviation {:.2e}", purities.max_deviation());
    Ok(())
}
