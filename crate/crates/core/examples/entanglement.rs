// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! PPT and CHSH witnesses on Werner states and on exchange-coupled spins.

use std::f64::consts::PI;

use num_complex::Complex64;
use nvqsim::diagnostics::{chsh_scan, ppt_min_eigenvalue, Purities};
use nvqsim::dynamics::{evolve, IntegratorConfig};
use nvqsim::hamiltonian::{CouplingSpec, SystemSpec};
use nvqsim::pulses::{PulseSchedule, ScheduleItem};
use nvqsim::qcore::DensityMatrix;

fn main() -> nvqsim::Result<()> {
    let h = Complex64::new(0.5f64.sqrt(), 0.0);
    let z = Complex64::new(0.0, 0.0);
    let singlet = DensityMatrix::from_pure(&[z, h, -h, z])?;
    let white = DensityMatrix::maximally_mixed(2)?;
    println!("  p    ppt_min   max|S|  best");
    for k in 0..=5 {
        let p = k as f64 / 5.0;
        let w = singlet.mix(&white, p)?;
        let scan = chsh_scan(&w)?;
        println!("{p:.1}  {:+.4}  {:.4}  {}", ppt_min_eigenvalue(&w)?, scan.max_abs_s, scan.argmax);
    }

    // flip-flop exchange entangles |+-> after a quarter period
    let a_ex = 2.0 * PI * 100e3;
    let spec = SystemSpec::new(2).with_coupling(CouplingSpec {
        pair: (0, 1),
        zz: 0.0,
        exchange: a_ex,
    });
    let rho0 = DensityMatrix::from_real_pure(&[0.5, -0.5, 0.5, -0.5])?;
    let mut schedule = PulseSchedule::new(2);
    schedule.push(0, 0.0, ScheduleItem::Idle { duration: PI / (2.0 * a_ex) })?;
    let ev = evolve(&rho0, &schedule, &spec, &IntegratorConfig::for_spec(&spec)?.with_stride(60))?;
    println!("\n t (us)  ppt_min  P01 - P0*P1");
    for (t, rho) in ev.times.iter().zip(&ev.states) {
        println!("{:6.3}  {:+.4}  {:+.4}", t * 1e6, ppt_min_eigenvalue(rho)?, Purities::of(rho)?.deviation());
    }
    Ok(())
}
