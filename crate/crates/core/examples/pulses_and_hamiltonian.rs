// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! NV level structure, Gaussian pulse areas and the register Hamiltonian.

use std::f64::consts::PI;

use nvqsim::hamiltonian::{build_hamiltonian, nv_transition_frequencies, CouplingSpec, NvSpinModel, SystemSpec};
use nvqsim::pulses::{build_sequence, envelope_value, pulse_theta, GaussianPulse, SequenceKind};

fn main() -> nvqsim::Result<()> {
    let nv = NvSpinModel::new(2.0 * PI * 2.87e9, 2.0 * PI * 95e6)?;
    let (plus, minus) = nv_transition_frequencies(&nv);
    println!("transitions: {:.4} GHz, {:.4} GHz", plus / (2e9 * PI), minus / (2e9 * PI));

    let spec = SystemSpec::new(2).with_coupling(CouplingSpec {
        pair: (0, 1),
        zz: 2.0 * PI * 50e3,
        exchange: 2.0 * PI * 100e3,
    });
    let pi = spec.pi_pulse(&GaussianPulse::default());
    println!(
        "pi pulse: amplitude {:.4}, duration {:.0} ns, area {:.6} rad, peak envelope {:.4}",
        pi.amplitude,
        pi.duration() * 1e9,
        pulse_theta(&pi, spec.rabi_rate_per_amp),
        envelope_value(&pi, pi.center)
    );

    let schedule = build_sequence(SequenceKind::NvNvImpurity { tau: 1e-6 }, &pi)?;
    println!("schedule:\n{}", schedule.to_json().expect("schedule serializes"));

    let h = build_hamiltonian(&spec, &schedule, pi.center)?;
    println!("|H| at first pulse peak: {:.4e} rad/s, hermitian: {}", h.frobenius_norm(), h.is_hermitian(1e-9));
    Ok(())
}
