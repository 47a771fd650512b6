// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Sweep the exchange strength of the NV-NV preset. Each point is an
//! independent, seeded run.

use nvqsim::harness::{presets, simulate, SweepParameter};

fn main() -> nvqsim::Result<()> {
    let mut base = presets::nv_nv();
    base.exact = true;
    println!("A_ex (kHz)  fitted f (kHz)  f / A_ex");
    for a in [25.0, 50.0, 100.0, 200.0] {
        let cfg = base.with_parameter(SweepParameter::AExKhz, 0, a)?;
        let res = simulate(&cfg)?;
        let f = res.coherence.map_or(f64::NAN, |c| c.oscillation_freq_hz * 1e-3);
        println!("{a:>10.0}  {f:>14.2}  {:>8.3}", f / a);
    }
    Ok(())
}
