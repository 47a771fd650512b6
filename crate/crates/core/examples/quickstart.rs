// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Run a built-in preset and read the fitted coherence.
//!
//!     cargo run --release --example quickstart

use nvqsim::harness::{presets, simulate};

fn main() -> nvqsim::Result<()> {
    let mut cfg = presets::nv_nv();
    cfg.exact = true;
    let res = simulate(&cfg)?;
    for o in res.outcomes.iter().step_by(10) {
        println!(
            "tau = {:6.2} us  P(sensor=1) = {:.4}  ppt_min = {:+.4}",
            o.delay_s * 1e6,
            o.sensor_p1,
            o.diagnostics.as_ref().map_or(f64::NAN, |d| d.ppt_min)
        );
    }
    if let Some(c) = &res.coherence {
        println!("T2 = {:.2} us, oscillation {:.2} kHz", c.t2 * 1e6, c.oscillation_freq_hz * 1e-3);
    }
    Ok(())
}
