// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Model selection between a plain decay and a decaying oscillation.

use std::f64::consts::PI;

use nvqsim::diagnostics::{fit_coherence_decay, CoherenceModel};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn main() -> nvqsim::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.005).expect("valid sigma");
    let t: Vec<f64> = (0..81).map(|k| k as f64 * 0.5e-6).collect();
    let plain: Vec<f64> = t.iter().map(|&x| 0.5 + 0.5 * (-x / 20e-6).exp() + noise.sample(&mut rng)).collect();
    let beating: Vec<f64> = t
        .iter()
        .map(|&x| 0.5 + 0.5 * (-x / 20e-6).exp() * (2.0 * PI * 200e3 * x).cos() + noise.sample(&mut rng))
        .collect();
    for (name, y) in [("plain", &plain), ("beating", &beating)] {
        let fit = fit_coherence_decay(&t, y, CoherenceModel::Auto)?;
        println!(
            "{name:>8}: model {:?}, T2 {:.2} us, f {:.2} kHz",
            fit.model,
            fit.t2 * 1e6,
            fit.oscillation_freq_hz * 1e-3
        );
    }
    Ok(())
}
