// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! IQ-plane readout: simulate shots, train a discriminator, compare the
//! assignment error with the Gaussian overlap.

use nvqsim::measurement::{simulate_iq, train_discriminator, IQModel};

fn main() -> nvqsim::Result<()> {
    let model = IQModel::default();
    let training = simulate_iq(0.5, &model, 4000, 7)?;
    let (g, e) = training.by_truth();
    let disc = train_discriminator(&g, &e)?;

    let test = simulate_iq(0.5, &model, 100_000, 8)?;
    let (g, e) = test.by_truth();
    let wrong = g.iter().filter(|p| disc.classify(**p) == 1).count() + e.iter().filter(|p| disc.classify(**p) == 0).count();
    println!("separation {:.1} sigma", model.separation() / model.cloud_sigma);
    println!("trained discriminator error {:.5}", wrong as f64 / test.len() as f64);
    println!("ideal discriminator error   {:.5}", test.assignment_error());
    println!("analytic overlap            {:.5}", model.analytic_error());
    Ok(())
}
