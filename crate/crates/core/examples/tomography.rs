// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Sampled nine-setting tomography of a Bell state.

use num_complex::Complex64;
use nvqsim::measurement::sample_setting;
use nvqsim::qcore::{trace_distance, DensityMatrix};
use nvqsim::tomography::{reconstruct, settings_list, TomographyRecord};

fn main() -> nvqsim::Result<()> {
    let s = Complex64::new(0.5f64.sqrt(), 0.0);
    let z = Complex64::new(0.0, 0.0);
    let bell = DensityMatrix::from_pure(&[s, z, z, s])?;
    for shots in [100, 1_000, 10_000, 100_000] {
        let mut rec = TomographyRecord::new(0.0);
        for (k, setting) in settings_list().into_iter().enumerate() {
            rec.insert(setting, sample_setting(&bell, &setting, shots, k as u64)?);
        }
        let res = reconstruct(&rec)?;
        println!(
            "{shots:>7} shots: trace distance {:.4}, min raw eigenvalue {:+.4}",
            trace_distance(res.rho_phys.op(), bell.op())?,
            res.min_raw_eigenvalue
        );
    }
    Ok(())
}
