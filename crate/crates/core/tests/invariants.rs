// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use nvqsim::diagnostics::{chsh_scan, ppt_min_eigenvalue, Purities};
use nvqsim::fit::{fit_damped_sinusoid, levenberg_marquardt, FitModel, LmOptions, SweepData};
use nvqsim::qcore::{
    eig_hermitian, partial_trace, partial_transpose, tensor, trace_distance, DensityMatrix, Operator,
};
use nvqsim::random::{random_density, random_pure, random_separable};
use nvqsim::tomography::{project_psd, PauliVector, TomographyResult};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn sorted_spectrum(op: &Operator) -> Vec<f64> {
    let mut v = eig_hermitian(op).unwrap().values;
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn density_matrices_are_valid(seed in any::<u64>(), pure in any::<bool>()) {
        let mut r = rng(seed);
        let rho = if pure { random_pure(2, &mut r).unwrap() } else { random_density(2, &mut r).unwrap() };
        prop_assert!((rho.op().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.op().is_hermitian(1e-12));
        prop_assert!(sorted_spectrum(rho.op())[0] > -1e-12);
        if pure {
            prop_assert!((rho.purity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factors(s0 in any::<u64>(), s1 in any::<u64>()) {
        let a = random_density(1, &mut rng(s0)).unwrap();
        let b = random_density(1, &mut rng(s1)).unwrap();
        let ab = a.tensor(&b).unwrap();
        prop_assert!(trace_distance(partial_trace(&ab, 0).unwrap().op(), a.op()).unwrap() < 1e-12);
        prop_assert!(trace_distance(partial_trace(&ab, 1).unwrap().op(), b.op()).unwrap() < 1e-12);
        let p = Purities::of(&ab).unwrap();
        prop_assert!(p.deviation().abs() < 1e-12);
    }

    #[test]
    fn tomography_round_trip(seed in any::<u64>()) {
        let rho = random_density(2, &mut rng(seed)).unwrap();
        let res = TomographyResult::from_pauli(0.0, PauliVector::from_state(&rho).unwrap()).unwrap();
        prop_assert!(trace_distance(res.rho_phys.op(), rho.op()).unwrap() < 1e-10);
        prop_assert!(trace_distance(&res.rho_raw, rho.op()).unwrap() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent_and_valid(seed in any::<u64>(), eps in 0.0f64..0.3) {
        let rho = random_pure(2, &mut rng(seed)).unwrap();
        let white = DensityMatrix::maximally_mixed(2).unwrap();
        // push outside the PSD cone along the identity direction
        let mut raw = rho.op().scale_real(1.0 + eps);
        raw.add_scaled(white.op(), num_complex::Complex64::new(-eps, 0.0));
        let p1 = project_psd(&raw).unwrap();
        let p2 = project_psd(p1.op()).unwrap();
        prop_assert!((p1.op() - p2.op()).max_abs() < 1e-12);
        prop_assert!((p1.op().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(sorted_spectrum(p1.op())[0] >= -1e-12);
        // no valid state is closer to the input than its projection
        prop_assert!((p1.op() - &raw).frobenius_norm() <= (rho.op() - &raw).frobenius_norm() + 1e-12);
    }

    #[test]
    fn partial_transpose_spectrum_is_subsystem_independent(seed in any::<u64>()) {
        let rho = random_density(2, &mut rng(seed)).unwrap();
        let a = sorted_spectrum(&partial_transpose(rho.op(), 0).unwrap());
        let b = sorted_spectrum(&partial_transpose(rho.op(), 1).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn separable_states_pass_both_witnesses(seed in any::<u64>(), terms in 1usize..8) {
        let rho = random_separable(terms, &mut rng(seed)).unwrap();
        prop_assert!(ppt_min_eigenvalue(&rho).unwrap() >= -1e-9);
        prop_assert!(chsh_scan(&rho).unwrap().max_abs_s <= 2.0 + 1e-9);
    }

    #[test]
    fn chsh_is_invariant_under_local_axis_relabeling(seed in any::<u64>()) {
        // H⊗H swaps X and Z on both qubits, which permutes the combination set
        let rho = random_density(2, &mut rng(seed)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Operator::from_real(2, &[s, s, s, -s]).unwrap();
        let hh = tensor(&h, &h).unwrap();
        let rotated = rho.evolve_unitary(&hh);
        let a = chsh_scan(&rho).unwrap().max_abs_s;
        let b = chsh_scan(&rotated).unwrap().max_abs_s;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn lm_cost_never_increases(f in 0.5f64..3.0, tau in 0.5f64..5.0, phase in -1.0f64..1.0) {
        let x: Vec<f64> = (0..80).map(|k| k as f64 * 0.05).collect();
        let truth = [f, 1.0 / tau, 0.4, phase, 0.5];
        let y: Vec<f64> = x.iter().map(|&t| FitModel::DampedSinusoid.eval(t, &truth)).collect();
        let model = |t: f64, p: &[f64]| FitModel::DampedSinusoid.eval(t, p);
        let start = [f * 1.05, 1.2 / tau, 0.3, phase + 0.2, 0.45];
        let out = levenberg_marquardt(&model, &x, &y, &start, &LmOptions::default());
        for w in out.history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn fit_is_affine_invariant(scale in 0.2f64..5.0, shift in -2.0f64..2.0) {
        let x: Vec<f64> = (0..120).map(|k| k as f64 * 1e-8).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&t| 0.5 + 0.4 * (-t / 6e-7).exp() * (2.0 * PI * 3e6 * t).cos())
            .collect();
        let base = fit_damped_sinusoid(&SweepData::new(x.clone(), y.clone()).unwrap(), None).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| scale * v + shift).collect();
        let moved = fit_damped_sinusoid(&SweepData::new(x, y2).unwrap(), None).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-30);
        prop_assert!(rel(base.param("frequency"), moved.param("frequency")) < 1e-6);
        prop_assert!(rel(base.param("decay_rate"), moved.param("decay_rate")) < 1e-6);
    }
}
