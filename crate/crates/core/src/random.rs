// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Random states for property tests and benchmarks.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::qcore::{DensityMatrix, Operator};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random pure state on `n_qubits`.
pub fn random_pure<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<DensityMatrix> {
    let ket: Vec<Complex64> = (0..1usize << n_qubits).map(|_| gaussian_complex(rng)).collect();
    let norm = ket.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    DensityMatrix::from_pure(&ket.iter().map(|c| c / norm).collect::<Vec<_>>())
}

/// Full-rank Ginibre state `G G† / Tr(G G†)` (Hilbert–Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<DensityMatrix> {
    let dim = 1usize << n_qubits;
    let g = Operator::new(dim, (0..dim * dim).map(|_| gaussian_complex(rng)).collect())?;
    let m = &g * &g.dagger();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).symmetrized())
}

/// Convex mixture of `terms` random two-qubit product states.
pub fn random_separable<R: Rng + ?Sized>(terms: usize, rng: &mut R) -> Result<DensityMatrix> {
    let mut weights: Vec<f64> = (0..terms.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut acc = Operator::zeros(4);
    for w in weights {
        let a = random_pure(1, rng)?;
        let b = random_pure(1, rng)?;
        acc.add_scaled(a.tensor(&b)?.op(), w.into());
    }
    DensityMatrix::new(acc.symmetrized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn generated_states_are_valid() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert!((random_pure(2, &mut rng).unwrap().purity() - 1.0).abs() < 1e-12);
            let r = random_density(2, &mut rng).unwrap();
            assert!(r.purity() < 1.0);
            random_separable(10, &mut rng).unwrap();
        }
    }
}
