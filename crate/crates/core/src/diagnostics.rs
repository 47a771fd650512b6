// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Correlation and coherence analysis of two-qubit states: purities, PPT
//! minimum eigenvalue, the 36-combination CHSH scan and T2 fits.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::EvolutionResult;
use crate::error::{Error, Result};
use crate::fit::{fit_damped_sinusoid, fit_exponential, FitFlag, FitModel, FitResult, SweepData, MAX_DECAY_WINDOWS};
use crate::numfmt::round_sig;
use crate::qcore::{eig_hermitian, partial_transpose, pauli_pair, DensityMatrix, PauliLabel};
use crate::tomography::{reduced_states, PauliVector};

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Purities {
    pub p0: f64,
    pub p1: f64,
    pub p01: f64,
}

impl Purities {
    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        require_two_qubits(rho)?;
        let (r0, r1) = reduced_states(rho)?;
        Ok(Self {
            p0: r0.purity(),
            p1: r1.purity(),
            p01: rho.purity(),
        })
    }

    pub fn product(&self) -> f64 {
        self.p0 * self.p1
    }

    /// `P01 − P0·P1`; nonzero means the two qubits are correlated.
    pub fn deviation(&self) -> f64 {
        self.p01 - self.product()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PuritySeries {
    pub times: Vec<f64>,
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub p01: Vec<f64>,
    pub p0p1: Vec<f64>,
}

impl PuritySeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_deviation(&self) -> f64 {
        self.p01
            .iter()
            .zip(&self.p0p1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn purity_suite(times: &[f64], states: &[DensityMatrix]) -> Result<PuritySeries> {
    if times.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: states.len(),
        });
    }
    let each = states.par_iter().map(Purities::of).collect::<Result<Vec<_>>>()?;
    Ok(PuritySeries {
        times: times.to_vec(),
        p0: each.iter().map(|p| p.p0).collect(),
        p1: each.iter().map(|p| p.p1).collect(),
        p01: each.iter().map(|p| p.p01).collect(),
        p0p1: each.iter().map(Purities::product).collect(),
    })
}

pub fn purity_suite_evolution(ev: &EvolutionResult) -> Result<PuritySeries> {
    purity_suite(&ev.times, &ev.states)
}

/// Smallest eigenvalue of the partial transpose on qubit 1. Negative means
/// entangled.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let pt = partial_transpose(rho.op(), 1)?;
    Ok(*eig_hermitian(&pt)?.values.last().expect("4x4"))
}

/// PPT minimum eigenvalue with its shot-noise uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptEstimate {
    pub min_eigenvalue: f64,
    pub sigma: f64,
    /// `min_eigenvalue < −threshold·sigma`
    pub significant: bool,
}

/// Default number of standard deviations for a significant PPT violation.
pub const PPT_SIGNIFICANCE: f64 = 3.0;

/// First-order propagation of binomial count noise into the minimum
/// eigenvalue of the partial transpose of a tomographic estimate.
///
/// Each two-body coefficient has variance `(1 − c²)/N`; one-body
/// coefficients average three settings and have `(1 − c²)/(3N)`. The
/// coefficients are treated as independent.
pub fn ppt_estimate(pauli: &PauliVector, rho: &DensityMatrix, shots: u64, threshold: f64) -> Result<PptEstimate> {
    require_two_qubits(rho)?;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be > 0".into()));
    }
    let eig = eig_hermitian(&partial_transpose(rho.op(), 1)?)?;
    let k = eig.values.len() - 1;
    let v: Vec<_> = (0..4).map(|r| eig.vectors[(r, k)]).collect();
    let mut var = 0.0;
    for a in PauliLabel::ALL {
        for b in PauliLabel::ALL {
            let n_settings = match (a, b) {
                (PauliLabel::I, PauliLabel::I) => continue,
                (PauliLabel::I, _) | (_, PauliLabel::I) => 3.0,
                _ => 1.0,
            };
            let c = pauli.get(a, b);
            let pt = partial_transpose(&pauli_pair(a, b), 1)?;
            let mut g = num_complex::Complex64::new(0.0, 0.0);
            for r in 0..4 {
                for s in 0..4 {
                    g += v[r].conj() * pt[(r, s)] * v[s];
                }
            }
            let g = 0.25 * g.re;
            var += g * g * (1.0 - c * c).max(0.0) / (n_settings * shots as f64);
        }
    }
    let min_eigenvalue = eig.values[k];
    let sigma = var.sqrt();
    Ok(PptEstimate {
        min_eigenvalue,
        sigma,
        significant: min_eigenvalue < -threshold * sigma,
    })
}

/// Settings (A, A′, B, B′) for `S = E(A,B) − E(A,B′) + E(A′,B) + E(A′,B′)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChshCombo {
    pub a: PauliLabel,
    pub a_prime: PauliLabel,
    pub b: PauliLabel,
    pub b_prime: PauliLabel,
}

impl ChshCombo {
    pub fn s_value(&self, e: &Correlations) -> f64 {
        e.get(self.a, self.b) - e.get(self.a, self.b_prime) + e.get(self.a_prime, self.b) + e.get(self.a_prime, self.b_prime)
    }
}

impl fmt::Display for ChshCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.a, self.a_prime, self.b, self.b_prime)
    }
}

fn ordered_pairs() -> Vec<(PauliLabel, PauliLabel)> {
    let mut out = Vec::with_capacity(6);
    for p in PauliLabel::AXES {
        for q in PauliLabel::AXES {
            if p != q {
                out.push((p, q));
            }
        }
    }
    out
}

/// All 36 combos, lexicographic in (A, A′, B, B′) with X < Y < Z. Combo
/// number `k` (1-based) is `chsh_combos()[k − 1]`.
pub fn chsh_combos() -> Vec<ChshCombo> {
    let pairs = ordered_pairs();
    let mut out = Vec::with_capacity(36);
    for &(a, a_prime) in &pairs {
        for &(b, b_prime) in &pairs {
            out.push(ChshCombo { a, a_prime, b, b_prime });
        }
    }
    out
}

/// Two-body correlators `E(M, N) = ⟨M ⊗ N⟩` for M, N ∈ {X, Y, Z}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations(pub [[f64; 3]; 3]);

impl Correlations {
    pub fn get(&self, m: PauliLabel, n: PauliLabel) -> f64 {
        self.0[m.index() - 1][n.index() - 1]
    }

    pub fn exact(rho: &DensityMatrix) -> Result<Self> {
        require_two_qubits(rho)?;
        let mut e = [[0.0; 3]; 3];
        for m in PauliLabel::AXES {
            for n in PauliLabel::AXES {
                e[m.index() - 1][n.index() - 1] = pauli_pair(m, n).expectation(rho.op());
            }
        }
        Ok(Self(e))
    }

    pub fn from_pauli(v: &PauliVector) -> Self {
        let mut e = [[0.0; 3]; 3];
        for m in PauliLabel::AXES {
            for n in PauliLabel::AXES {
                e[m.index() - 1][n.index() - 1] = v.get(m, n);
            }
        }
        Self(e)
    }
}

/// Classical bound on |S|.
pub const CHSH_CLASSICAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshScan {
    pub combos: Vec<ChshCombo>,
    pub s_values: Vec<f64>,
    pub max_abs_s: f64,
    pub argmax: ChshCombo,
    /// 1-based position of `argmax` in `combos`.
    pub argmax_index: usize,
}

impl ChshScan {
    /// Strict violation, ignoring rounding at the bound itself.
    pub fn violates_classical_bound(&self) -> bool {
        self.max_abs_s > CHSH_CLASSICAL_BOUND + 1e-9
    }
}

/// Evaluates all 36 combos. Ties keep the earliest combo.
pub fn chsh_scan_correlations(e: &Correlations) -> ChshScan {
    let combos = chsh_combos();
    let s_values: Vec<f64> = combos.iter().map(|c| c.s_value(e)).collect();
    let mut best = 0;
    for (k, s) in s_values.iter().enumerate() {
        if s.abs() > s_values[best].abs() + 1e-12 {
            best = k;
        }
    }
    ChshScan {
        max_abs_s: s_values[best].abs(),
        argmax: combos[best],
        argmax_index: best + 1,
        combos,
        s_values,
    }
}

pub fn chsh_scan(rho: &DensityMatrix) -> Result<ChshScan> {
    Ok(chsh_scan_correlations(&Correlations::exact(rho)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceModel {
    Exponential,
    ExpCosine,
    /// Picks the model with the lower Bayesian information criterion.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceFit {
    pub model: CoherenceModel,
    pub t2: f64,
    /// Zero for the pure exponential.
    pub oscillation_freq_hz: f64,
    /// No decay resolvable in the window; `t2` is then the longest time the
    /// fit can represent.
    pub non_decaying: bool,
    pub fit: FitResult,
}

pub const MIN_COHERENCE_POINTS: usize = 8;

fn bic(fit: &FitResult, n: usize) -> f64 {
    let rss = (fit.residual_norm * fit.residual_norm).max(1e-300);
    let k = fit.params.len() as f64;
    n as f64 * (rss / n as f64).ln() + k * (n as f64).ln()
}

fn coherence_from(fit: FitResult, window: f64) -> CoherenceFit {
    let non_decaying = fit.has_flag(FitFlag::NonDecaying) || fit.decay_time().is_none_or(|t| !t.is_finite());
    let t2 = match fit.decay_time() {
        Some(t) if t.is_finite() && !non_decaying => t,
        _ => window * MAX_DECAY_WINDOWS,
    };
    let (model, oscillation_freq_hz) = match fit.model {
        FitModel::DampedSinusoid if !fit.has_flag(FitFlag::OnResonance) => (CoherenceModel::ExpCosine, fit.param("frequency")),
        _ => (CoherenceModel::Exponential, 0.0),
    };
    CoherenceFit {
        model,
        t2,
        oscillation_freq_hz,
        non_decaying,
        fit,
    }
}

/// Fits `baseline + amp·e^{−t/T2}` or `baseline + amp·e^{−t/T2}·cos(2πft + φ)`.
pub fn fit_coherence_decay(times: &[f64], signal: &[f64], model: CoherenceModel) -> Result<CoherenceFit> {
    if times.len() < MIN_COHERENCE_POINTS {
        return Err(Error::InvalidArgument(format!(
            "coherence fit needs at least {MIN_COHERENCE_POINTS} points, got {}",
            times.len()
        )));
    }
    let data = SweepData::new(times.to_vec(), signal.to_vec())?;
    let window = times.iter().cloned().fold(0.0, f64::max) - times.iter().cloned().fold(f64::INFINITY, f64::min);
    let exp = || fit_exponential(&data, None);
    let osc = || fit_damped_sinusoid(&data, None);
    match model {
        CoherenceModel::Exponential => Ok(coherence_from(exp()?, window)),
        CoherenceModel::ExpCosine => Ok(coherence_from(osc()?, window)),
        CoherenceModel::Auto => {
            let e = exp()?;
            if e.has_flag(FitFlag::NonDecaying) {
                return Ok(coherence_from(e, window));
            }
            match osc() {
                Ok(o) if !o.has_flag(FitFlag::OnResonance) && bic(&o, data.len()) < bic(&e, data.len()) => {
                    Ok(coherence_from(o, window))
                }
                _ => Ok(coherence_from(e, window)),
            }
        }
    }
}

/// One line of the diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub delay_s: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P01")]
    pub p01: f64,
    #[serde(rename = "P0P1")]
    pub p0p1: f64,
    pub ppt_min: f64,
    pub chsh_max: f64,
    pub chsh_argmax: String,
}

pub fn diagnose(delay_s: f64, rho: &DensityMatrix) -> Result<DiagnosticsRow> {
    let p = Purities::of(rho)?;
    let chsh = chsh_scan(rho)?;
    Ok(DiagnosticsRow {
        delay_s,
        p0: p.p0,
        p1: p.p1,
        p01: p.p01,
        p0p1: p.product(),
        ppt_min: ppt_min_eigenvalue(rho)?,
        chsh_max: chsh.max_abs_s,
        chsh_argmax: chsh.argmax.to_string(),
    })
}

/// Writes `delay_s,P0,P1,P01,P0P1,ppt_min,chsh_max,chsh_argmax` with 12
/// significant digits.
pub fn write_diagnostics_csv<W: Write>(w: W, rows: &[DiagnosticsRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in rows {
        writer.serialize(DiagnosticsRow {
            delay_s: round_sig(r.delay_s),
            p0: round_sig(r.p0),
            p1: round_sig(r.p1),
            p01: round_sig(r.p01),
            p0p1: round_sig(r.p0p1),
            ppt_min: round_sig(r.ppt_min),
            chsh_max: round_sig(r.chsh_max),
            chsh_argmax: r.chsh_argmax.clone(),
        })?;
    }
    if rows.is_empty() {
        writer.write_record(["delay_s", "P0", "P1", "P01", "P0P1", "ppt_min", "chsh_max", "chsh_argmax"])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Operator;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

    fn phi(angle: f64) -> DensityMatrix {
        let s = FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        DensityMatrix::from_pure(&[Complex64::new(s, 0.0), z, z, Complex64::from_polar(s, angle)]).unwrap()
    }

    fn werner(p: f64) -> DensityMatrix {
        let mix = DensityMatrix::maximally_mixed(2).unwrap();
        let singlet = {
            let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
            let z = Complex64::new(0.0, 0.0);
            DensityMatrix::from_pure(&[z, s, -s, z]).unwrap()
        };
        singlet.mix(&mix, p).unwrap()
    }

    #[test]
    fn purity_examples() {
        let prod = purity_suite(&[0.0], &[DensityMatrix::basis(2, 2).unwrap()]).unwrap();
        for v in [prod.p0[0], prod.p1[0], prod.p01[0], prod.p0p1[0]] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let b = Purities::of(&phi(0.0)).unwrap();
        assert!((b.p01 - 1.0).abs() < 1e-12 && (b.p0 - 0.5).abs() < 1e-12 && (b.product() - 0.25).abs() < 1e-12);
        let m = Purities::of(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert!(m.deviation().abs() < 1e-12 && (m.p01 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ppt_examples() {
        assert!((ppt_min_eigenvalue(&phi(0.0)).unwrap() + 0.5).abs() < 1e-12);
        assert!(ppt_min_eigenvalue(&DensityMatrix::basis(2, 1).unwrap()).unwrap() >= -1e-12);
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            let got = ppt_min_eigenvalue(&werner(p)).unwrap();
            let want = ((1.0 - 3.0 * p) / 4.0).min((1.0 + p) / 4.0);
            assert!((got - want).abs() < 1e-9, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn ppt_estimate_flags_only_clear_violations() {
        let rho = phi(0.0);
        let v = PauliVector::from_state(&rho).unwrap();
        let est = ppt_estimate(&v, &rho, 1000, PPT_SIGNIFICANCE).unwrap();
        assert!(est.significant);
        let weak = werner(0.34);
        let v = PauliVector::from_state(&weak).unwrap();
        let est = ppt_estimate(&v, &weak, 100, PPT_SIGNIFICANCE).unwrap();
        assert!(est.min_eigenvalue < 0.0 && est.sigma > 0.0);
        assert!(!est.significant, "{est:?}");
    }

    #[test]
    fn chsh_examples() {
        let combos = chsh_combos();
        assert_eq!(combos.len(), 36);
        assert_eq!(combos[0].to_string(), "XYXY");
        assert_eq!(combos[35].to_string(), "ZYZY");
        assert!(combos.iter().all(|c| c.a != c.a_prime && c.b != c.b_prime));
        let mixed = chsh_scan(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        assert!(mixed.max_abs_s.abs() < 1e-12);
        let bell = chsh_scan(&phi(0.0)).unwrap();
        assert!((bell.max_abs_s - 2.0).abs() < 1e-9);
        let rot = chsh_scan(&phi(FRAC_PI_4)).unwrap();
        assert!((rot.max_abs_s - 2.0 * SQRT_2).abs() < 1e-9);
        assert_eq!(rot.argmax.to_string(), "YXXY");
        assert_eq!(rot.argmax_index, 13);
        assert!(rot.violates_classical_bound() && !bell.violates_classical_bound());
    }

    #[test]
    fn chsh_invariant_under_axis_permutation() {
        // Hadamard on both qubits swaps X and Z
        let h = Operator::from_real(2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap();
        let hh = crate::qcore::tensor(&h, &h).unwrap();
        let rho = phi(0.3);
        let a = chsh_scan(&rho).unwrap().max_abs_s;
        let b = chsh_scan(&rho.evolve_unitary(&hh)).unwrap().max_abs_s;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn coherence_recovery() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let t: Vec<f64> = (0..60).map(|k| k as f64 * 1e-6).collect();
        let y: Vec<f64> = t.iter().map(|&x| (-x / 20e-6).exp() + noise.sample(&mut rng)).collect();
        let fit = fit_coherence_decay(&t, &y, CoherenceModel::Auto).unwrap();
        assert_eq!(fit.model, CoherenceModel::Exponential);
        assert!(((fit.t2 - 20e-6) / 20e-6).abs() < 0.05, "{}", fit.t2);

        let f = 0.2e6;
        let t: Vec<f64> = (0..120).map(|k| k as f64 * 0.5e-6).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|&x| 0.5 + 0.5 * (-x / 19.1e-6).exp() * (2.0 * std::f64::consts::PI * f * x).cos())
            .collect();
        let fit = fit_coherence_decay(&t, &y, CoherenceModel::Auto).unwrap();
        assert_eq!(fit.model, CoherenceModel::ExpCosine);
        assert!(((fit.t2 - 19.1e-6) / 19.1e-6).abs() < 0.05);
        assert!(((fit.oscillation_freq_hz - f) / f).abs() < 0.02);

        let flat = fit_coherence_decay(&t, &vec![0.7; t.len()], CoherenceModel::Exponential).unwrap();
        assert!(flat.non_decaying && flat.t2 > 0.0);
        assert!(fit_coherence_decay(&t[..5], &y[..5], CoherenceModel::Auto).is_err());
    }

    #[test]
    fn diagnostics_csv_header() {
        let row = diagnose(1e-6, &phi(0.0)).unwrap();
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("delay_s,P0,P1,P01,P0P1,ppt_min,chsh_max,chsh_argmax\n"));
        let mut empty = Vec::new();
        write_diagnostics_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), "delay_s,P0,P1,P01,P0P1,ppt_min,chsh_max,chsh_argmax");
    }
}
