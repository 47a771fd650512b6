// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit Pauli measurements, finite-shot sampling and IQ-plane readout.
//!
//! Outcome bit 0 always corresponds to the +1 eigenvalue of the measured
//! axis. X and Y are measured by rotating the axis onto Z first:
//! X with `rotation_unitary(π/2, −π/2)`, Y with `rotation_unitary(π/2, 0)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::pulses::rotation_unitary;
use crate::qcore::{pauli_pair, tensor, DensityMatrix, Operator, PauliLabel};

/// Pair of measurement axes for qubits 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MeasurementSetting {
    basis0: PauliLabel,
    basis1: PauliLabel,
}

impl MeasurementSetting {
    pub fn new(basis0: PauliLabel, basis1: PauliLabel) -> Result<Self> {
        if basis0 == PauliLabel::I || basis1 == PauliLabel::I {
            return Err(Error::InvalidArgument(format!(
                "measurement axes must be X, Y or Z, got {basis0}{basis1}"
            )));
        }
        Ok(Self { basis0, basis1 })
    }

    pub fn basis0(&self) -> PauliLabel {
        self.basis0
    }

    pub fn basis1(&self) -> PauliLabel {
        self.basis1
    }

    /// The nine settings, X < Y < Z, qubit 0 major.
    pub fn all() -> Vec<Self> {
        PauliLabel::AXES
            .iter()
            .flat_map(|&a| PauliLabel::AXES.iter().map(move |&b| Self { basis0: a, basis1: b }))
            .collect()
    }

    /// `σ_basis0 ⊗ σ_basis1`
    pub fn observable(&self) -> Operator {
        pauli_pair(self.basis0, self.basis1)
    }

    /// Unitary that maps both measurement axes onto Z.
    pub fn pre_rotation(&self) -> Operator {
        tensor(&axis_rotation(self.basis0), &axis_rotation(self.basis1)).expect("2x2 factors")
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.basis0, self.basis1)
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let parse = |c: Option<char>| c.and_then(PauliLabel::from_char);
        match (parse(chars.next()), parse(chars.next()), chars.next()) {
            (Some(a), Some(b), None) => Self::new(a, b),
            _ => Err(Error::InvalidArgument(format!("invalid measurement setting `{s}`"))),
        }
    }
}

impl TryFrom<String> for MeasurementSetting {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeasurementSetting> for String {
    fn from(s: MeasurementSetting) -> String {
        s.to_string()
    }
}

/// Single-qubit pre-rotation that maps `axis` onto Z.
pub fn axis_rotation(axis: PauliLabel) -> Operator {
    use std::f64::consts::FRAC_PI_2;
    match axis {
        PauliLabel::X => rotation_unitary(FRAC_PI_2, -FRAC_PI_2),
        PauliLabel::Y => rotation_unitary(FRAC_PI_2, 0.0),
        PauliLabel::Z | PauliLabel::I => Operator::identity(2),
    }
}

/// Outcome counts ordered 00, 01, 10, 11 (qubit 0 is the left bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub counts: [u64; 4],
    pub shots: u64,
}

impl CountTable {
    pub fn new(counts: [u64; 4]) -> Self {
        Self {
            counts,
            shots: counts.iter().sum(),
        }
    }

    /// Checks that the counts sum to `shots`.
    pub fn with_shots(counts: [u64; 4], shots: u64) -> Result<Self> {
        let sum: u64 = counts.iter().sum();
        if sum != shots {
            return Err(Error::InvalidArgument(format!("counts sum to {sum}, expected {shots} shots")));
        }
        Ok(Self { counts, shots })
    }

    pub fn n00(&self) -> u64 {
        self.counts[0]
    }
    pub fn n01(&self) -> u64 {
        self.counts[1]
    }
    pub fn n10(&self) -> u64 {
        self.counts[2]
    }
    pub fn n11(&self) -> u64 {
        self.counts[3]
    }

    pub fn frequencies(&self) -> Result<[f64; 4]> {
        let n = self.nonzero_shots()?;
        Ok(self.counts.map(|c| c as f64 / n))
    }

    fn nonzero_shots(&self) -> Result<f64> {
        if self.shots == 0 {
            return Err(Error::InvalidArgument("count table has zero shots".into()));
        }
        Ok(self.shots as f64)
    }

    /// Estimate of `⟨σ ⊗ I⟩` from the qubit-0 marginal.
    pub fn marginal0(&self) -> Result<f64> {
        let n = self.nonzero_shots()?;
        let [a, b, c, d] = self.counts.map(|x| x as f64);
        Ok((a + b - c - d) / n)
    }

    /// Estimate of `⟨I ⊗ σ⟩` from the qubit-1 marginal.
    pub fn marginal1(&self) -> Result<f64> {
        let n = self.nonzero_shots()?;
        let [a, b, c, d] = self.counts.map(|x| x as f64);
        Ok((a - b + c - d) / n)
    }
}

/// `Tr(ρ · σ_basis0 ⊗ σ_basis1)`
pub fn expectation_exact(rho: &DensityMatrix, s: &MeasurementSetting) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    Ok(s.observable().expectation(rho.op()).clamp(-1.0, 1.0))
}

/// `(n00 + n11 − n01 − n10) / shots`
pub fn expectation_from_counts(c: &CountTable) -> Result<f64> {
    let n = c.nonzero_shots()?;
    Ok((c.n00() + c.n11()) as f64 / n - (c.n01() + c.n10()) as f64 / n)
}

/// Outcome distribution of `rho` in the setting's basis.
pub fn outcome_probabilities(rho: &DensityMatrix, s: &MeasurementSetting) -> Result<[f64; 4]> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let rotated = rho.evolve_unitary(&s.pre_rotation());
    let mut p = [0.0; 4];
    for (k, pk) in p.iter_mut().enumerate() {
        *pk = rotated.op()[(k, k)].re.max(0.0);
    }
    let total: f64 = p.iter().sum();
    Ok(p.map(|x| x / total))
}

/// Multinomial draw by sequential conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64; 4], shots: u64, rng: &mut R) -> CountTable {
    let mut counts = [0u64; 4];
    let mut left = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        let n = Binomial::new(left, p).expect("p in [0, 1]").sample(rng);
        counts[k] = n;
        left -= n;
        mass -= probs[k];
    }
    counts[3] = left;
    CountTable { counts, shots }
}

/// Deterministic per seed.
pub fn sample_setting(rho: &DensityMatrix, s: &MeasurementSetting, shots: u64, seed: u64) -> Result<CountTable> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    sample_setting_with(rho, s, shots, None, &mut rng)
}

/// Sampling with an explicit generator and optional readout error.
pub fn sample_setting_with<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    s: &MeasurementSetting,
    shots: u64,
    readout: Option<&ReadoutError>,
    rng: &mut R,
) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be > 0".into()));
    }
    let mut p = outcome_probabilities(rho, s)?;
    if let Some(r) = readout {
        p = r.apply(&p);
    }
    Ok(sample_counts(&p, shots, rng))
}

/// Independent per-qubit assignment errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    /// P(read 1 | prepared 0)
    pub p01: f64,
    /// P(read 0 | prepared 1)
    pub p10: f64,
}

impl ReadoutError {
    pub fn symmetric(e: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&e) {
            return Err(Error::InvalidArgument(format!("readout error {e} outside [0, 0.5]")));
        }
        Ok(Self { p01: e, p10: e })
    }

    pub fn from_iq(model: &IQModel) -> Self {
        let e = model.analytic_error();
        Self { p01: e, p10: e }
    }

    fn single(&self) -> [[f64; 2]; 2] {
        // row = read, column = true
        [[1.0 - self.p01, self.p10], [self.p01, 1.0 - self.p10]]
    }

    /// Pushes a two-qubit outcome distribution through the confusion matrix.
    pub fn apply(&self, p: &[f64; 4]) -> [f64; 4] {
        let c = self.single();
        let mut out = [0.0; 4];
        for (read, o) in out.iter_mut().enumerate() {
            for (truth, pt) in p.iter().enumerate() {
                *o += c[read >> 1][truth >> 1] * c[read & 1][truth & 1] * pt;
            }
        }
        out
    }
}

/// Linear decision rule in the IQ plane: label 1 when `normal·p > offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl Discriminator {
    pub fn new(normal: [f64; 2], offset: f64) -> Result<Self> {
        let norm = normal[0].hypot(normal[1]);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate("discriminator normal must be non-zero".into()));
        }
        Ok(Self {
            normal: [normal[0] / norm, normal[1] / norm],
            offset: offset / norm,
        })
    }

    /// Midpoint rule between two class centers.
    pub fn between(c0: [f64; 2], c1: [f64; 2]) -> Result<Self> {
        let d = [c1[0] - c0[0], c1[1] - c0[1]];
        let len = d[0].hypot(d[1]);
        let scale = c0[0].abs().max(c0[1].abs()).max(c1[0].abs()).max(c1[1].abs()).max(1.0);
        if !(len > 1e-14 * scale) {
            return Err(Error::Degenerate("class centroids coincide".into()));
        }
        let n = [d[0] / len, d[1] / len];
        let mid = [0.5 * (c0[0] + c1[0]), 0.5 * (c0[1] + c1[1])];
        Ok(Self {
            normal: n,
            offset: n[0] * mid[0] + n[1] * mid[1],
        })
    }

    pub fn classify(&self, p: [f64; 2]) -> u8 {
        u8::from(self.normal[0] * p[0] + self.normal[1] * p[1] > self.offset)
    }
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    [sx / n, sy / n]
}

/// Normal along the centroid difference, threshold at the midpoint.
pub fn train_discriminator(points0: &[[f64; 2]], points1: &[[f64; 2]]) -> Result<Discriminator> {
    if points0.is_empty() || points1.is_empty() {
        return Err(Error::InvalidArgument("both training classes need at least one point".into()));
    }
    Discriminator::between(centroid(points0), centroid(points1))
}

/// Isotropic Gaussian readout clouds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IQModel {
    pub center0: [f64; 2],
    pub center1: [f64; 2],
    pub cloud_sigma: f64,
}

impl Default for IQModel {
    fn default() -> Self {
        Self {
            center0: [-1.0, 0.0],
            center1: [1.0, 0.0],
            cloud_sigma: 2.0 / 6.0,
        }
    }
}

impl IQModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.cloud_sigma > 0.0 && self.cloud_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cloud_sigma must be > 0, got {}",
                self.cloud_sigma
            )));
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        (self.center1[0] - self.center0[0]).hypot(self.center1[1] - self.center0[1])
    }

    /// Misassignment probability of the midpoint rule: `½·erfc(d / (2√2 σ))`.
    pub fn analytic_error(&self) -> f64 {
        0.5 * erfc(self.separation() / (2.0 * std::f64::consts::SQRT_2 * self.cloud_sigma))
    }

    /// Midpoint rule between the true centers; falls back to a vertical
    /// line through the common center when the clouds coincide.
    pub fn discriminator(&self) -> Discriminator {
        Discriminator::between(self.center0, self.center1).unwrap_or(Discriminator {
            normal: [1.0, 0.0],
            offset: self.center0[0],
        })
    }
}

/// Simulated single-qubit readout shots.
#[derive(Debug, Clone, PartialEq)]
pub struct IqShots {
    pub points: Vec<[f64; 2]>,
    pub truth: Vec<u8>,
    pub labels: Vec<u8>,
}

impl IqShots {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn assignment_error(&self) -> f64 {
        let wrong = self.truth.iter().zip(&self.labels).filter(|(t, l)| t != l).count();
        wrong as f64 / self.len().max(1) as f64
    }

    pub fn excited_fraction(&self) -> f64 {
        self.labels.iter().filter(|&&l| l == 1).count() as f64 / self.len().max(1) as f64
    }

    /// Points split by their true label.
    pub fn by_truth(&self) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
        let mut zero = Vec::new();
        let mut one = Vec::new();
        for (p, &t) in self.points.iter().zip(&self.truth) {
            if t == 0 {
                zero.push(*p)
            } else {
                one.push(*p)
            }
        }
        (zero, one)
    }
}

/// Draws a true label per shot, then an IQ point around its center, then
/// assigns with the model's midpoint discriminator.
pub fn simulate_iq(p_excited: f64, model: &IQModel, shots: usize, seed: u64) -> Result<IqShots> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    simulate_iq_with(p_excited, model, &model.discriminator(), shots, &mut rng)
}

pub fn simulate_iq_with<R: Rng + ?Sized>(
    p_excited: f64,
    model: &IQModel,
    disc: &Discriminator,
    shots: usize,
    rng: &mut R,
) -> Result<IqShots> {
    model.validate()?;
    if !(0.0..=1.0).contains(&p_excited) {
        return Err(Error::InvalidArgument(format!("p_excited {p_excited} outside [0, 1]")));
    }
    let noise = Normal::new(0.0, model.cloud_sigma).expect("sigma validated");
    let mut out = IqShots {
        points: Vec::with_capacity(shots),
        truth: Vec::with_capacity(shots),
        labels: Vec::with_capacity(shots),
    };
    for _ in 0..shots {
        let t = u8::from(rng.random::<f64>() < p_excited);
        let c = if t == 1 { model.center1 } else { model.center0 };
        let p = [c[0] + noise.sample(rng), c[1] + noise.sample(rng)];
        out.labels.push(disc.classify(p));
        out.points.push(p);
        out.truth.push(t);
    }
    Ok(out)
}

/// CSV rows `setting,n00,n01,n10,n11,shots`.
pub fn write_count_rows<'a, W: Write>(
    w: W,
    rows: impl IntoIterator<Item = (&'a MeasurementSetting, &'a CountTable)>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["setting", "n00", "n01", "n10", "n11", "shots"])?;
    for (s, c) in rows {
        let [a, b, cc, d] = c.counts;
        wtr.write_record([s.to_string(), a.to_string(), b.to_string(), cc.to_string(), d.to_string(), c.shots.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
