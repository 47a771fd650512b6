// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Nine-setting two-qubit state tomography.
//!
//! Two-body Pauli coefficients come straight from the setting that measures
//! them. One-body coefficients are over-determined (each appears in three
//! settings) and are averaged over all three marginals.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{outcome_probabilities, CountTable, MeasurementSetting};
use crate::numfmt::round_sig;
use crate::qcore::{eig_hermitian, partial_trace, pauli_pair, DensityMatrix, Operator, PauliLabel};

/// The nine settings, row-major over (basis0, basis1) in X, Y, Z order.
pub fn settings_list() -> Vec<MeasurementSetting> {
    MeasurementSetting::all()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    pub delay_s: f64,
    pub tables: BTreeMap<MeasurementSetting, CountTable>,
}

impl TomographyRecord {
    pub fn new(delay_s: f64) -> Self {
        Self {
            delay_s,
            tables: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, s: MeasurementSetting, c: CountTable) {
        self.tables.insert(s, c);
    }

    pub fn get(&self, s: &MeasurementSetting) -> Result<&CountTable> {
        self.tables
            .get(s)
            .ok_or_else(|| Error::MissingSetting(format!("{s} at delay {} s", self.delay_s)))
    }

    pub fn is_complete(&self) -> bool {
        settings_list().iter().all(|s| self.tables.contains_key(s))
    }
}

/// Coefficients `c_ij = ⟨σi ⊗ σj⟩`, indexed by `PauliLabel::index()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliVector {
    coeffs: [[f64; 4]; 4],
}

impl PauliVector {
    /// All coefficients zero except `c_II = 1` (the maximally mixed state).
    pub fn identity() -> Self {
        let mut coeffs = [[0.0; 4]; 4];
        coeffs[0][0] = 1.0;
        Self { coeffs }
    }

    pub fn get(&self, a: PauliLabel, b: PauliLabel) -> f64 {
        self.coeffs[a.index()][b.index()]
    }

    /// Sets a coefficient. `c_II` is fixed at 1 and values are clamped to
    /// [-1, 1].
    pub fn set(&mut self, a: PauliLabel, b: PauliLabel, v: f64) -> Result<()> {
        if a == PauliLabel::I && b == PauliLabel::I {
            return Err(Error::InvalidArgument("c_II is fixed at 1".into()));
        }
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient for {a}{b}")));
        }
        self.coeffs[a.index()][b.index()] = v.clamp(-1.0, 1.0);
        Ok(())
    }

    pub fn as_array(&self) -> &[[f64; 4]; 4] {
        &self.coeffs
    }

    /// Estimator applied to per-setting outcome distributions, ordered as
    /// [p00, p01, p10, p11].
    pub fn from_distributions(dists: &BTreeMap<MeasurementSetting, [f64; 4]>) -> Result<Self> {
        let mut v = Self::identity();
        let mut one0 = [0.0; 4];
        let mut one1 = [0.0; 4];
        for s in settings_list() {
            let [p00, p01, p10, p11] = *dists
                .get(&s)
                .ok_or_else(|| Error::MissingSetting(s.to_string()))?;
            let (a, b) = (s.basis0(), s.basis1());
            v.coeffs[a.index()][b.index()] = (p00 + p11 - p01 - p10).clamp(-1.0, 1.0);
            one0[a.index()] += (p00 + p01 - p10 - p11) / 3.0;
            one1[b.index()] += (p00 - p01 + p10 - p11) / 3.0;
        }
        for p in PauliLabel::AXES {
            v.coeffs[p.index()][0] = one0[p.index()].clamp(-1.0, 1.0);
            v.coeffs[0][p.index()] = one1[p.index()].clamp(-1.0, 1.0);
        }
        Ok(v)
    }

    /// Exact coefficients of a two-qubit state, through the same estimator
    /// as counted data.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let dists = settings_list()
            .into_iter()
            .map(|s| Ok((s, outcome_probabilities(rho, &s)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::from_distributions(&dists)
    }
}

/// Turns a complete record into Pauli coefficients.
pub fn assemble_pauli_vector(rec: &TomographyRecord) -> Result<PauliVector> {
    let dists = settings_list()
        .into_iter()
        .map(|s| Ok((s, rec.get(&s)?.frequencies()?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    PauliVector::from_distributions(&dists)
}

/// `ρ = ¼ Σ c_ij σi ⊗ σj`
pub fn linear_inversion(v: &PauliVector) -> Operator {
    let mut rho = Operator::zeros(4);
    for a in PauliLabel::ALL {
        for b in PauliLabel::ALL {
            let c = v.get(a, b);
            if c != 0.0 {
                rho.add_scaled(&pauli_pair(a, b), Complex64::new(0.25 * c, 0.0));
            }
        }
    }
    rho
}

/// Truncates negative eigenvalues and spreads the deficit over the
/// surviving ones, keeping the eigenbasis.
///
/// Walking up from the smallest eigenvalue, each one that would stay
/// negative after receiving its share of the accumulated deficit is zeroed
/// and its value added to the deficit.
pub fn project_eigenvalues(values_desc: &[f64]) -> Vec<f64> {
    let mut out = values_desc.to_vec();
    let mut deficit = 0.0;
    let mut keep = out.len();
    while keep > 0 {
        let i = keep - 1;
        if out[i] + deficit / keep as f64 >= 0.0 {
            break;
        }
        deficit += out[i];
        out[i] = 0.0;
        keep -= 1;
    }
    if keep > 0 {
        let share = deficit / keep as f64;
        out[..keep].iter_mut().for_each(|v| *v += share);
    }
    out
}

/// Closest trace-one positive semidefinite matrix sharing the eigenbasis of
/// `rho_raw`.
pub fn project_psd(rho_raw: &Operator) -> Result<DensityMatrix> {
    let tr = rho_raw.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-6 {
        return Err(Error::InvalidState(format!("trace {:.9} + {:.3e}i", tr.re, tr.im)));
    }
    let eig = eig_hermitian(rho_raw)?;
    if eig.values.last().is_some_and(|&v| v >= 0.0) {
        return DensityMatrix::new(rho_raw.symmetrized());
    }
    let lambda = project_eigenvalues(&eig.values);
    let dim = rho_raw.dim();
    let u = &eig.vectors;
    let mut out = Operator::zeros(dim);
    for (k, &l) in lambda.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        for r in 0..dim {
            let ur = u[(r, k)] * l;
            for c in 0..dim {
                out[(r, c)] += ur * u[(c, k)].conj();
            }
        }
    }
    DensityMatrix::new(out.symmetrized())
}

pub fn reduced_states(rho: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    Ok((partial_trace(rho, 0)?, partial_trace(rho, 1)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyResult {
    pub delay_s: f64,
    pub pauli: PauliVector,
    pub rho_raw: Operator,
    pub rho_phys: DensityMatrix,
    pub min_raw_eigenvalue: f64,
}

impl TomographyResult {
    pub fn from_pauli(delay_s: f64, pauli: PauliVector) -> Result<Self> {
        let rho_raw = linear_inversion(&pauli);
        let min_raw_eigenvalue = *eig_hermitian(&rho_raw)?.values.last().expect("4x4");
        let rho_phys = project_psd(&rho_raw)?;
        Ok(Self {
            delay_s,
            pauli,
            rho_raw,
            rho_phys,
            min_raw_eigenvalue,
        })
    }

    /// Projected state, or the raw inversion when `use_raw` is set. The raw
    /// matrix may have a negative eigenvalue, so it bypasses validation.
    pub fn state(&self, use_raw: bool) -> DensityMatrix {
        if use_raw {
            DensityMatrix::new_unchecked(self.rho_raw.symmetrized())
        } else {
            self.rho_phys.clone()
        }
    }

    pub fn to_document(&self) -> RhoDocument {
        RhoDocument {
            schema: RHO_SCHEMA.into(),
            delay_s: round_sig(self.delay_s),
            rho: matrix_to_pairs(self.rho_phys.op()),
            rho_raw: matrix_to_pairs(&self.rho_raw),
            min_raw_eigenvalue: round_sig(self.min_raw_eigenvalue),
        }
    }
}

pub fn reconstruct(rec: &TomographyRecord) -> Result<TomographyResult> {
    TomographyResult::from_pauli(rec.delay_s, assemble_pauli_vector(rec)?)
}

/// Reconstructs each record independently, preserving order.
pub fn reconstruct_all(records: &[TomographyRecord]) -> Result<Vec<TomographyResult>> {
    records.par_iter().map(reconstruct).collect()
}

pub const RHO_SCHEMA: &str = "rho-v1";

/// Serialized density matrix: entries as `[re, im]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoDocument {
    pub schema: String,
    pub delay_s: f64,
    pub rho: Vec<Vec<[f64; 2]>>,
    pub rho_raw: Vec<Vec<[f64; 2]>>,
    pub min_raw_eigenvalue: f64,
}

impl RhoDocument {
    pub fn rho_operator(&self) -> Result<Operator> {
        pairs_to_matrix(&self.rho)
    }

    pub fn rho_raw_operator(&self) -> Result<Operator> {
        pairs_to_matrix(&self.rho_raw)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(s)?;
        if doc.schema != RHO_SCHEMA {
            return Err(Error::config("schema", format!("expected {RHO_SCHEMA}, got {}", doc.schema)));
        }
        Ok(doc)
    }
}

pub fn matrix_to_pairs(m: &Operator) -> Vec<Vec<[f64; 2]>> {
    (0..m.dim())
        .map(|r| {
            (0..m.dim())
                .map(|c| [round_sig(m[(r, c)].re), round_sig(m[(r, c)].im)])
                .collect()
        })
        .collect()
}

pub fn pairs_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<Operator> {
    let dim = rows.len();
    let mut data = Vec::with_capacity(dim * dim);
    for row in rows {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        data.extend(row.iter().map(|[re, im]| Complex64::new(*re, *im)));
    }
    Operator::new(dim, data)
}

#[derive(Debug, Serialize, Deserialize)]
struct CountRow {
    delay_s: f64,
    setting: MeasurementSetting,
    n00: u64,
    n01: u64,
    n10: u64,
    n11: u64,
    shots: u64,
}

/// Reads `delay_s,setting,n00,n01,n10,n11,shots` rows, grouped by delay in
/// order of first appearance. Every delay must carry all nine settings.
pub fn read_counts_csv<R: Read>(r: R) -> Result<Vec<TomographyRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut records: Vec<TomographyRecord> = Vec::new();
    for row in reader.deserialize() {
        let row: CountRow = row?;
        let table = CountTable::with_shots([row.n00, row.n01, row.n10, row.n11], row.shots)?;
        match records.iter_mut().find(|r| r.delay_s.to_bits() == row.delay_s.to_bits()) {
            Some(rec) => rec.insert(row.setting, table),
            None => {
                let mut rec = TomographyRecord::new(row.delay_s);
                rec.insert(row.setting, table);
                records.push(rec);
            }
        }
    }
    for rec in &records {
        for s in settings_list() {
            rec.get(&s)?;
        }
    }
    Ok(records)
}

pub fn write_counts_csv<W: Write>(w: W, records: &[TomographyRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for rec in records {
        for (s, c) in &rec.tables {
            writer.serialize(CountRow {
                delay_s: round_sig(rec.delay_s),
                setting: *s,
                n00: c.n00(),
                n01: c.n01(),
                n10: c.n10(),
                n11: c.n11(),
                shots: c.shots,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::sample_setting;
    use crate::qcore::trace_distance;
    use crate::random::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> DensityMatrix {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        DensityMatrix::from_pure(&[s, z, z, s]).unwrap()
    }

    fn sampled_record(rho: &DensityMatrix, shots: u64, seed: u64) -> TomographyRecord {
        let mut rec = TomographyRecord::new(0.0);
        for (k, s) in settings_list().into_iter().enumerate() {
            rec.insert(s, sample_setting(rho, &s, shots, seed * 16 + k as u64).unwrap());
        }
        rec
    }

    #[test]
    fn settings_order() {
        let l = settings_list();
        assert_eq!(l.len(), 9);
        assert_eq!(l[0].to_string(), "XX");
        assert_eq!(l[4].to_string(), "YY");
        assert_eq!(l[8].to_string(), "ZZ");
    }

    #[test]
    fn bell_and_ground_coefficients() {
        use PauliLabel::*;
        let v = PauliVector::from_state(&bell()).unwrap();
        assert!((v.get(X, X) - 1.0).abs() < 1e-12);
        assert!((v.get(Y, Y) + 1.0).abs() < 1e-12);
        assert!((v.get(Z, Z) - 1.0).abs() < 1e-12);
        for p in PauliLabel::AXES {
            assert!(v.get(p, I).abs() < 1e-12 && v.get(I, p).abs() < 1e-12);
        }
        let g = PauliVector::from_state(&DensityMatrix::basis(2, 0).unwrap()).unwrap();
        for a in PauliLabel::ALL {
            for b in PauliLabel::ALL {
                let want = if a != X && a != Y && b != X && b != Y { 1.0 } else { 0.0 };
                assert!((g.get(a, b) - want).abs() < 1e-12, "{a}{b}");
            }
        }
    }

    #[test]
    fn inversion_round_trip() {
        let mixed = linear_inversion(&PauliVector::identity());
        assert!((&mixed - DensityMatrix::maximally_mixed(2).unwrap().op()).max_abs() < 1e-15);
        let b = bell();
        let back = linear_inversion(&PauliVector::from_state(&b).unwrap());
        assert!((&back - b.op()).max_abs() < 1e-12);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..20 {
            let r = random_density(2, &mut rng).unwrap();
            let res = TomographyResult::from_pauli(0.0, PauliVector::from_state(&r).unwrap()).unwrap();
            assert!(trace_distance(res.rho_phys.op(), r.op()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn eigenvalue_projection_by_hand() {
        let a = project_eigenvalues(&[1.2, 0.0, 0.0, -0.2]);
        for (x, y) in a.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        let b = project_eigenvalues(&[0.6, 0.5, 0.0, -0.1]);
        for (x, y) in b.iter().zip([0.55, 0.45, 0.0, 0.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(project_eigenvalues(&[0.4, 0.3, 0.2, 0.1]), vec![0.4, 0.3, 0.2, 0.1]);
    }

    #[test]
    fn projection_is_idempotent_and_physical() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let r = random_density(2, &mut rng).unwrap();
        let p = project_psd(r.op()).unwrap();
        assert!((p.op() - r.op()).max_abs() < 1e-12);
        let raw = Operator::diagonal_real(&[0.6, 0.5, 0.0, -0.1]).unwrap();
        let p = project_psd(&raw).unwrap();
        let want = Operator::diagonal_real(&[0.55, 0.45, 0.0, 0.0]).unwrap();
        assert!((p.op() - &want).max_abs() < 1e-12);
        assert!(project_psd(&Operator::diagonal_real(&[0.5, 0.1, 0.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn sampled_coefficients_within_statistical_bound() {
        let b = bell();
        let exact = PauliVector::from_state(&b).unwrap();
        let v = assemble_pauli_vector(&sampled_record(&b, 10_000, 3)).unwrap();
        for a in PauliLabel::ALL {
            for c in PauliLabel::ALL {
                assert!((v.get(a, c) - exact.get(a, c)).abs() < 0.04, "{a}{c}");
            }
        }
    }

    #[test]
    fn missing_setting_is_reported() {
        let mut rec = sampled_record(&bell(), 100, 0);
        rec.tables.pop_last();
        assert!(matches!(assemble_pauli_vector(&rec), Err(Error::MissingSetting(_))));
    }

    #[test]
    fn counts_csv_round_trip() {
        let recs = vec![sampled_record(&bell(), 500, 4), {
            let mut r = sampled_record(&DensityMatrix::basis(2, 1).unwrap(), 500, 5);
            r.delay_s = 2.5e-6;
            r
        }];
        let mut buf = Vec::new();
        write_counts_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("delay_s,setting,n00,n01,n10,n11,shots\n"));
        assert_eq!(read_counts_csv(&buf[..]).unwrap(), recs);
        let truncated: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(read_counts_csv(truncated.as_bytes()).is_err());
    }

    #[test]
    fn rho_json_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let r = random_density(2, &mut rng).unwrap();
        let res = TomographyResult::from_pauli(1e-6, PauliVector::from_state(&r).unwrap()).unwrap();
        let json = serde_json::to_string(&res.to_document()).unwrap();
        assert!(json.contains("\"schema\":\"rho-v1\""));
        let back = RhoDocument::from_json(&json).unwrap().rho_operator().unwrap();
        assert!((&back - res.rho_phys.op()).max_abs() < 1e-12);
    }
}
