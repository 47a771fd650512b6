// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for registers of one to three qubits.
//!
//! Everything here works on row-major square matrices of dimension 2, 4 or 8.
//! Qubit 0 is always the left Kronecker factor, i.e. the most significant bit
//! of a computational-basis index.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used by the [`DensityMatrix`] invariants.
pub const STATE_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn valid_dim(dim: usize) -> bool {
    matches!(dim, 2 | 4 | 8)
}

/// A square complex matrix over a 1–3 qubit register.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if !valid_dim(dim) {
            return Err(Error::InvalidDimension(dim));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// # Panics
    /// If `dim` is not 2, 4 or 8.
    pub fn zeros(dim: usize) -> Self {
        assert!(valid_dim(dim), "invalid operator dimension {dim}");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// # Panics
    /// If `dim` is not 2, 4 or 8.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        let dim = values.len();
        if !valid_dim(dim) {
            return Err(Error::InvalidDimension(dim));
        }
        let mut m = Self::zeros(dim);
        for (k, v) in values.iter().enumerate() {
            m.data[k * dim + k] = *v;
        }
        Ok(m)
    }

    pub fn diagonal_real(values: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    /// Projector |ψ⟩⟨ψ| of an (unnormalized) ket.
    pub fn outer(ket: &[Complex64]) -> Result<Self> {
        let dim = ket.len();
        if !valid_dim(dim) {
            return Err(Error::InvalidDimension(dim));
        }
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = ket[r] * ket[c].conj();
            }
        }
        Ok(m)
    }

    pub fn pauli(label: PauliLabel) -> Self {
        let d = match label {
            PauliLabel::I => [ONE, ZERO, ZERO, ONE],
            PauliLabel::X => [ZERO, ONE, ONE, ZERO],
            PauliLabel::Y => [ZERO, -I, I, ZERO],
            PauliLabel::Z => [ONE, ZERO, ZERO, -ONE],
        };
        Self {
            dim: 2,
            data: d.to_vec(),
        }
    }

    /// Lowering operator σ− = |0⟩⟨1| (|1⟩ is the excited state).
    pub fn sigma_minus() -> Self {
        Self {
            dim: 2,
            data: vec![ZERO, ONE, ZERO, ZERO],
        }
    }

    /// Embeds a single-qubit operator on `target` of an `n_qubits` register.
    pub fn embed(single: &Operator, target: usize, n_qubits: usize) -> Result<Self> {
        if single.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: single.dim,
            });
        }
        if target >= n_qubits || n_qubits == 0 || n_qubits > 3 {
            return Err(Error::InvalidQubit {
                index: target,
                n_qubits,
            });
        }
        let factors: Vec<Operator> = (0..n_qubits)
            .map(|q| {
                if q == target {
                    single.clone()
                } else {
                    Operator::identity(2)
                }
            })
            .collect();
        tensor_all(&factors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c];
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.data[k * self.dim + k]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Operator, s: Complex64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Writes `self * rhs` into `out` without allocating.
    pub fn mul_into(&self, rhs: &Operator, out: &mut Operator) {
        let n = self.dim;
        debug_assert!(rhs.dim == n && out.dim == n);
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            for c in 0..n {
                let mut acc = ZERO;
                for (k, a) in row.iter().enumerate() {
                    acc += a * rhs.data[k * n + c];
                }
                out.data[r * n + c] = acc;
            }
        }
    }

    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Largest entry magnitude of `self − self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                let d = (self.data[r * n + c] - self.data[c * n + r].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// (M + M†)/2
    pub fn symmetrized(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = 0.5 * (self.data[r * n + c] + self.data[c * n + r].conj());
            }
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tr(self · rho), real part.
    pub fn expectation(&self, rho: &Operator) -> f64 {
        let n = self.dim;
        let mut acc = ZERO;
        for r in 0..n {
            for k in 0..n {
                acc += self.data[r * n + k] * rho.data[k * n + r];
            }
        }
        acc.re
    }

    /// U ρ U†
    pub fn conjugate_by(&self, u: &Operator) -> Self {
        &(u * self) * &u.dagger()
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = m[(r, c)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        let mut out = Operator::zeros(self.dim);
        self.mul_into(rhs, &mut out);
        out
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| {
                        let z = self[(r, c)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(D::Error::custom("matrix rows must all have length equal to the row count"));
        }
        let data = rows
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Operator::new(dim, data).map_err(D::Error::custom)
    }
}

/// Single-qubit Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];
    /// The three measurable axes in canonical order X, Y, Z.
    pub const AXES: [PauliLabel; 3] = [PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliLabel::I),
            'X' => Some(PauliLabel::X),
            'Y' => Some(PauliLabel::Y),
            'Z' => Some(PauliLabel::Z),
            _ => None,
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Kronecker product `a ⊗ b`; `a` acts on the lower-numbered qubits.
pub fn tensor(a: &Operator, b: &Operator) -> Result<Operator> {
    let dim = a.dim * b.dim;
    if !valid_dim(dim) {
        return Err(Error::InvalidDimension(dim));
    }
    let mut out = Operator::zeros(dim);
    for ar in 0..a.dim {
        for ac in 0..a.dim {
            let av = a[(ar, ac)];
            if av == ZERO {
                continue;
            }
            for br in 0..b.dim {
                for bc in 0..b.dim {
                    out[(ar * b.dim + br, ac * b.dim + bc)] = av * b[(br, bc)];
                }
            }
        }
    }
    Ok(out)
}

pub fn tensor_all(factors: &[Operator]) -> Result<Operator> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| tensor(&acc, f))
}

/// σ_a ⊗ σ_b on two qubits.
pub fn pauli_pair(a: PauliLabel, b: PauliLabel) -> Operator {
    tensor(&Operator::pauli(a), &Operator::pauli(b)).expect("4x4 is a valid dimension")
}

/// Eigen-decomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: Operator,
}

impl HermitianEigen {
    /// V diag(f(λ)) V†
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> Operator {
        let n = self.vectors.dim;
        let mut out = Operator::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for r in 0..n {
                let vr = self.vectors[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Operator {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim;
        (0..n).map(|r| self.vectors[(r, k)]).collect()
    }
}

/// Eigenvalues (descending) and eigenvectors of a Hermitian matrix.
pub fn eig_hermitian(m: &Operator) -> Result<HermitianEigen> {
    let dev = m.hermitian_deviation();
    if dev > STATE_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let sym = m.symmetrized();
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..m.dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = Operator::from_nalgebra(&eig.eigenvectors);
    let mut vectors = Operator::zeros(m.dim);
    for (new_k, &old_k) in order.iter().enumerate() {
        for r in 0..m.dim {
            vectors[(r, new_k)] = vecs[(r, old_k)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// exp(−iHt) for a Hermitian `h`.
pub fn unitary_propagator(h: &Operator, t: f64) -> Result<Operator> {
    let eig = eig_hermitian(h)?;
    Ok(eig.reconstruct_with(|l| Complex64::from_polar(1.0, -l * t)))
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates `op` against the state invariants at [`STATE_TOL`].
    pub fn new(op: Operator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let tr = op.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {:.12} + {:.3e}i", tr.re, tr.im)));
        }
        let min = *eig_hermitian(&op)?.values.last().expect("non-empty");
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(op.symmetrized()))
    }

    /// Wraps without checks. Callers guarantee the invariants.
    pub(crate) fn new_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn from_pure(ket: &[Complex64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let normed: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self(Operator::outer(&normed)?))
    }

    pub fn from_real_pure(ket: &[f64]) -> Result<Self> {
        let v: Vec<Complex64> = ket.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_pure(&v)
    }

    /// |index⟩⟨index| on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut ket = vec![ZERO; dim];
        ket[index] = ONE;
        Self::from_pure(&ket)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if !valid_dim(dim) {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self(Operator::identity(dim).scale_real(1.0 / dim as f64)))
    }

    pub fn op(&self) -> &Operator {
        &self.0
    }

    pub fn into_op(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.0.n_qubits()
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// Mixture `p·self + (1−p)·other`.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing weight {p} outside [0, 1]")));
        }
        Ok(Self(&self.0.scale_real(p) + &other.0.scale_real(1.0 - p)))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(Self(tensor(&self.0, &other.0)?))
    }

    /// U ρ U†, which preserves the invariants for unitary `u`.
    pub fn evolve_unitary(&self, u: &Operator) -> Self {
        Self(self.0.conjugate_by(u).symmetrized())
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let op = Operator::deserialize(d)?;
        DensityMatrix::new(op).map_err(D::Error::custom)
    }
}

/// Reduced state of one qubit; every other qubit is traced out.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    if keep >= n {
        return Err(Error::InvalidQubit { index: keep, n_qubits: n });
    }
    let dim = rho.dim();
    let shift = n - 1 - keep;
    let mut out = Operator::zeros(2);
    for r in 0..dim {
        for c in 0..dim {
            // other bits must agree
            if (r ^ c) & !(1 << shift) != 0 {
                continue;
            }
            out[((r >> shift) & 1, (c >> shift) & 1)] += rho.op()[(r, c)];
        }
    }
    Ok(DensityMatrix(out))
}

/// Partial transpose of a two-qubit operator with respect to `subsystem`.
pub fn partial_transpose(rho: &Operator, subsystem: usize) -> Result<Operator> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    if subsystem > 1 {
        return Err(Error::InvalidQubit {
            index: subsystem,
            n_qubits: 2,
        });
    }
    let bit = 1 - subsystem;
    let mask = 1usize << bit;
    let mut out = Operator::zeros(4);
    for r in 0..4 {
        for c in 0..4 {
            // swap the subsystem's bit between row and column index
            let (rn, cn) = if (r & mask) != (c & mask) {
                (r ^ mask, c ^ mask)
            } else {
                (r, c)
            };
            out[(rn, cn)] = rho[(r, c)];
        }
    }
    Ok(out)
}

/// Tr(ρ²)
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.op().data().iter().map(|z| z.norm_sqr()).sum()
}

/// ½‖a − b‖₁
pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    let diff = (a - b).symmetrized();
    Ok(0.5 * eig_hermitian(&diff)?.values.iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_real_pure(&[s, 0.0, 0.0, s]).unwrap()
    }

    fn assert_op_close(a: &Operator, b: &Operator, tol: f64) {
        let d = (a - b).max_abs();
        assert!(d < tol, "operators differ by {d:e}\n{a:?}\n{b:?}");
    }

    // brute-force index formula: (A⊗B)[i,j] = A[i/db, j/db] · B[i%db, j%db]
    fn kron_oracle(a: &Operator, b: &Operator) -> Operator {
        let db = b.dim();
        let dim = a.dim() * db;
        let mut out = Operator::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] = a[(i / db, j / db)] * b[(i % db, j % db)];
            }
        }
        out
    }

    #[test]
    fn tensor_examples() {
        let ii = pauli_pair(PauliLabel::I, PauliLabel::I);
        assert_op_close(&ii, &Operator::identity(4), 0.0 + 1e-15);

        let zz = pauli_pair(PauliLabel::Z, PauliLabel::Z);
        assert_op_close(&zz, &Operator::diagonal_real(&[1.0, -1.0, -1.0, 1.0]).unwrap(), 1e-15);

        let xy = pauli_pair(PauliLabel::X, PauliLabel::Y);
        let mut expected = Operator::zeros(4);
        expected[(0, 3)] = c(0.0, -1.0);
        expected[(1, 2)] = c(0.0, 1.0);
        expected[(2, 1)] = c(0.0, -1.0);
        expected[(3, 0)] = c(0.0, 1.0);
        assert_op_close(&xy, &expected, 1e-15);
        assert_op_close(
            &xy,
            &kron_oracle(&Operator::pauli(PauliLabel::X), &Operator::pauli(PauliLabel::Y)),
            1e-15,
        );
    }

    #[test]
    fn tensor_rejects_oversized_register() {
        let a = Operator::identity(4);
        assert!(matches!(tensor(&a, &a), Err(Error::InvalidDimension(16))));
    }

    #[test]
    fn partial_trace_examples() {
        let r0 = partial_trace(&bell(), 0).unwrap();
        assert_op_close(r0.op(), &Operator::identity(2).scale_real(0.5), 1e-15);

        let s01 = DensityMatrix::basis(2, 0b01).unwrap();
        let r1 = partial_trace(&s01, 1).unwrap();
        assert_op_close(r1.op(), &Operator::diagonal_real(&[0.0, 1.0]).unwrap(), 1e-15);

        let ra = DensityMatrix::new(
            Operator::new(2, vec![c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]).unwrap(),
        )
        .unwrap();
        let rb = DensityMatrix::from_real_pure(&[0.6, 0.8]).unwrap();
        let prod = ra.tensor(&rb).unwrap();
        assert_op_close(partial_trace(&prod, 0).unwrap().op(), ra.op(), 1e-15);
        assert_op_close(partial_trace(&prod, 1).unwrap().op(), rb.op(), 1e-15);

        assert!(matches!(
            partial_trace(&bell(), 2),
            Err(Error::InvalidQubit { index: 2, .. })
        ));
    }

    #[test]
    fn partial_trace_three_qubits() {
        // |0⟩ ⊗ |1⟩ ⊗ |+⟩
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q0 = DensityMatrix::basis(1, 0).unwrap();
        let q1 = DensityMatrix::basis(1, 1).unwrap();
        let q2 = DensityMatrix::from_real_pure(&[s, s]).unwrap();
        let rho = q0.tensor(&q1).unwrap().tensor(&q2).unwrap();
        assert_op_close(partial_trace(&rho, 0).unwrap().op(), q0.op(), 1e-15);
        assert_op_close(partial_trace(&rho, 1).unwrap().op(), q1.op(), 1e-15);
        assert_op_close(partial_trace(&rho, 2).unwrap().op(), q2.op(), 1e-15);
    }

    #[test]
    fn partial_transpose_bell_spectrum() {
        for sub in 0..2 {
            let pt = partial_transpose(bell().op(), sub).unwrap();
            let vals = eig_hermitian(&pt).unwrap().values;
            let expected = [0.5, 0.5, 0.5, -0.5];
            for (v, e) in vals.iter().zip(expected) {
                assert!((v - e).abs() < 1e-12, "{vals:?}");
            }
        }
    }

    #[test]
    fn partial_transpose_relation_and_errors() {
        let rho = bell().mix(&DensityMatrix::basis(2, 1).unwrap(), 0.3).unwrap();
        let ta = partial_transpose(rho.op(), 0).unwrap();
        let tb = partial_transpose(rho.op(), 1).unwrap();
        assert_op_close(&ta, &tb.transpose(), 1e-15);
        assert!(partial_transpose(rho.op(), 2).is_err());
        assert!(partial_transpose(&Operator::identity(2), 0).is_err());
    }

    #[test]
    fn werner_min_eigenvalue_sweep() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            let w = bell().mix(&mixed, p).unwrap();
            let pt = partial_transpose(w.op(), 1).unwrap();
            let min = *eig_hermitian(&pt).unwrap().values.last().unwrap();
            assert!((min - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12, "p={p}: {min}");
        }
    }

    #[test]
    fn eig_examples() {
        let d = Operator::diagonal_real(&[0.3, 0.7]).unwrap();
        let e = eig_hermitian(&d).unwrap();
        assert!((e.values[0] - 0.7).abs() < 1e-15 && (e.values[1] - 0.3).abs() < 1e-15);

        let x = Operator::pauli(PauliLabel::X);
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = e.column(0);
        let overlap = (plus[0] * s + plus[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        let minus = e.column(1);
        let overlap = (minus[0] * s - minus[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-12);

        let nonherm = Operator::new(2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(eig_hermitian(&nonherm), Err(Error::NotHermitian(_))));
    }

    /// det(M − λI) by Gaussian elimination with partial pivoting.
    fn char_poly(m: &Operator, lambda: f64) -> f64 {
        let n = m.dim();
        let mut a: Vec<Complex64> = m.data().to_vec();
        for k in 0..n {
            a[k * n + k] -= lambda;
        }
        let mut det = ONE;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap();
            if a[piv * n + col].norm() == 0.0 {
                return 0.0;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det.re
    }

    /// Real roots of the characteristic polynomial by scan + bisection.
    fn char_poly_roots(m: &Operator) -> Vec<f64> {
        let bound = m.frobenius_norm() + 1.0;
        let steps = 200_000;
        let h = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = char_poly(m, x0);
        for k in 1..=steps {
            let x1 = -bound + k as f64 * h;
            let f1 = char_poly(m, x1);
            if f0 == 0.0 || f0.signum() != f1.signum() {
                let (mut lo, mut hi) = (x0, x1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if char_poly(m, lo).signum() == char_poly(m, mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        roots
    }

    #[test]
    fn eig_matches_characteristic_polynomial_roots() {
        // fixed random-looking Hermitian matrix with well separated eigenvalues
        let entries = [
            (0, 0, 1.3, 0.0),
            (0, 1, 0.2, -0.4),
            (0, 2, -0.5, 0.1),
            (0, 3, 0.05, 0.3),
            (1, 1, -0.7, 0.0),
            (1, 2, 0.3, 0.25),
            (1, 3, -0.2, 0.0),
            (2, 2, 0.4, 0.0),
            (2, 3, 0.6, -0.15),
            (3, 3, -1.9, 0.0),
        ];
        let mut m = Operator::zeros(4);
        for (r, cc, re, im) in entries {
            m[(r, cc)] = c(re, im);
            m[(cc, r)] = c(re, -im);
        }
        let eig = eig_hermitian(&m).unwrap();
        let roots = char_poly_roots(&m);
        assert_eq!(roots.len(), 4, "{roots:?}");
        for (v, r) in eig.values.iter().zip(&roots) {
            assert!((v - r).abs() < 1e-9, "{:?} vs {:?}", eig.values, roots);
        }
        assert!((&eig.reconstruct() - &m).max_abs() < 1e-10);
    }

    #[test]
    fn purity_examples() {
        assert!((bell().purity() - 1.0).abs() < 1e-15);
        assert!((DensityMatrix::maximally_mixed(2).unwrap().purity() - 0.25).abs() < 1e-15);
        let d = DensityMatrix::new(Operator::diagonal_real(&[0.75, 0.25]).unwrap()).unwrap();
        assert!((d.purity() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::diagonal_real(&[0.6, 0.6]).unwrap()).is_err());
        assert!(DensityMatrix::new(Operator::diagonal_real(&[1.2, -0.2]).unwrap()).is_err());
        let nonherm = Operator::new(2, vec![c(0.5, 0.0), c(0.1, 0.0), ZERO, c(0.5, 0.0)]).unwrap();
        assert!(DensityMatrix::new(nonherm).is_err());
        assert!(Operator::new(3, vec![ZERO; 9]).is_err());
        assert!(Operator::new(2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let rho = bell().mix(&DensityMatrix::maximally_mixed(2).unwrap(), 0.4).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        assert!(text.starts_with("[[["));
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        assert_op_close(back.op(), rho.op(), 1e-15);
        assert!(serde_json::from_str::<Operator>("[[[1,0],[0,0]],[[0,0]]]").is_err());
    }

    #[test]
    fn unitary_propagator_of_sigma_x() {
        let x = Operator::pauli(PauliLabel::X);
        let t = 0.37;
        let u = unitary_propagator(&x, t).unwrap();
        let expected = &Operator::identity(2).scale_real(t.cos()) - &x.scale(c(0.0, t.sin()));
        assert_op_close(&u, &expected, 1e-14);
    }
}
