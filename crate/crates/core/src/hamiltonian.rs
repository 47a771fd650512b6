// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! NV level structure and the rotating-frame register Hamiltonian.
//!
//! The register Hamiltonian is
//!
//! ```text
//! H(t) = Σ_q (δ_q/2) Z_q
//!      + Σ_pairs [ (J/4) Z⊗Z − A_ex (X⊗X + Y⊗Y) ]
//!      + Σ_pulses (Ω(t)/2) (X cosφ + Y sinφ)
//! ```
//!
//! with `Ω(t) = rabi_rate_per_amp · envelope(t)`. The exchange sign and scale
//! make `|+−⟩` evolve into `cos(A t)|+−⟩ + i sin(A t)|−+⟩` (up to a global
//! phase), so maximal entanglement first appears at `t = π/(4A)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pulses::{GaussianPulse, PulseSchedule, ScheduleItem};
use crate::qcore::{eig_hermitian, Operator, PauliLabel};

/// Zero-field splitting of the NV ground state, 2π·2.87 GHz.
pub const NV_ZERO_FIELD_SPLITTING: f64 = 2.0 * PI * 2.87e9;

/// Spin-1 ground state `H = D S_z² + μB S_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvSpinModel {
    /// Zero-field splitting D, rad/s.
    pub zero_field_splitting: f64,
    /// Zeeman term μB, rad/s.
    pub zeeman: f64,
}

impl Default for NvSpinModel {
    fn default() -> Self {
        Self {
            zero_field_splitting: NV_ZERO_FIELD_SPLITTING,
            zeeman: 0.0,
        }
    }
}

impl NvSpinModel {
    pub fn new(zero_field_splitting: f64, zeeman: f64) -> Result<Self> {
        if !(zero_field_splitting > 0.0 && zero_field_splitting.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "zero-field splitting must be > 0, got {zero_field_splitting}"
            )));
        }
        Ok(Self {
            zero_field_splitting,
            zeeman,
        })
    }

    /// Energies of m_s = −1, 0, +1 (rad/s).
    pub fn level_energies(&self) -> [f64; 3] {
        let d = self.zero_field_splitting;
        let b = self.zeeman;
        [d - b, 0.0, d + b]
    }

    /// Frequency of the |0⟩ ↔ |−1⟩ transition used as the sensing qubit.
    pub fn effective_qubit_frequency(&self) -> f64 {
        nv_transition_frequencies(self).1
    }
}

/// `(|0⟩↔|+1⟩, |0⟩↔|−1⟩)` transition frequencies in rad/s.
pub fn nv_transition_frequencies(m: &NvSpinModel) -> (f64, f64) {
    let [minus, zero, plus] = m.level_energies();
    (plus - zero, minus - zero)
}

/// Two-body coupling on a pair of qubits (angular frequencies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub pair: (usize, usize),
    /// ZZ strength J, rad/s.
    pub zz: f64,
    /// Exchange (flip-flop) strength A_ex, rad/s.
    pub exchange: f64,
}

/// Relaxation (T1) and pure-dephasing (Tphi) times; `f64::INFINITY` disables
/// a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub t1: f64,
    pub tphi: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            t1: f64::INFINITY,
            tphi: f64::INFINITY,
        }
    }

    /// From T1 and the echo coherence time, using 1/T2 = 1/(2T1) + 1/Tphi.
    pub fn from_t2(t1: f64, t2: f64) -> Result<Self> {
        let rate = 1.0 / t2 - 0.5 / t1;
        if !(t2 > 0.0) || rate < -1e-15 {
            return Err(Error::InvalidArgument(format!(
                "T2 = {t2:e} s is incompatible with T1 = {t1:e} s (requires T2 <= 2 T1)"
            )));
        }
        Ok(Self {
            t1,
            tphi: if rate <= 0.0 { f64::INFINITY } else { 1.0 / rate },
        })
    }

    pub fn gamma1(&self) -> f64 {
        1.0 / self.t1
    }

    pub fn gamma_phi(&self) -> f64 {
        1.0 / self.tphi
    }

    pub fn t2(&self) -> f64 {
        1.0 / (0.5 * self.gamma1() + self.gamma_phi())
    }
}

/// Register description shared by the simulator, calibration and harness.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub n_qubits: usize,
    /// Drive (rotating-frame) frequency of each qubit, Hz.
    pub frame_freq_hz: Vec<f64>,
    /// Qubit frequency minus frame frequency, rad/s.
    pub detunings: Vec<f64>,
    pub couplings: Vec<CouplingSpec>,
    pub noise: Vec<NoiseSpec>,
    /// Rabi angular frequency per unit drive amplitude, rad/(s·a.u.).
    pub rabi_rate_per_amp: f64,
}

impl SystemSpec {
    /// A noiseless, uncoupled, on-resonance register whose default Gaussian
    /// pulse at amplitude 0.095 is a π rotation.
    pub fn new(n_qubits: usize) -> Self {
        let template = GaussianPulse::default();
        Self {
            n_qubits,
            frame_freq_hz: vec![0.0; n_qubits],
            detunings: vec![0.0; n_qubits],
            couplings: Vec::new(),
            noise: vec![NoiseSpec::noiseless(); n_qubits],
            rabi_rate_per_amp: PI / (template.amplitude * template.unit_area()),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn with_detuning(mut self, qubit: usize, detuning: f64) -> Self {
        self.detunings[qubit] = detuning;
        self
    }

    pub fn with_noise(mut self, qubit: usize, noise: NoiseSpec) -> Self {
        self.noise[qubit] = noise;
        self
    }

    pub fn with_coupling(mut self, c: CouplingSpec) -> Self {
        self.couplings.push(c);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "register must have 1 to 3 qubits, got {}",
                self.n_qubits
            )));
        }
        let n = self.n_qubits;
        for (name, len) in [
            ("detunings", self.detunings.len()),
            ("noise", self.noise.len()),
            ("frame_freq_hz", self.frame_freq_hz.len()),
        ] {
            if len != n {
                return Err(Error::InvalidArgument(format!("{name} has {len} entries for {n} qubits")));
            }
        }
        if self.detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("detunings must be finite".into()));
        }
        for c in &self.couplings {
            let (a, b) = c.pair;
            if a == b || a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("invalid coupling pair ({a}, {b})")));
            }
            if !c.zz.is_finite() || !c.exchange.is_finite() {
                return Err(Error::InvalidArgument("coupling strengths must be finite".into()));
            }
        }
        for (q, ns) in self.noise.iter().enumerate() {
            if !(ns.t1 > 0.0) || !(ns.tphi > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "qubit {q}: T1 and Tphi must be > 0 (or infinite)"
                )));
            }
        }
        if !(self.rabi_rate_per_amp >= 0.0 && self.rabi_rate_per_amp.is_finite()) {
            return Err(Error::InvalidArgument("rabi_rate_per_amp must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// π-pulse template for this register's drive constant.
    pub fn pi_pulse(&self, shape: &GaussianPulse) -> GaussianPulse {
        shape.with_amplitude(shape.amplitude_for(PI, self.rabi_rate_per_amp))
    }

    /// Copy restricted to a single qubit (no couplings), for per-qubit calibration.
    pub fn single_qubit(&self, q: usize) -> Self {
        Self {
            n_qubits: 1,
            frame_freq_hz: vec![self.frame_freq_hz[q]],
            detunings: vec![self.detunings[q]],
            couplings: Vec::new(),
            noise: vec![self.noise[q]],
            rabi_rate_per_amp: self.rabi_rate_per_amp,
        }
    }
}

/// Precomputed operators for fast evaluation of H(t).
#[derive(Debug, Clone)]
pub struct RegisterHamiltonian {
    pub(crate) n_qubits: usize,
    pub(crate) static_part: Operator,
    x_ops: Vec<Operator>,
    y_ops: Vec<Operator>,
    rabi_rate_per_amp: f64,
}

impl RegisterHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn new(spec: &SystemSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_qubits;
        let dim = spec.dim();
        let embed = |p: PauliLabel, q: usize| Operator::embed(&Operator::pauli(p), q, n);
        let mut h = Operator::zeros(dim);
        for (q, &d) in spec.detunings.iter().enumerate() {
            h.add_scaled(&embed(PauliLabel::Z, q)?, Complex64::new(d / 2.0, 0.0));
        }
        for c in &spec.couplings {
            let (a, b) = c.pair;
            let pair = |p: PauliLabel| -> Result<Operator> { Ok(&embed(p, a)? * &embed(p, b)?) };
            h.add_scaled(&pair(PauliLabel::Z)?, Complex64::new(c.zz / 4.0, 0.0));
            h.add_scaled(&pair(PauliLabel::X)?, Complex64::new(-c.exchange, 0.0));
            h.add_scaled(&pair(PauliLabel::Y)?, Complex64::new(-c.exchange, 0.0));
        }
        let x_ops = (0..n).map(|q| embed(PauliLabel::X, q)).collect::<Result<_>>()?;
        let y_ops = (0..n).map(|q| embed(PauliLabel::Y, q)).collect::<Result<_>>()?;
        Ok(Self {
            n_qubits: n,
            static_part: h,
            x_ops,
            y_ops,
            rabi_rate_per_amp: spec.rabi_rate_per_amp,
        })
    }

    pub fn static_part(&self) -> &Operator {
        &self.static_part
    }

    /// Writes H(t) into `out` for the given drives, ignoring truncation
    /// windows (callers pass only pulses active on the current segment).
    pub(crate) fn eval_into(&self, drives: &[(usize, GaussianPulse)], t: f64, out: &mut Operator) {
        out.data_mut().copy_from_slice(self.static_part.data());
        for (q, p) in drives {
            let half_omega = 0.5 * self.rabi_rate_per_amp * p.gaussian(t);
            let (s, c) = p.phase.sin_cos();
            out.add_scaled(&self.x_ops[*q], Complex64::new(half_omega * c, 0.0));
            out.add_scaled(&self.y_ops[*q], Complex64::new(half_omega * s, 0.0));
        }
    }

    /// Peak Rabi angular frequency of a pulse.
    pub(crate) fn peak_rabi(&self, p: &GaussianPulse) -> f64 {
        self.rabi_rate_per_amp * p.amplitude
    }

    /// Spread of the static spectrum, rad/s.
    pub fn static_bandwidth(&self) -> f64 {
        match eig_hermitian(&self.static_part) {
            Ok(e) => e.values[0] - e.values[e.values.len() - 1],
            Err(_) => self.static_part.frobenius_norm(),
        }
    }
}

/// H(t) for `spec` driven by `schedule`.
pub fn build_hamiltonian(spec: &SystemSpec, schedule: &PulseSchedule, t: f64) -> Result<Operator> {
    if schedule.n_qubits() > spec.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: spec.n_qubits,
            got: schedule.n_qubits(),
        });
    }
    let end = schedule.duration();
    if !(0.0..=end).contains(&t) {
        return Err(Error::TimeOutOfRange { t, end });
    }
    let model = RegisterHamiltonian::new(spec)?;
    let drives: Vec<(usize, GaussianPulse)> = schedule.active_pulses(t).map(|(q, p)| (q, *p)).collect();
    let mut out = Operator::zeros(spec.dim());
    model.eval_into(&drives, t, &mut out);
    // ideal rotations are instantaneous and do not enter H(t)
    debug_assert!(schedule
        .entries()
        .all(|e| !matches!(e.item, ScheduleItem::Rotation(_)) || e.item.duration() == 0.0));
    Ok(out)
}
