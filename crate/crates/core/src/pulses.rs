// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian microwave pulses, ideal rotations and the named pulse sequences.
//!
//! Pulses are described in the rotating frame of their target qubit: the
//! carrier is absorbed by the frame and the phase `phi` selects the rotation
//! axis (`phi = 0` rotates about X, `phi = π/2` about Y).

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::qcore::Operator;

/// Default pulse width.
pub const DEFAULT_SIGMA_S: f64 = 10e-9;
/// Default truncation, in multiples of sigma on each side of the center.
pub const DEFAULT_TRUNCATION: f64 = 3.0;
/// Default calibrated π-pulse amplitude.
pub const DEFAULT_PI_AMPLITUDE: f64 = 0.095;

// relative slack used when checking lane overlap
const TIME_EPS: f64 = 1e-15;

/// A truncated Gaussian envelope `A·exp(−(t−t0)²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub amplitude: f64,
    #[serde(rename = "center_s")]
    pub center: f64,
    #[serde(rename = "sigma_s")]
    pub sigma: f64,
    /// Carrier angular frequency; only used by lab-frame models.
    #[serde(rename = "carrier_rad_s", default)]
    pub carrier: f64,
    #[serde(rename = "phase_rad", default)]
    pub phase: f64,
    /// Half-width of the window in units of sigma.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

fn default_truncation() -> f64 {
    DEFAULT_TRUNCATION
}

impl Default for GaussianPulse {
    fn default() -> Self {
        Self {
            amplitude: DEFAULT_PI_AMPLITUDE,
            center: DEFAULT_TRUNCATION * DEFAULT_SIGMA_S,
            sigma: DEFAULT_SIGMA_S,
            carrier: 0.0,
            phase: 0.0,
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

impl GaussianPulse {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("pulse sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse truncation must be > 0, got {}",
                self.truncation
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "pulse amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn half_width(&self) -> f64 {
        self.truncation * self.sigma
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.half_width()
    }

    /// `[t0 − kσ, t0 + kσ]`
    pub fn window(&self) -> (f64, f64) {
        (self.center - self.half_width(), self.center + self.half_width())
    }

    /// Same shape, centered so the window starts at `start`.
    pub fn starting_at(mut self, start: f64) -> Self {
        self.center = start + self.half_width();
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Envelope without the truncation window.
    pub(crate) fn gaussian(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.sigma;
        self.amplitude * (-0.5 * x * x).exp()
    }

    /// Integral of the truncated envelope divided by the amplitude, in seconds.
    pub fn unit_area(&self) -> f64 {
        self.sigma * (2.0 * PI).sqrt() * erf(self.truncation / SQRT_2)
    }

    /// Amplitude that produces a rotation of `theta` at the given drive constant.
    pub fn amplitude_for(&self, theta: f64, rabi_rate_per_amp: f64) -> f64 {
        theta / (rabi_rate_per_amp * self.unit_area())
    }
}

/// Envelope value at `t`; zero outside the truncation window.
pub fn envelope_value(p: &GaussianPulse, t: f64) -> f64 {
    let (lo, hi) = p.window();
    if t < lo || t > hi {
        0.0
    } else {
        p.gaussian(t)
    }
}

/// Rotation angle produced by `p` for a drive constant in rad/(s·a.u.).
pub fn pulse_theta(p: &GaussianPulse, rabi_rate_per_amp: f64) -> f64 {
    rabi_rate_per_amp * p.amplitude * p.unit_area()
}

/// `exp(−i(θ/2)(σx cosφ + σy sinφ))`
pub fn rotation_unitary(theta: f64, phi: f64) -> Operator {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    let minus_i_s = Complex64::new(0.0, -s);
    Operator::new(
        2,
        vec![
            c,
            minus_i_s * Complex64::from_polar(1.0, -phi),
            minus_i_s * Complex64::from_polar(1.0, phi),
            c,
        ],
    )
    .expect("2x2")
}

/// An instantaneous rotation by `theta` about the equatorial axis `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealRotation {
    #[serde(rename = "theta_rad")]
    pub theta: f64,
    #[serde(rename = "phi_rad")]
    pub phi: f64,
    pub target: usize,
}

impl IdealRotation {
    /// `theta` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64, target: usize) -> Self {
        Self {
            theta: theta.rem_euclid(2.0 * PI),
            phi,
            target,
        }
    }

    pub fn unitary(&self) -> Operator {
        rotation_unitary(self.theta, self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ScheduleItem {
    Gaussian(GaussianPulse),
    Rotation(IdealRotation),
    Idle {
        #[serde(rename = "duration_s")]
        duration: f64,
    },
}

impl ScheduleItem {
    pub fn duration(&self) -> f64 {
        match self {
            ScheduleItem::Gaussian(p) => p.duration(),
            ScheduleItem::Rotation(_) => 0.0,
            ScheduleItem::Idle { duration } => *duration,
        }
    }
}

/// One item placed on a qubit lane at an absolute start time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub qubit: usize,
    #[serde(rename = "start_s")]
    pub start: f64,
    #[serde(flatten)]
    pub item: ScheduleItem,
}

impl ScheduleEntry {
    pub fn end(&self) -> f64 {
        self.start + self.item.duration()
    }
}

/// Per-qubit, time-ordered lists of pulses, rotations and idle gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    lanes: Vec<Vec<ScheduleEntry>>,
    total_duration: f64,
}

impl PulseSchedule {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            lanes: vec![Vec::new(); n_qubits],
            total_duration: 0.0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.lanes.len()
    }

    /// Appends an item at `start`; items on a lane must not overlap.
    pub fn push(&mut self, qubit: usize, start: f64, item: ScheduleItem) -> Result<&mut Self> {
        let n = self.lanes.len();
        let lane = self
            .lanes
            .get_mut(qubit)
            .ok_or(Error::InvalidQubit { index: qubit, n_qubits: n })?;
        if !(start >= 0.0 && start.is_finite()) {
            return Err(Error::InvalidSchedule(format!("start time {start} must be finite and >= 0")));
        }
        match &item {
            ScheduleItem::Gaussian(p) => {
                p.validate()?;
                let (lo, _) = p.window();
                if (lo - start).abs() > TIME_EPS.max(start.abs() * 1e-12) {
                    return Err(Error::InvalidSchedule(format!(
                        "pulse window starts at {lo:e} but the entry starts at {start:e}"
                    )));
                }
            }
            ScheduleItem::Rotation(r) => {
                if r.target != qubit {
                    return Err(Error::InvalidSchedule(format!(
                        "rotation targets qubit {} but was placed on lane {qubit}",
                        r.target
                    )));
                }
            }
            ScheduleItem::Idle { duration } => {
                if !(*duration >= 0.0 && duration.is_finite()) {
                    return Err(Error::InvalidSchedule(format!("idle duration {duration} must be >= 0")));
                }
            }
        }
        if let Some(last) = lane.last() {
            let slack = TIME_EPS.max(last.end().abs() * 1e-12);
            if start + slack < last.end() {
                return Err(Error::InvalidSchedule(format!(
                    "item at {start:e} s overlaps previous item ending at {:e} s on qubit {qubit}",
                    last.end()
                )));
            }
        }
        let entry = ScheduleEntry { qubit, start, item };
        self.total_duration = self.total_duration.max(entry.end());
        lane.push(entry);
        Ok(self)
    }

    /// Appends an item directly after the last one on the lane.
    pub fn append(&mut self, qubit: usize, item: ScheduleItem) -> Result<&mut Self> {
        let start = self.lane_end(qubit);
        let item = match item {
            ScheduleItem::Gaussian(p) => ScheduleItem::Gaussian(p.starting_at(start)),
            other => other,
        };
        self.push(qubit, start, item)
    }

    pub fn lane_end(&self, qubit: usize) -> f64 {
        self.lanes
            .get(qubit)
            .and_then(|l| l.last())
            .map(|e| e.end())
            .unwrap_or(0.0)
    }

    /// Extends the schedule span; it can never shrink below the last item.
    pub fn set_total_duration(&mut self, total: f64) -> Result<()> {
        let needed = (0..self.lanes.len()).map(|q| self.lane_end(q)).fold(0.0, f64::max);
        if total + TIME_EPS < needed {
            return Err(Error::InvalidSchedule(format!(
                "total duration {total:e} s is shorter than the scheduled items ({needed:e} s)"
            )));
        }
        self.total_duration = total.max(needed);
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.total_duration
    }

    pub fn lane(&self, qubit: usize) -> &[ScheduleEntry] {
        &self.lanes[qubit]
    }

    pub fn entries(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.lanes.iter().flatten()
    }

    /// Gaussian pulses whose window contains `t` (inclusive).
    pub fn active_pulses(&self, t: f64) -> impl Iterator<Item = (usize, &GaussianPulse)> {
        self.entries().filter_map(move |e| match &e.item {
            ScheduleItem::Gaussian(p) => {
                let (lo, hi) = p.window();
                (t >= lo && t <= hi).then_some((e.qubit, p))
            }
            _ => None,
        })
    }

    /// Checks the non-overlap invariant on every lane.
    pub fn validate(&self) -> Result<()> {
        for (q, lane) in self.lanes.iter().enumerate() {
            for pair in lane.windows(2) {
                if pair[1].start + TIME_EPS.max(pair[0].end() * 1e-12) < pair[0].end() {
                    return Err(Error::InvalidSchedule(format!("overlapping items on qubit {q}")));
                }
            }
            let busy: f64 = lane.iter().map(|e| e.item.duration()).sum();
            if busy > self.total_duration * (1.0 + 1e-12) + TIME_EPS {
                return Err(Error::InvalidSchedule(format!(
                    "qubit {q} items last {busy:e} s, longer than the schedule"
                )));
            }
        }
        Ok(())
    }

    /// Flat list of entries, ordered by qubit then time.
    pub fn to_entries(&self) -> Vec<ScheduleEntry> {
        self.entries().copied().collect()
    }

    pub fn from_entries(n_qubits: usize, entries: &[ScheduleEntry]) -> Result<Self> {
        let mut sorted = entries.to_vec();
        sorted.sort_by(|a, b| a.qubit.cmp(&b.qubit).then(a.start.total_cmp(&b.start)));
        let mut s = Self::new(n_qubits);
        for e in sorted {
            s.push(e.qubit, e.start, e.item)?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.to_entries())
    }
}

/// The named sequences, parameterized by the free-evolution time per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    Ramsey {
        #[serde(rename = "tau_s")]
        tau: f64,
    },
    HahnEcho {
        #[serde(rename = "tau_s")]
        tau: f64,
    },
    NuclearImpurity {
        #[serde(rename = "tau_s")]
        tau: f64,
    },
    NvNvImpurity {
        #[serde(rename = "tau_s")]
        tau: f64,
    },
}

impl SequenceKind {
    pub fn tau(&self) -> f64 {
        match *self {
            SequenceKind::Ramsey { tau }
            | SequenceKind::HahnEcho { tau }
            | SequenceKind::NuclearImpurity { tau }
            | SequenceKind::NvNvImpurity { tau } => tau,
        }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        match self {
            SequenceKind::Ramsey { .. } => SequenceKind::Ramsey { tau },
            SequenceKind::HahnEcho { .. } => SequenceKind::HahnEcho { tau },
            SequenceKind::NuclearImpurity { .. } => SequenceKind::NuclearImpurity { tau },
            SequenceKind::NvNvImpurity { .. } => SequenceKind::NvNvImpurity { tau },
        }
    }

    /// Total free-precession time of the sensor for this `tau`.
    pub fn free_evolution(&self) -> f64 {
        match self {
            SequenceKind::Ramsey { tau } => *tau,
            _ => 2.0 * self.tau(),
        }
    }

    /// Inverse of [`free_evolution`](Self::free_evolution).
    pub fn from_free_evolution(self, total: f64) -> Self {
        match self {
            SequenceKind::Ramsey { .. } => self.with_tau(total),
            _ => self.with_tau(total / 2.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SequenceKind::Ramsey { .. } => "ramsey",
            SequenceKind::HahnEcho { .. } => "hahn_echo",
            SequenceKind::NuclearImpurity { .. } => "nuclear_impurity",
            SequenceKind::NvNvImpurity { .. } => "nv_nv_impurity",
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            SequenceKind::Ramsey { .. } | SequenceKind::HahnEcho { .. } => 1,
            _ => 2,
        }
    }
}

/// Rotation-axis phases of a Hahn echo: (preparation, refocusing, readout).
#[derive(Debug, Clone, Copy)]
struct EchoPhases {
    prepare: f64,
    refocus: f64,
    readout: f64,
}

// The refocusing π pulse acts about Y so that the echo of |0⟩ ends in |1⟩.
const SENSOR_ECHO: EchoPhases = EchoPhases {
    prepare: 0.0,
    refocus: FRAC_PI_2,
    readout: 0.0,
};

fn push_echo(s: &mut PulseSchedule, qubit: usize, pi_pulse: &GaussianPulse, tau: f64, ph: EchoPhases) -> Result<()> {
    let half = pi_pulse.with_amplitude(pi_pulse.amplitude / 2.0);
    s.append(qubit, ScheduleItem::Gaussian(half.with_phase(ph.prepare)))?;
    s.append(qubit, ScheduleItem::Idle { duration: tau })?;
    s.append(qubit, ScheduleItem::Gaussian(pi_pulse.with_phase(ph.refocus)))?;
    s.append(qubit, ScheduleItem::Idle { duration: tau })?;
    s.append(qubit, ScheduleItem::Gaussian(half.with_phase(ph.readout)))?;
    Ok(())
}

/// Builds a named sequence. `template` carries the π-pulse amplitude and
/// shape; π/2 pulses use half the amplitude.
///
/// The returned schedule always spans two qubits (sensor = 0, impurity = 1)
/// for the impurity sequences and one qubit for Ramsey and Hahn echo.
pub fn build_sequence(kind: SequenceKind, template: &GaussianPulse) -> Result<PulseSchedule> {
    template.validate()?;
    let tau = kind.tau();
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("sequence delay must be >= 0, got {tau}")));
    }
    let pi_pulse = template.with_phase(0.0);
    let half = pi_pulse.with_amplitude(pi_pulse.amplitude / 2.0);
    let mut s = PulseSchedule::new(kind.n_qubits());
    match kind {
        SequenceKind::Ramsey { tau } => {
            s.append(0, ScheduleItem::Gaussian(half))?;
            s.append(0, ScheduleItem::Idle { duration: tau })?;
            s.append(0, ScheduleItem::Gaussian(half))?;
        }
        SequenceKind::HahnEcho { tau } => {
            push_echo(&mut s, 0, &pi_pulse, tau, SENSOR_ECHO)?;
        }
        SequenceKind::NuclearImpurity { tau } => {
            push_echo(&mut s, 0, &pi_pulse, tau, SENSOR_ECHO)?;
            s.append(1, ScheduleItem::Gaussian(pi_pulse))?;
            let rest = s.lane_end(0) - s.lane_end(1);
            s.append(1, ScheduleItem::Idle { duration: rest.max(0.0) })?;
        }
        SequenceKind::NvNvImpurity { tau } => {
            // |+⟩ = U(π/2, π/2)|0⟩ on the sensor, |−⟩ = U(π/2, −π/2)|0⟩ on the impurity
            let sensor = EchoPhases {
                prepare: FRAC_PI_2,
                refocus: FRAC_PI_2,
                readout: FRAC_PI_2,
            };
            let impurity = EchoPhases {
                prepare: -FRAC_PI_2,
                refocus: FRAC_PI_2,
                readout: -FRAC_PI_2,
            };
            push_echo(&mut s, 0, &pi_pulse, tau, sensor)?;
            push_echo(&mut s, 1, &pi_pulse, tau, impurity)?;
        }
    }
    Ok(s)
}
