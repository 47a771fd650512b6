// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulated single-qubit calibration: frequency sweep, Rabi amplitude
//! sweep, readout discriminator training and Ramsey refinement.
//!
//! The simulated device is the `SystemSpec` passed in: its detunings are the
//! hidden truth the pipeline tries to remove. Each step only sees sweep data
//! produced by the simulator.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, IntegratorConfig, Lindbladian};
use crate::error::{Error, Result};
use crate::fit::{fit_cosine, fit_damped_sinusoid, fit_lorentzian, FitFlag, FitResult, SweepData};
use crate::hamiltonian::SystemSpec;
use crate::measurement::{simulate_iq_with, train_discriminator, Discriminator, IQModel};
use crate::pulses::{build_sequence, GaussianPulse, PulseSchedule, ScheduleItem, SequenceKind};
use crate::qcore::{DensityMatrix, Operator, PauliLabel};

pub use crate::fit::{fit_exponential, FitModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    /// Half-width of the frequency sweep around the current frame, Hz.
    pub sweep_half_span_hz: f64,
    pub sweep_points: usize,
    /// Rabi frequency of the continuous spectroscopy tone, Hz.
    pub spectroscopy_rabi_hz: f64,
    /// Largest amplitude of the Rabi sweep, a.u.
    pub rabi_max_amplitude: f64,
    pub rabi_points: usize,
    /// Longest Ramsey delay, seconds.
    pub ramsey_max_delay_s: f64,
    pub ramsey_points: usize,
    /// Virtual detuning imprinted through the phase of the second π/2 pulse.
    pub ramsey_offset_hz: f64,
    /// Gaussian noise on sweep signals, as a fraction of the signal span.
    pub noise_level: f64,
    pub iq: IQModel,
    /// Training shots per class for the discriminator.
    pub training_shots: usize,
    /// Readout shots per Ramsey point.
    pub readout_shots: usize,
    pub pulse: GaussianPulse,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            sweep_half_span_hz: 10e6,
            sweep_points: 201,
            spectroscopy_rabi_hz: 1e6,
            rabi_max_amplitude: 0.3,
            rabi_points: 61,
            ramsey_max_delay_s: 2e-6,
            ramsey_points: 101,
            ramsey_offset_hz: 5e6,
            noise_level: 0.01,
            iq: IQModel::default(),
            training_shots: 2000,
            readout_shots: 2000,
            pulse: GaussianPulse::default(),
            seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sweep_half_span_hz", self.sweep_half_span_hz),
            ("spectroscopy_rabi_hz", self.spectroscopy_rabi_hz),
            ("rabi_max_amplitude", self.rabi_max_amplitude),
            ("ramsey_max_delay_s", self.ramsey_max_delay_s),
            ("ramsey_offset_hz", self.ramsey_offset_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(Error::config("noise_level", "must be >= 0"));
        }
        for (name, n) in [
            ("sweep_points", self.sweep_points),
            ("rabi_points", self.rabi_points),
            ("ramsey_points", self.ramsey_points),
        ] {
            if n < 8 {
                return Err(Error::config(name, format!("need at least 8 points, got {n}")));
            }
        }
        if self.training_shots == 0 || self.readout_shots == 0 {
            return Err(Error::config("readout_shots", "shot counts must be > 0"));
        }
        self.iq.validate()?;
        self.pulse.validate()?;
        Ok(())
    }
}

/// Calibration outcome for one qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub qubit: usize,
    pub initial_frame_hz: f64,
    /// Fitted resonance of the frequency sweep.
    pub resonance_hz: f64,
    pub lorentzian: FitResult,
    pub pi_amplitude: f64,
    pub rabi: FitResult,
    pub discriminator: Discriminator,
    pub assignment_fidelity: f64,
    pub ramsey: FitResult,
    pub ramsey_offset_hz: f64,
    /// Final frame minus initial frame.
    pub estimated_detuning_hz: f64,
    pub calibrated_frame_hz: f64,
    /// Qubit frequency minus calibrated frame; known only because the
    /// device is simulated.
    pub residual_detuning_hz: f64,
    #[serde(skip)]
    pub sweeps: CalibrationSweeps,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationSweeps {
    pub frequency: Option<SweepData>,
    pub rabi: Option<SweepData>,
    pub ramsey: Option<SweepData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub schema: String,
    pub qubits: Vec<QubitCalibration>,
    pub rabi_rate_per_amp: f64,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub spec: SystemSpec,
    pub report: CalibrationReport,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn add_noise(y: &mut [f64], level: f64, rng: &mut ChaCha20Rng) {
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let sigma = level * (hi - lo).max(f64::MIN_POSITIVE);
    if sigma > 0.0 {
        let n = Normal::new(0.0, sigma).expect("sigma > 0");
        for v in y {
            *v += n.sample(rng);
        }
    }
}

fn excited_population(rho: &DensityMatrix) -> f64 {
    rho.op()[(1, 1)].re.clamp(0.0, 1.0)
}

/// Steady-state excited population under a continuous tone at `drive_hz`.
///
/// Uses the rotating-wave steady state of the single-qubit master equation;
/// as a function of the tone frequency it is an exact Lorentzian of FWHM
/// `√(1 + Ω²T1T2)/(πT2)`.
pub fn frequency_sweep(
    qubit: &SystemSpec,
    true_freq_hz: f64,
    drives_hz: &[f64],
    rabi_hz: f64,
) -> Result<SweepData> {
    let omega = 2.0 * PI * rabi_hz;
    let y = drives_hz
        .par_iter()
        .map(|&fd| {
            let spec = SystemSpec {
                detunings: vec![2.0 * PI * (true_freq_hz - fd)],
                ..qubit.clone()
            };
            let model = Lindbladian::new(&spec)?;
            let mut h = model.hamiltonian().static_part().clone();
            h.add_scaled(&Operator::pauli(PauliLabel::X), (0.5 * omega).into());
            Ok(excited_population(&model.steady_state(&h)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    SweepData::new(drives_hz.to_vec(), y)
}

/// Excited population after a single pulse of each amplitude, from |0⟩.
pub fn rabi_sweep(qubit: &SystemSpec, pulse: &GaussianPulse, amplitudes: &[f64]) -> Result<SweepData> {
    let cfg = IntegratorConfig::for_spec(qubit)?;
    let rho0 = DensityMatrix::basis(1, 0)?;
    let y = amplitudes
        .par_iter()
        .map(|&a| {
            let mut s = PulseSchedule::new(1);
            s.push(0, 0.0, ScheduleItem::Gaussian(pulse.with_amplitude(a).starting_at(0.0)))?;
            Ok(excited_population(evolve(&rho0, &s, qubit, &cfg)?.final_state()))
        })
        .collect::<Result<Vec<f64>>>()?;
    SweepData::new(amplitudes.to_vec(), y)
}

/// Ramsey schedule whose second π/2 pulse is phase-advanced by
/// `2π·offset_hz·τ`, which makes the fringe oscillate at
/// `|offset_hz − δ/2π|` for a qubit detuned by δ.
pub fn ramsey_schedule(pi_pulse: &GaussianPulse, tau: f64, offset_hz: f64) -> Result<PulseSchedule> {
    let base = build_sequence(SequenceKind::Ramsey { tau }, pi_pulse)?;
    let mut entries = base.to_entries();
    if let Some(last) = entries
        .iter_mut()
        .rev()
        .find(|e| matches!(e.item, ScheduleItem::Gaussian(_)))
    {
        if let ScheduleItem::Gaussian(p) = &mut last.item {
            p.phase += 2.0 * PI * offset_hz * tau;
        }
    }
    PulseSchedule::from_entries(1, &entries)
}

/// Excited population after each Ramsey delay, without readout noise.
pub fn ramsey_populations(
    qubit: &SystemSpec,
    pi_pulse: &GaussianPulse,
    delays: &[f64],
    offset_hz: f64,
) -> Result<Vec<f64>> {
    let cfg = IntegratorConfig::for_spec(qubit)?;
    let rho0 = DensityMatrix::basis(1, 0)?;
    delays
        .par_iter()
        .map(|&tau| {
            let s = ramsey_schedule(pi_pulse, tau, offset_hz)?;
            Ok(excited_population(evolve(&rho0, &s, qubit, &cfg)?.final_state()))
        })
        .collect()
}

fn step_err(step: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Calibration {
        step,
        reason: e.to_string(),
    }
}

fn calibrate_qubit(spec: &SystemSpec, q: usize, cfg: &CalibrationConfig) -> Result<QubitCalibration> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(q as u64);
    let truth = spec.single_qubit(q);
    let initial_frame = truth.frame_freq_hz[0];
    let true_freq = initial_frame + truth.detunings[0] / (2.0 * PI);

    // frequency sweep
    let drives = linspace(
        initial_frame - cfg.sweep_half_span_hz,
        initial_frame + cfg.sweep_half_span_hz,
        cfg.sweep_points,
    );
    let mut sweep = frequency_sweep(&truth, true_freq, &drives, cfg.spectroscopy_rabi_hz)?;
    add_noise(&mut sweep.y, cfg.noise_level, &mut rng);
    let lorentzian = fit_lorentzian(&sweep, None).map_err(step_err("frequency"))?;
    if lorentzian.has_flag(FitFlag::Degenerate) {
        return Err(Error::Calibration {
            step: "frequency",
            reason: "no resonance found in the swept range".into(),
        });
    }
    let resonance = lorentzian.param("center");
    let mut device = truth.clone();
    device.frame_freq_hz[0] = resonance;
    device.detunings[0] = 2.0 * PI * (true_freq - resonance);

    // Rabi amplitude sweep
    let amps = linspace(0.0, cfg.rabi_max_amplitude, cfg.rabi_points);
    let mut rabi_data = rabi_sweep(&device, &cfg.pulse, &amps)?;
    add_noise(&mut rabi_data.y, cfg.noise_level, &mut rng);
    let rabi = fit_cosine(&rabi_data, None).map_err(step_err("rabi"))?;
    if rabi.has_flag(FitFlag::Degenerate) || rabi.param("amplitude") < 0.05 {
        return Err(Error::Calibration {
            step: "rabi",
            reason: format!(
                "no Rabi oscillation in amplitude sweep (fitted contrast {:.3e})",
                rabi.param("amplitude")
            ),
        });
    }
    let pi_amplitude = rabi.pi_amplitude().expect("cosine fit");
    let pi_pulse = cfg.pulse.with_amplitude(pi_amplitude);

    // discriminator training on prepared |0⟩ and π-pulsed states
    let p_pi = rabi_sweep(&device, &cfg.pulse, &[pi_amplitude])?.y[0];
    let reference = cfg.iq.discriminator();
    let ground = simulate_iq_with(0.0, &cfg.iq, &reference, cfg.training_shots, &mut rng)?;
    let excited = simulate_iq_with(p_pi, &cfg.iq, &reference, cfg.training_shots, &mut rng)?;
    let discriminator =
        train_discriminator(&ground.points, &excited.points).map_err(step_err("discriminator"))?;
    let correct0 = ground.points.iter().filter(|p| discriminator.classify(**p) == 0).count();
    let correct1 = excited.points.iter().filter(|p| discriminator.classify(**p) == 1).count();
    let assignment_fidelity = 0.5 * (correct0 + correct1) as f64 / cfg.training_shots as f64;

    // Ramsey refinement, read out through the trained discriminator
    let delays = linspace(0.0, cfg.ramsey_max_delay_s, cfg.ramsey_points);
    let pops = ramsey_populations(&device, &pi_pulse, &delays, cfg.ramsey_offset_hz)?;
    let mut signal = Vec::with_capacity(pops.len());
    for p in pops {
        let shots = simulate_iq_with(p, &cfg.iq, &discriminator, cfg.readout_shots, &mut rng)?;
        signal.push(shots.excited_fraction());
    }
    let ramsey_data = SweepData::new(delays, signal)?;
    let ramsey = fit_damped_sinusoid(&ramsey_data, None).map_err(step_err("ramsey"))?;
    if ramsey.has_flag(FitFlag::Degenerate) {
        return Err(Error::Calibration {
            step: "ramsey",
            reason: "no Ramsey fringe".into(),
        });
    }
    let residual_estimate = cfg.ramsey_offset_hz - ramsey.param("frequency");
    let calibrated_frame = resonance + residual_estimate;

    Ok(QubitCalibration {
        qubit: q,
        initial_frame_hz: initial_frame,
        resonance_hz: resonance,
        lorentzian,
        pi_amplitude,
        rabi,
        discriminator,
        assignment_fidelity,
        ramsey,
        ramsey_offset_hz: cfg.ramsey_offset_hz,
        estimated_detuning_hz: calibrated_frame - initial_frame,
        calibrated_frame_hz: calibrated_frame,
        residual_detuning_hz: true_freq - calibrated_frame,
        sweeps: CalibrationSweeps {
            frequency: Some(sweep),
            rabi: Some(rabi_data),
            ramsey: Some(ramsey_data),
        },
    })
}

/// Runs the four-step pipeline on every qubit and writes the calibrated
/// frame frequencies, remaining detunings and drive constant back.
pub fn run_calibration(spec: &SystemSpec, cfg: &CalibrationConfig) -> Result<Calibration> {
    spec.validate()?;
    cfg.validate()?;
    let qubits = (0..spec.n_qubits)
        .into_par_iter()
        .map(|q| calibrate_qubit(spec, q, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut out = spec.clone();
    for c in &qubits {
        out.frame_freq_hz[c.qubit] = c.calibrated_frame_hz;
        out.detunings[c.qubit] = 2.0 * PI * c.residual_detuning_hz;
    }
    let mean_pi = qubits.iter().map(|c| c.pi_amplitude).sum::<f64>() / qubits.len() as f64;
    out.rabi_rate_per_amp = PI / (mean_pi * cfg.pulse.unit_area());
    Ok(Calibration {
        report: CalibrationReport {
            schema: "calibration-v1".into(),
            qubits,
            rabi_rate_per_amp: out.rabi_rate_per_amp,
        },
        spec: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::NoiseSpec;

    fn device(detuning_hz: f64) -> SystemSpec {
        let mut s = SystemSpec::new(1).with_noise(0, NoiseSpec::from_t2(40e-6, 30e-6).unwrap());
        s.frame_freq_hz[0] = 4.962e9;
        s.detunings[0] = 2.0 * PI * detuning_hz;
        s
    }

    #[test]
    fn steady_state_line_is_lorentzian() {
        let spec = device(0.0);
        let (t1, t2) = (spec.noise[0].t1, spec.noise[0].t2());
        let rabi_hz = 1e6;
        let drives = linspace(4.952e9, 4.972e9, 101);
        let d = frequency_sweep(&spec, 4.962e9, &drives, rabi_hz).unwrap();
        let fit = fit_lorentzian(&d, None).unwrap();
        let omega = 2.0 * PI * rabi_hz;
        let fwhm = (1.0 + omega * omega * t1 * t2).sqrt() / (PI * t2);
        assert!(((fit.param("width") - fwhm) / fwhm).abs() < 1e-6);
        assert!((fit.param("center") - 4.962e9).abs() < 1.0);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn ramsey_offset_sign() {
        // fringe frequency is |offset − δ/2π|
        let delta_hz = 0.7e6;
        let spec = device(delta_hz);
        let pi = spec.pi_pulse(&GaussianPulse::default());
        let delays = linspace(0.0, 2e-6, 81);
        let y = ramsey_populations(&spec, &pi, &delays, 3e6).unwrap();
        let fit = fit_damped_sinusoid(&SweepData::new(delays, y).unwrap(), None).unwrap();
        assert!((fit.param("frequency") - (3e6 - delta_hz)).abs() < 3e3, "{}", fit.param("frequency"));
    }

    #[test]
    fn closure_with_hidden_detuning() {
        let hidden = 3.83e6;
        let spec = device(hidden);
        let cal = run_calibration(&spec, &CalibrationConfig::default()).unwrap();
        let q = &cal.report.qubits[0];
        assert!(((q.estimated_detuning_hz - hidden) / hidden).abs() < 0.01);
        assert!(q.residual_detuning_hz.abs() < 40e3, "{}", q.residual_detuning_hz);
        assert!(((q.pi_amplitude - 0.095) / 0.095).abs() < 0.01);
        assert!(q.assignment_fidelity > 0.99);
        // calibrated spec reproduces the π pulse
        let pi = cal.spec.pi_pulse(&GaussianPulse::default());
        assert!(((pi.amplitude - q.pi_amplitude) / q.pi_amplitude).abs() < 1e-12);
        assert!((cal.spec.frame_freq_hz[0] + cal.spec.detunings[0] / (2.0 * PI) - (4.962e9 + hidden)).abs() < 1e-3);
    }

    #[test]
    fn already_calibrated_is_stable() {
        let spec = device(0.0);
        let cfg = CalibrationConfig {
            seed: 5,
            ..Default::default()
        };
        let once = run_calibration(&spec, &cfg).unwrap();
        let twice = run_calibration(&once.spec, &cfg).unwrap();
        let a = once.spec.frame_freq_hz[0];
        let b = twice.spec.frame_freq_hz[0];
        assert!((a - b).abs() < 40e3, "{a} vs {b}");
    }

    #[test]
    fn zero_rabi_rate_aborts_at_rabi_step() {
        let mut spec = device(1e6);
        spec.rabi_rate_per_amp = 0.0;
        match run_calibration(&spec, &CalibrationConfig::default()) {
            Err(Error::Calibration { step, .. }) => assert_eq!(step, "rabi"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = device(2e6);
        let cfg = CalibrationConfig::default();
        let a = run_calibration(&spec, &cfg).unwrap();
        let b = run_calibration(&spec, &cfg).unwrap();
        assert_eq!(a.report, b.report);
    }
}
