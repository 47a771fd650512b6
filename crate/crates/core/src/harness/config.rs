// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration. Every dimensional field carries its unit in
//! its name; frequencies are entered in Hz multiples and converted to
//! angular units internally.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibration::CalibrationConfig;
use crate::diagnostics::CoherenceModel;
use crate::dynamics::IntegratorConfig;
use crate::error::{Error, Result};
use crate::hamiltonian::{CouplingSpec, NoiseSpec, SystemSpec};
use crate::measurement::{IQModel, ReadoutError};
use crate::pulses::{GaussianPulse, SequenceKind, DEFAULT_PI_AMPLITUDE, DEFAULT_SIGMA_S, DEFAULT_TRUNCATION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    /// Rotating-frame (drive) frequency.
    #[serde(default)]
    pub frame_ghz: f64,
    /// Qubit frequency minus frame frequency.
    #[serde(default)]
    pub detuning_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tphi_us: Option<f64>,
    /// Echo coherence time; converted to Tphi using T1. Excludes `tphi_us`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
}

impl Default for QubitConfig {
    fn default() -> Self {
        Self {
            frame_ghz: 0.0,
            detuning_mhz: 0.0,
            t1_us: None,
            tphi_us: None,
            t2_us: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub pair: [usize; 2],
    /// ZZ strength J/2π.
    #[serde(default)]
    pub j_khz: f64,
    /// Exchange strength A_ex/2π.
    #[serde(default)]
    pub a_ex_khz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub sigma_ns: f64,
    pub truncation_sigma: f64,
    /// Amplitude of a π rotation; fixes the drive constant.
    pub pi_amplitude: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            sigma_ns: DEFAULT_SIGMA_S * 1e9,
            truncation_sigma: DEFAULT_TRUNCATION,
            pi_amplitude: DEFAULT_PI_AMPLITUDE,
        }
    }
}

impl PulseConfig {
    /// Pulse shape at unit amplitude, centered in its window.
    pub fn shape(&self) -> GaussianPulse {
        let sigma = self.sigma_ns * 1e-9;
        GaussianPulse {
            amplitude: 1.0,
            center: self.truncation_sigma * sigma,
            sigma,
            truncation: self.truncation_sigma,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceName {
    Ramsey,
    HahnEcho,
    NuclearImpurity,
    NvNvImpurity,
}

impl SequenceName {
    /// Sequence whose total free-evolution time is `total_s`.
    pub fn kind(self, total_s: f64) -> SequenceKind {
        let template = match self {
            SequenceName::Ramsey => SequenceKind::Ramsey { tau: 0.0 },
            SequenceName::HahnEcho => SequenceKind::HahnEcho { tau: 0.0 },
            SequenceName::NuclearImpurity => SequenceKind::NuclearImpurity { tau: 0.0 },
            SequenceName::NvNvImpurity => SequenceKind::NvNvImpurity { tau: 0.0 },
        };
        template.from_free_evolution(total_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl RangeConfig {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    /// P(read 1 | prepared 0)
    pub p01: f64,
    /// P(read 0 | prepared 1)
    pub p10: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps_per_radian: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Run diagnostics on the unprojected linear-inversion estimate.
    pub use_raw: bool,
    pub coherence_model: CoherenceModel,
    pub ppt_significance_sigma: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            use_raw: false,
            coherence_model: CoherenceModel::Auto,
            ppt_significance_sigma: crate::diagnostics::PPT_SIGNIFICANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::config("format", format!("expected csv or json, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    pub sweep_half_span_mhz: f64,
    pub sweep_points: usize,
    pub spectroscopy_rabi_mhz: f64,
    pub rabi_max_amplitude: f64,
    pub rabi_points: usize,
    pub ramsey_max_delay_us: f64,
    pub ramsey_points: usize,
    pub ramsey_offset_mhz: f64,
    pub noise_level: f64,
    /// IQ cloud separation in units of the cloud width.
    pub iq_separation_sigma: f64,
    pub training_shots: usize,
    pub readout_shots: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        let c = CalibrationConfig::default();
        Self {
            sweep_half_span_mhz: c.sweep_half_span_hz * 1e-6,
            sweep_points: c.sweep_points,
            spectroscopy_rabi_mhz: c.spectroscopy_rabi_hz * 1e-6,
            rabi_max_amplitude: c.rabi_max_amplitude,
            rabi_points: c.rabi_points,
            ramsey_max_delay_us: c.ramsey_max_delay_s * 1e6,
            ramsey_points: c.ramsey_points,
            ramsey_offset_mhz: c.ramsey_offset_hz * 1e-6,
            noise_level: c.noise_level,
            iq_separation_sigma: c.iq.separation() / c.iq.cloud_sigma,
            training_shots: c.training_shots,
            readout_shots: c.readout_shots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Exchange strength of coupling `index`.
    AExKhz,
    /// ZZ strength of coupling `index`.
    JKhz,
    /// T1 of qubit `index`.
    T1Us,
    /// Tphi of qubit `index`.
    TphiUs,
    /// Detuning of qubit `index`.
    DetuningMhz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub index: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub qubits: Vec<QubitConfig>,
    #[serde(default)]
    pub couplings: Vec<CouplingConfig>,
    #[serde(default)]
    pub pulse: PulseConfig,
    pub sequence: SequenceName,
    /// Total free-evolution times of the sensor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delays_us: Option<Vec<f64>>,
    /// Evenly spaced alternative to `delays_us`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_range_us: Option<RangeConfig>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    /// Use exact expectation values instead of sampled counts.
    #[serde(default)]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutConfig>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn default_shots() -> u64 {
    1000
}

fn positive(field: impl Into<String>, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be a positive finite number, got {v}")))
    }
}

fn finite(field: impl Into<String>, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Canonical serialization; the hash of a run is taken over these bytes.
    /// The output directory is blanked so that where a run is written does
    /// not change what it produces.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.qubits.len();
        if !(1..=3).contains(&n) {
            return Err(Error::config("qubits", format!("need 1 to 3 qubits, got {n}")));
        }
        let needed = self.sequence.kind(0.0).n_qubits();
        if n < needed {
            return Err(Error::config(
                "qubits",
                format!("sequence {:?} needs {needed} qubits, got {n}", self.sequence),
            ));
        }
        for (q, qc) in self.qubits.iter().enumerate() {
            finite(format!("qubits[{q}].frame_ghz"), qc.frame_ghz)?;
            finite(format!("qubits[{q}].detuning_mhz"), qc.detuning_mhz)?;
            for (name, v) in [("t1_us", qc.t1_us), ("tphi_us", qc.tphi_us), ("t2_us", qc.t2_us)] {
                if let Some(v) = v {
                    positive(format!("qubits[{q}].{name}"), v)?;
                }
            }
            if qc.tphi_us.is_some() && qc.t2_us.is_some() {
                return Err(Error::config(format!("qubits[{q}].t2_us"), "give either tphi_us or t2_us, not both"));
            }
            self.noise(q)?;
        }
        for (k, c) in self.couplings.iter().enumerate() {
            let [a, b] = c.pair;
            if a == b || a >= n || b >= n {
                return Err(Error::config(format!("couplings[{k}].pair"), format!("invalid pair [{a}, {b}]")));
            }
            finite(format!("couplings[{k}].j_khz"), c.j_khz)?;
            finite(format!("couplings[{k}].a_ex_khz"), c.a_ex_khz)?;
        }
        positive("pulse.sigma_ns", self.pulse.sigma_ns)?;
        positive("pulse.truncation_sigma", self.pulse.truncation_sigma)?;
        positive("pulse.pi_amplitude", self.pulse.pi_amplitude)?;
        let delays = match (&self.delays_us, &self.delay_range_us) {
            (Some(_), Some(_)) => {
                return Err(Error::config("delay_range_us", "give either delays_us or delay_range_us, not both"))
            }
            (None, None) => return Err(Error::config("delays_us", "no delays given")),
            (Some(d), None) => ("delays_us", d.clone()),
            (None, Some(r)) => ("delay_range_us", r.values()),
        };
        if delays.1.is_empty() {
            return Err(Error::config(delays.0, "must not be empty"));
        }
        for (k, d) in delays.1.iter().enumerate() {
            if !(*d >= 0.0 && d.is_finite()) {
                return Err(Error::config(format!("{}[{k}]", delays.0), format!("must be >= 0, got {d}")));
            }
            if k > 0 && *d < delays.1[k - 1] {
                return Err(Error::config(delays.0, "delays must be sorted ascending"));
            }
        }
        if self.shots == 0 {
            return Err(Error::config("shots", "must be > 0"));
        }
        if let Some(r) = &self.readout {
            for (name, p) in [("readout.p01", r.p01), ("readout.p10", r.p10)] {
                if !(0.0..=0.5).contains(&p) {
                    return Err(Error::config(name, format!("must lie in [0, 0.5], got {p}")));
                }
            }
        }
        if let Some(dt) = self.integrator.dt_ns {
            positive("integrator.dt_ns", dt)?;
        }
        if let Some(s) = self.integrator.steps_per_radian {
            if !(s >= 20.0 && s.is_finite()) {
                return Err(Error::config("integrator.steps_per_radian", format!("must be >= 20, got {s}")));
            }
        }
        positive("analysis.ppt_significance_sigma", self.analysis.ppt_significance_sigma)?;
        if let Some(c) = &self.calibration {
            self.calibration_config_from(c)?.validate().map_err(|e| match e {
                Error::Config { field, reason } => Error::config(format!("calibration.{field}"), reason),
                other => Error::config("calibration", other.to_string()),
            })?;
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "must not be empty"));
            }
            let limit = match s.parameter {
                SweepParameter::AExKhz | SweepParameter::JKhz => self.couplings.len(),
                _ => n,
            };
            if s.index >= limit {
                return Err(Error::config("sweep.index", format!("index {} out of range ({limit} entries)", s.index)));
            }
            for (k, v) in s.values.iter().enumerate() {
                self.with_parameter(s.parameter, s.index, *v)
                    .map_err(|e| Error::config(format!("sweep.values[{k}]"), e.to_string()))?;
            }
        }
        Ok(())
    }

    fn noise(&self, q: usize) -> Result<NoiseSpec> {
        let qc = &self.qubits[q];
        let t1 = qc.t1_us.map_or(f64::INFINITY, |t| t * 1e-6);
        match (qc.tphi_us, qc.t2_us) {
            (_, Some(t2)) => {
                NoiseSpec::from_t2(t1, t2 * 1e-6).map_err(|e| Error::config(format!("qubits[{q}].t2_us"), e.to_string()))
            }
            (Some(tphi), None) => Ok(NoiseSpec { t1, tphi: tphi * 1e-6 }),
            (None, None) => Ok(NoiseSpec {
                t1,
                tphi: f64::INFINITY,
            }),
        }
    }

    /// Delays (total free evolution), seconds.
    pub fn delays_s(&self) -> Vec<f64> {
        let us = match (&self.delays_us, &self.delay_range_us) {
            (Some(d), _) => d.clone(),
            (None, Some(r)) => r.values(),
            (None, None) => Vec::new(),
        };
        us.into_iter().map(|d| d * 1e-6).collect()
    }

    pub fn pulse_shape(&self) -> GaussianPulse {
        self.pulse.shape()
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let n = self.qubits.len();
        let shape = self.pulse_shape();
        let mut spec = SystemSpec::new(n);
        for (q, qc) in self.qubits.iter().enumerate() {
            spec.frame_freq_hz[q] = qc.frame_ghz * 1e9;
            spec.detunings[q] = 2.0 * PI * qc.detuning_mhz * 1e6;
            spec.noise[q] = self.noise(q)?;
        }
        for c in &self.couplings {
            spec.couplings.push(CouplingSpec {
                pair: (c.pair[0], c.pair[1]),
                zz: 2.0 * PI * c.j_khz * 1e3,
                exchange: 2.0 * PI * c.a_ex_khz * 1e3,
            });
        }
        spec.rabi_rate_per_amp = PI / (self.pulse.pi_amplitude * shape.unit_area());
        spec.validate()?;
        Ok(spec)
    }

    pub fn integrator(&self, spec: &SystemSpec) -> Result<IntegratorConfig> {
        let mut cfg = IntegratorConfig::for_spec(spec)?;
        if let Some(s) = self.integrator.steps_per_radian {
            cfg.steps_per_radian = s;
        }
        if let Some(dt) = self.integrator.dt_ns {
            cfg.dt = dt * 1e-9;
        }
        cfg.validate(spec)?;
        Ok(cfg)
    }

    pub fn readout_error(&self) -> Option<ReadoutError> {
        self.readout.as_ref().map(|r| ReadoutError { p01: r.p01, p10: r.p10 })
    }

    fn calibration_config_from(&self, c: &CalibrationSettings) -> Result<CalibrationConfig> {
        positive("calibration.iq_separation_sigma", c.iq_separation_sigma)?;
        Ok(CalibrationConfig {
            sweep_half_span_hz: c.sweep_half_span_mhz * 1e6,
            sweep_points: c.sweep_points,
            spectroscopy_rabi_hz: c.spectroscopy_rabi_mhz * 1e6,
            rabi_max_amplitude: c.rabi_max_amplitude,
            rabi_points: c.rabi_points,
            ramsey_max_delay_s: c.ramsey_max_delay_us * 1e-6,
            ramsey_points: c.ramsey_points,
            ramsey_offset_hz: c.ramsey_offset_mhz * 1e6,
            noise_level: c.noise_level,
            iq: IQModel {
                center0: [-1.0, 0.0],
                center1: [1.0, 0.0],
                cloud_sigma: 2.0 / c.iq_separation_sigma,
            },
            training_shots: c.training_shots,
            readout_shots: c.readout_shots,
            pulse: self.pulse_shape().with_amplitude(self.pulse.pi_amplitude),
            seed: self.seed,
        })
    }

    /// Calibration settings, defaulted when the section is absent.
    pub fn calibration_config(&self) -> Result<CalibrationConfig> {
        self.calibration_config_from(&self.calibration.clone().unwrap_or_default())
    }

    /// Copy with one swept parameter replaced.
    pub fn with_parameter(&self, p: SweepParameter, index: usize, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        match p {
            SweepParameter::AExKhz | SweepParameter::JKhz => {
                let coupling = c
                    .couplings
                    .get_mut(index)
                    .ok_or_else(|| Error::config("sweep.index", format!("no coupling {index}")))?;
                if p == SweepParameter::AExKhz {
                    coupling.a_ex_khz = value;
                } else {
                    coupling.j_khz = value;
                }
            }
            _ => {
                let q = c
                    .qubits
                    .get_mut(index)
                    .ok_or_else(|| Error::config("sweep.index", format!("no qubit {index}")))?;
                match p {
                    SweepParameter::T1Us => q.t1_us = Some(value),
                    SweepParameter::TphiUs => {
                        q.tphi_us = Some(value);
                        q.t2_us = None;
                    }
                    _ => q.detuning_mhz = value,
                }
            }
        }
        c.validate()?;
        Ok(c)
    }
}
