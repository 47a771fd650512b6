// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment orchestration: sequence → evolve → measure → tomography →
//! diagnostics, plus the calibrate, tomo, diagnose and sweep flows.
//!
//! Randomness for delay `k` and setting `s` comes from a ChaCha20 stream
//! `(k << 8) | s` under the configured seed, so results do not depend on
//! scheduling order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{run_calibration, CalibrationReport};
use crate::diagnostics::{
    diagnose, fit_coherence_decay, ppt_estimate, CoherenceFit, CoherenceModel, DiagnosticsRow, PptEstimate,
};
use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::measurement::sample_setting_with;
use crate::pulses::build_sequence;
use crate::qcore::{partial_trace, DensityMatrix};
use crate::tomography::{
    read_counts_csv, reconstruct, settings_list, write_counts_csv, PauliVector, RhoDocument, TomographyRecord,
    TomographyResult,
};

use super::config::{ExperimentConfig, OutputFormat};
use super::export::{sha256_file, write_diagnostics, write_json, write_table, write_text};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stream index used for single-qubit readout of delay `k`.
const SENSOR_STREAM: u64 = 0xff;

pub fn stream_rng(seed: u64, delay_index: usize, setting_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((delay_index as u64) << 8) | setting_index);
    rng
}

#[derive(Debug, Clone)]
pub struct DelayOutcome {
    pub index: usize,
    pub delay_s: f64,
    /// Simulated state at the end of the sequence.
    pub state: DensityMatrix,
    pub record: Option<TomographyRecord>,
    pub tomography: Option<TomographyResult>,
    pub diagnostics: Option<DiagnosticsRow>,
    pub ppt: Option<PptEstimate>,
    /// Excited population of qubit 0 as seen by the analysis.
    pub sensor_p1: f64,
    pub impurity_p1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config_sha256: String,
    pub outcomes: Vec<DelayOutcome>,
    pub coherence: Option<CoherenceFit>,
    pub coherence_error: Option<String>,
}

impl ExperimentResult {
    pub fn delays(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.delay_s).collect()
    }

    pub fn sensor_signal(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.sensor_p1).collect()
    }

    pub fn diagnostics(&self) -> Vec<DiagnosticsRow> {
        self.outcomes.iter().filter_map(|o| o.diagnostics.clone()).collect()
    }
}

fn excited(rho: &DensityMatrix, qubit: usize) -> Result<f64> {
    let r = if rho.n_qubits() == 1 {
        rho.clone()
    } else {
        partial_trace(rho, qubit)?
    };
    Ok(r.op()[(1, 1)].re.clamp(0.0, 1.0))
}

fn simulate_delay(cfg: &ExperimentConfig, index: usize, delay_s: f64) -> Result<DelayOutcome> {
    let spec = cfg.system_spec()?;
    let integrator = cfg.integrator(&spec)?;
    let pi = spec.pi_pulse(&cfg.pulse_shape());
    let schedule = build_sequence(cfg.sequence.kind(delay_s), &pi)?;
    let rho0 = DensityMatrix::basis(spec.n_qubits, 0)?;
    let state = evolve(&rho0, &schedule, &spec, &integrator)
        .map_err(|e| match e {
            Error::Integration { t, reason } => Error::Integration {
                t,
                reason: format!("delay #{index} ({delay_s:e} s): {reason}"),
            },
            other => other,
        })?
        .final_state()
        .clone();

    let mut out = DelayOutcome {
        index,
        delay_s,
        state: state.clone(),
        record: None,
        tomography: None,
        diagnostics: None,
        ppt: None,
        sensor_p1: excited(&state, 0)?,
        impurity_p1: None,
    };
    let readout = cfg.readout_error();

    if spec.n_qubits != 2 {
        if !cfg.exact {
            let p = out.sensor_p1;
            let p = match &readout {
                Some(r) => p * (1.0 - r.p10) + (1.0 - p) * r.p01,
                None => p,
            };
            let mut rng = stream_rng(cfg.seed, index, SENSOR_STREAM);
            let k = Binomial::new(cfg.shots, p.clamp(0.0, 1.0))
                .map_err(|e| Error::InvalidArgument(e.to_string()))?
                .sample(&mut rng);
            out.sensor_p1 = k as f64 / cfg.shots as f64;
        }
        return Ok(out);
    }

    let tomo = if cfg.exact {
        TomographyResult::from_pauli(delay_s, PauliVector::from_state(&state)?)?
    } else {
        let mut rec = TomographyRecord::new(delay_s);
        for (s_idx, s) in settings_list().into_iter().enumerate() {
            let mut rng = stream_rng(cfg.seed, index, s_idx as u64);
            rec.insert(s, sample_setting_with(&state, &s, cfg.shots, readout.as_ref(), &mut rng)?);
        }
        let t = reconstruct(&rec)?;
        out.record = Some(rec);
        out.ppt = Some(ppt_estimate(&t.pauli, &t.rho_phys, cfg.shots, cfg.analysis.ppt_significance_sigma)?);
        t
    };
    let analyzed = tomo.state(cfg.analysis.use_raw);
    out.sensor_p1 = excited(&analyzed, 0)?;
    out.impurity_p1 = Some(excited(&analyzed, 1)?);
    out.diagnostics = Some(diagnose(delay_s, &analyzed)?);
    out.tomography = Some(tomo);
    Ok(out)
}

/// Runs the experiment in memory.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let delays = cfg.delays_s();
    let outcomes = delays
        .par_iter()
        .enumerate()
        .map(|(k, &d)| simulate_delay(cfg, k, d))
        .collect::<Result<Vec<_>>>()?;
    let (coherence, coherence_error) = if outcomes.len() >= crate::diagnostics::MIN_COHERENCE_POINTS {
        let t: Vec<f64> = outcomes.iter().map(|o| o.delay_s).collect();
        let y: Vec<f64> = outcomes.iter().map(|o| o.sensor_p1).collect();
        match fit_coherence_decay(&t, &y, cfg.analysis.coherence_model) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    Ok(ExperimentResult {
        config_sha256: cfg.sha256(),
        outcomes,
        coherence,
        coherence_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayEntry {
    pub index: usize,
    pub delay_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppt_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ppt_significant: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub model: CoherenceModel,
    pub t2_s: f64,
    pub oscillation_freq_hz: f64,
    pub non_decaying: bool,
}

/// Index of a run's output files. Only deterministic content is written;
/// the wall-clock time is kept in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub artifact_version: String,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
    pub delays: Vec<DelayEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence_error: Option<String>,
    #[serde(skip)]
    pub wall_clock_s: f64,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn relative(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

fn file_entries(dir: &Path, paths: &[PathBuf]) -> Result<Vec<FileEntry>> {
    paths
        .iter()
        .map(|p| {
            Ok(FileEntry {
                path: relative(dir, p),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

/// Writes every artifact of `res` into `dir` and returns the manifest.
pub fn write_outputs(cfg: &ExperimentConfig, res: &ExperimentResult, dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let format = cfg.output.format;
    let mut files = Vec::new();

    let config_path = dir.join("config.json");
    write_text(&config_path, &cfg.canonical_json())?;
    files.push(config_path);

    let mut delays = Vec::with_capacity(res.outcomes.len());
    for o in &res.outcomes {
        let mut entry = DelayEntry {
            index: o.index,
            delay_s: crate::numfmt::round_sig(o.delay_s),
            rho_file: None,
            ppt_sigma: o.ppt.map(|p| crate::numfmt::round_sig(p.sigma)),
            ppt_significant: o.ppt.map(|p| p.significant),
        };
        if let Some(t) = &o.tomography {
            let path = dir.join("rho").join(format!("rho_{:03}.json", o.index));
            write_json(&path, &t.to_document())?;
            entry.rho_file = Some(relative(dir, &path));
            files.push(path);
        }
        delays.push(entry);
    }

    let records: Vec<TomographyRecord> = res.outcomes.iter().filter_map(|o| o.record.clone()).collect();
    if !records.is_empty() {
        let path = dir.join("counts.csv");
        write_counts_csv(fs::File::create(&path)?, &records)?;
        files.push(path);
    }
    let rows = res.diagnostics();
    if !rows.is_empty() {
        files.push(write_diagnostics(dir, &rows, format)?);
    }

    let two_qubit = res.outcomes.first().is_some_and(|o| o.impurity_p1.is_some());
    let (header, table): (Vec<&str>, Vec<Vec<f64>>) = if two_qubit {
        (
            vec!["delay_s", "sensor_p1", "impurity_p1"],
            res.outcomes
                .iter()
                .map(|o| vec![o.delay_s, o.sensor_p1, o.impurity_p1.unwrap_or(f64::NAN)])
                .collect(),
        )
    } else {
        (
            vec!["delay_s", "sensor_p1"],
            res.outcomes.iter().map(|o| vec![o.delay_s, o.sensor_p1]).collect(),
        )
    };
    files.push(write_table(dir, "coherence", &header, &table, format)?);

    let coherence = res.coherence.as_ref().map(|c| CoherenceSummary {
        model: c.model,
        t2_s: c.t2,
        oscillation_freq_hz: c.oscillation_freq_hz,
        non_decaying: c.non_decaying,
    });
    if let Some(c) = &res.coherence {
        let path = dir.join("coherence_fit.json");
        write_json(&path, c)?;
        files.push(path);
    }

    let manifest = RunManifest {
        schema: "manifest-v1".into(),
        artifact_version: ARTIFACT_VERSION.into(),
        config_sha256: res.config_sha256.clone(),
        files: file_entries(dir, &files)?,
        delays,
        coherence,
        coherence_error: res.coherence_error.clone(),
        wall_clock_s: 0.0,
        out_dir: dir.to_path_buf(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Simulates and writes into `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest> {
    let start = Instant::now();
    let res = simulate(cfg)?;
    let mut m = write_outputs(cfg, &res, &cfg.output.dir)?;
    m.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointSummary {
    pub value: f64,
    pub dir: String,
    pub config_sha256: String,
    pub t2_s: Option<f64>,
    pub oscillation_freq_hz: Option<f64>,
    pub ppt_min: Option<f64>,
    pub chsh_max: Option<f64>,
}

/// Runs one experiment per sweep value into `point_NNN/` subdirectories
/// and writes a `sweep` summary table.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepPointSummary>> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "the sweep subcommand needs a `sweep` section"))?;
    let root = cfg.output.dir.clone();
    let points = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let mut c = cfg.with_parameter(sweep.parameter, sweep.index, v)?;
            c.output.dir = root.join(format!("point_{k:03}"));
            let res = simulate(&c)?;
            write_outputs(&c, &res, &c.output.dir)?;
            let rows = res.diagnostics();
            Ok(SweepPointSummary {
                value: v,
                dir: format!("point_{k:03}"),
                config_sha256: res.config_sha256.clone(),
                t2_s: res.coherence.as_ref().map(|c| c.t2),
                oscillation_freq_hz: res.coherence.as_ref().map(|c| c.oscillation_freq_hz),
                ppt_min: rows.iter().map(|r| r.ppt_min).reduce(f64::min),
                chsh_max: rows.iter().map(|r| r.chsh_max).reduce(f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            vec![
                p.value,
                p.t2_s.unwrap_or(f64::NAN),
                p.oscillation_freq_hz.unwrap_or(f64::NAN),
                p.ppt_min.unwrap_or(f64::NAN),
                p.chsh_max.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    let name = serde_json::to_value(sweep.parameter)?;
    let header = [name.as_str().unwrap_or("value"), "t2_s", "oscillation_freq_hz", "ppt_min", "chsh_max"];
    write_table(&root, "sweep", &header, &table, cfg.output.format)?;
    Ok(points)
}

#[derive(Debug, Clone, Serialize)]
struct CalibrationDocument<'a> {
    schema: &'static str,
    config_sha256: String,
    report: &'a CalibrationReport,
}

/// Runs the calibration pipeline on the configured device. Writes the
/// report, per-qubit sweep tables and a config carrying the calibrated
/// frames and π amplitude.
pub fn run_calibrate(cfg: &ExperimentConfig) -> Result<(CalibrationReport, ExperimentConfig)> {
    cfg.validate()?;
    let spec = cfg.system_spec()?;
    let cal = run_calibration(&spec, &cfg.calibration_config()?)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    write_json(
        &dir.join("calibration.json"),
        &CalibrationDocument {
            schema: "calibration-v1",
            config_sha256: cfg.sha256(),
            report: &cal.report,
        },
    )?;
    for q in &cal.report.qubits {
        let sweeps = [
            ("frequency", "frequency_hz", &q.sweeps.frequency),
            ("rabi", "amplitude", &q.sweeps.rabi),
            ("ramsey", "delay_s", &q.sweeps.ramsey),
        ];
        for (stem, x_name, data) in sweeps {
            if let Some(d) = data {
                let rows: Vec<Vec<f64>> = d.x.iter().zip(&d.y).map(|(x, y)| vec![*x, *y]).collect();
                write_table(dir, &format!("q{}_{stem}", q.qubit), &[x_name, "p1"], &rows, cfg.output.format)?;
            }
        }
    }
    let mut calibrated = cfg.clone();
    for (q, qc) in calibrated.qubits.iter_mut().enumerate() {
        qc.frame_ghz = cal.spec.frame_freq_hz[q] * 1e-9;
        qc.detuning_mhz = cal.spec.detunings[q] / (2.0 * std::f64::consts::PI) * 1e-6;
    }
    let shape = cfg.pulse_shape();
    calibrated.pulse.pi_amplitude = std::f64::consts::PI / (cal.spec.rabi_rate_per_amp * shape.unit_area());
    calibrated.calibration = None;
    write_json(&dir.join("calibrated_config.json"), &calibrated)?;
    Ok((cal.report, calibrated))
}

/// Reconstructs states from a counts CSV and writes `rho/` documents and
/// diagnostics into `out`.
pub fn run_tomo(counts: &Path, out: &Path, format: OutputFormat, use_raw: bool) -> Result<Vec<TomographyResult>> {
    let file = fs::File::open(counts)
        .map_err(|e| Error::config("--input", format!("cannot read {}: {e}", counts.display())))?;
    let records = read_counts_csv(file)?;
    let results = records.par_iter().map(reconstruct).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(results.len());
    for (k, t) in results.iter().enumerate() {
        write_json(&out.join("rho").join(format!("rho_{k:03}.json")), &t.to_document())?;
        rows.push(diagnose(t.delay_s, &t.state(use_raw))?);
    }
    write_diagnostics(out, &rows, format)?;
    Ok(results)
}

/// Reads `rho-v1` documents (a file or every `*.json` in a directory, in
/// name order) and writes the diagnostics table.
pub fn run_diagnose(input: &Path, out: &Path, format: OutputFormat, use_raw: bool) -> Result<Vec<DiagnosticsRow>> {
    let mut paths = if input.is_dir() {
        fs::read_dir(input)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect::<Vec<_>>()
    } else {
        vec![input.to_path_buf()]
    };
    paths.sort();
    if paths.is_empty() {
        return Err(Error::config("--input", format!("no rho JSON files in {}", input.display())));
    }
    let rows = paths
        .par_iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            let doc = RhoDocument::from_json(&text)
                .map_err(|e| Error::config(p.display().to_string(), e.to_string()))?;
            let rho = if use_raw {
                DensityMatrix::new_unchecked(doc.rho_raw_operator()?.symmetrized())
            } else {
                DensityMatrix::new(doc.rho_operator()?)?
            };
            diagnose(doc.delay_s, &rho)
        })
        .collect::<Result<Vec<_>>>()?;
    write_diagnostics(out, &rows, format)?;
    Ok(rows)
}
