// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nvqsim::harness::{self, presets, ExperimentConfig, OutputFormat};
use nvqsim::Error;

/// Pulse-level NV sensor simulator: calibration, sequences, tomography and
/// entanglement diagnostics.
#[derive(Parser)]
#[command(name = "nvqsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency sweep, Rabi, discriminator and Ramsey calibration.
    Calibrate(Shared),
    /// Simulate a sequence over the configured delays.
    Run(Shared),
    /// Reconstruct density matrices from a counts CSV.
    Tomo(Analysis),
    /// Diagnostics table from rho-v1 JSON files.
    Diagnose(Analysis),
    /// Repeat `run` over the values of the config's `sweep` section.
    Sweep(Shared),
}

#[derive(Args)]
struct Shared {
    /// Config file (JSON), or `preset:<name>`.
    #[arg(long)]
    config: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Exact expectation values, no sampling.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct Analysis {
    /// Counts CSV (tomo) or rho JSON file/directory (diagnose).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Analyze the unprojected linear-inversion estimate.
    #[arg(long)]
    raw: bool,
}

fn load(args: &Shared) -> nvqsim::Result<ExperimentConfig> {
    let mut cfg = match args.config.strip_prefix("preset:") {
        Some(name) => presets::by_name(name).ok_or_else(|| Error::Config {
            field: "--config".into(),
            reason: format!("unknown preset {name:?}"),
        })?,
        None => ExperimentConfig::load(args.config.as_ref())?,
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.shots {
        cfg.shots = n;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = &args.format {
        cfg.output.format = f.parse()?;
    }
    cfg.exact |= args.exact;
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command) -> nvqsim::Result<()> {
    match cmd {
        Command::Run(a) => {
            let cfg = load(&a)?;
            let m = harness::run_experiment(&cfg)?;
            println!("wrote {} files to {} in {:.2} s", m.files.len() + 1, m.out_dir.display(), m.wall_clock_s);
            if let Some(c) = &m.coherence {
                println!("T2 = {:.4e} s, oscillation = {:.4e} Hz", c.t2_s, c.oscillation_freq_hz);
            }
        }
        Command::Sweep(a) => {
            let cfg = load(&a)?;
            let points = harness::run_sweep(&cfg)?;
            println!("wrote {} sweep points to {}", points.len(), cfg.output.dir.display());
        }
        Command::Calibrate(a) => {
            let cfg = load(&a)?;
            let (report, _) = harness::run_calibrate(&cfg)?;
            for q in &report.qubits {
                println!(
                    "qubit {}: frame {:.6} GHz (shift {:+.4} MHz), pi amplitude {:.5}, assignment fidelity {:.4}",
                    q.qubit,
                    q.calibrated_frame_hz * 1e-9,
                    q.estimated_detuning_hz * 1e-6,
                    q.pi_amplitude,
                    q.assignment_fidelity
                );
            }
        }
        Command::Tomo(a) => {
            let format: OutputFormat = a.format.parse()?;
            let res = harness::run_tomo(&a.input, &a.out, format, a.raw)?;
            println!("reconstructed {} states into {}", res.len(), a.out.display());
        }
        Command::Diagnose(a) => {
            let format: OutputFormat = a.format.parse()?;
            let rows = harness::run_diagnose(&a.input, &a.out, format, a.raw)?;
            println!("diagnosed {} states into {}", rows.len(), a.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
