// Copyright 2026 The nvqsim Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command;

use nvqsim::harness::{run_sweep, ExperimentConfig};

fn config_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn nvqsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nvqsim"))
}

fn small_sweep(values: Vec<f64>, dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&config_path("sweep_exchange.json")).unwrap();
    cfg.delay_range_us = None;
    cfg.delays_us = Some(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    cfg.exact = false;
    cfg.shots = 200;
    cfg.sweep.as_mut().unwrap().values = values;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

#[test]
fn sweep_points_do_not_depend_on_order() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fwd = run_sweep(&small_sweep(vec![50.0, 100.0, 200.0], a.path())).unwrap();
    let rev = run_sweep(&small_sweep(vec![200.0, 100.0, 50.0], b.path())).unwrap();
    for p in &fwd {
        let q = rev.iter().find(|q| q.value == p.value).unwrap();
        assert_eq!(p.config_sha256, q.config_sha256);
        for file in ["counts.csv", "diagnostics.csv", "coherence.csv"] {
            let x = std::fs::read(a.path().join(&p.dir).join(file)).unwrap();
            let y = std::fs::read(b.path().join(&q.dir).join(file)).unwrap();
            assert_eq!(x, y, "{file} differs at value {}", p.value);
        }
    }
    assert!(a.path().join("sweep.csv").exists());
}

#[test]
fn cli_run_writes_manifest() {
    let out = tempfile::tempdir().unwrap();
    let status = nvqsim()
        .args(["run", "--config", "preset:nv_nv", "--shots", "100", "--seed", "3", "--format", "json", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for f in ["manifest.json", "config.json", "diagnostics.json", "coherence.json", "rho/rho_000.json"] {
        assert!(out.path().join(f).exists(), "missing {f}");
    }
}

#[test]
fn cli_tomo_then_diagnose() {
    let run = tempfile::tempdir().unwrap();
    let ok = nvqsim()
        .args(["run", "--config", "preset:nv13c_sdid", "--shots", "500", "--out"])
        .arg(run.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let tomo = tempfile::tempdir().unwrap();
    let ok = nvqsim()
        .args(["tomo", "--input"])
        .arg(run.path().join("counts.csv"))
        .arg("--out")
        .arg(tomo.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let diag = tempfile::tempdir().unwrap();
    let ok = nvqsim()
        .args(["diagnose", "--input"])
        .arg(tomo.path().join("rho"))
        .arg("--out")
        .arg(diag.path())
        .status()
        .unwrap();
    assert!(ok.success());
    let lhs = std::fs::read_to_string(run.path().join("diagnostics.csv")).unwrap();
    let rhs = std::fs::read_to_string(diag.path().join("diagnostics.csv")).unwrap();
    // the rho files carry 12 significant digits
    assert_eq!(lhs.lines().count(), rhs.lines().count());
    for (l, r) in lhs.lines().zip(rhs.lines()).skip(1) {
        for (x, y) in l.split(',').zip(r.split(',')) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() < 1e-9, "{l} vs {r}"),
                _ => assert_eq!(x, y),
            }
        }
    }
}

#[test]
fn cli_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"qubits": [{"frame_ghz": 4.9, "t2_us": -1}], "sequence": "ramsey", "delays_us": [1]}"#)
        .unwrap();
    let out = nvqsim().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qubits[0].t2_us"));

    let out = nvqsim().args(["run", "--config", "preset:nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = nvqsim()
        .args(["run", "--config", "preset:nv_nv", "--format", "xml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
