//! The `nlslab` binary and the experiment runner behind it.

use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use nlslab::config::ExperimentConfig;
use nlslab::experiment::{run, sweep};
use nlslab::io::{load_profile, Table};

fn nlslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlslab"))
}

fn write_config(dir: &Path, name: &str, value: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn soliton_config(dt: f64) -> Value {
    json!({
        "experiment": "evolve",
        "nonlinearity": {"kind": "power", "alpha": 2.0},
        "grid": {"length": 80.0, "count": 1024},
        "train": {"components": [{"omega": 1.0, "v": 4.0}]},
        "evolution": {"dt": dt, "t_end": 1.0, "snapshot_stride": 50}
    })
}

fn gp_config(c: f64) -> Value {
    json!({
        "experiment": "profile",
        "nonlinearity": {"kind": "gross_pitaevskii"},
        "grid": {"length": 60.0, "count": 1024},
        "profile": {"target": "gp_kink", "c": c}
    })
}

#[test]
fn profile_run_exports_kink_and_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "kink.json",
        &json!({
            "experiment": "profile",
            "nonlinearity": {"kind": "double_power", "alpha": 1.0, "beta": 2.0},
            "grid": {"length": 120.0, "count": 2048},
            "profile": {"target": "kink"}
        }),
    );
    let out = dir.path().join("out");
    let status = nlslab().args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!((summary["headline"]["omega0"].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-10);
    assert!((summary["headline"]["b"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-10);
    let p = load_profile(&out.join("profile.nlsp")).unwrap();
    assert!((p.limit_minus_inf().re - 2.0 / 3.0).abs() < 1e-10);
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "profile.nlsp" && f["bytes"].as_u64().unwrap() > 0));
    assert_eq!(manifest["config"]["experiment"], "profile");
}

#[test]
fn missing_grid_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = soliton_config(0.01);
    bad.as_object_mut().unwrap().remove("grid");
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let out = nlslab().args(["run", cfg.to_str().unwrap()]).current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`grid`"), "{err}");
}

#[test]
fn runtime_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // a dark kink faster than the speed of sound does not exist
    let path = write_config(dir.path(), "fast.json", &gp_config(2.0));
    let out = nlslab().args(["run", path.to_str().unwrap()]).current_dir(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("experiment `profile`") && err.contains("speed of sound"), "{err}");
}

#[test]
fn single_value_sweep_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = soliton_config(1e-2);
    let cfg = ExperimentConfig::from_value(base.clone()).unwrap();
    let single = run(&cfg, &dir.path().join("run")).unwrap();
    let swept = sweep(&base, "evolution.dt", &[1e-2], &dir.path().join("sweep")).unwrap();
    assert_eq!(swept.rows.len(), 1);
    assert_eq!(swept.rows[0].report.as_ref().unwrap().headline, single.headline);
    let a = std::fs::read(dir.path().join("run/metrics.csv")).unwrap();
    let b = std::fs::read(dir.path().join("sweep/row_000/metrics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dt_sweep_shows_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "sol.json", &soliton_config(1e-2));
    let out = dir.path().join("sweep");
    let status = nlslab()
        .args(["sweep", path.to_str().unwrap(), "--param", "evolution.dt", "--values", "1e-2,5e-3,2.5e-3"])
        .args(["--out", out.to_str().unwrap(), "--threads", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let table = Table::read(std::fs::File::open(out.join("sweep.csv")).unwrap()).unwrap();
    let err = table.column("l2_error_final").unwrap();
    assert_eq!(table.column("value").unwrap(), vec![1e-2, 5e-3, 2.5e-3]);
    for w in err.windows(2) {
        let r = w[0] / w[1];
        assert!((3.5..=4.5).contains(&r), "{err:?}");
    }
}

#[test]
fn sweep_marks_failing_rows_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let report = sweep(&gp_config(0.5), "profile.c", &[0.5, 2.0], dir.path()).unwrap();
    assert!(report.rows[0].ok);
    assert!(!report.rows[1].ok);
    assert!(report.rows[1].error.is_some());
    let table = Table::read(std::fs::File::open(dir.path().join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(table.column("ok").unwrap(), vec![1.0, 0.0]);
    assert!(table.column("residual").unwrap()[1].is_nan());
    assert!(sweep(&soliton_config(1e-2), "grid.nope", &[1.0], dir.path()).is_err());
}
