use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const SMALL: &str = "[grid]\nn1 = 16\nn2 = 16\n[forcing]\nmode = 2\n[solver]\ndt = 0.01\nt_end = 0.1\nrecord_every = 1\n\
                     [observer]\nnx = 16\nny = 16\ncalibration_samples = 8\n";

/// `SMALL` with extra lines in the [solver] section.
fn small_solver(extra: &str) -> String {
    SMALL.replace("record_every = 1\n", &format!("record_every = 1\n{extra}\n"))
}

fn run(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (i32, PathBuf) {
    let cfg = dir.join(format!("{command}.toml"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(command);
    let mut argv: Vec<String> = ["nseobs", command, "--config"].iter().map(|s| s.to_string()).collect();
    argv.push(cfg.display().to_string());
    argv.push("--out".into());
    argv.push(out.display().to_string());
    argv.extend(extra.iter().map(|s| s.to_string()));
    (nseobs::main_with_args(argv), out)
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(nseobs::manifest_path(out)).unwrap()).unwrap()
}

fn assert_outputs_listed(out: &Path) {
    let m = manifest(out);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for e in outputs {
        let p = out.join(e["path"].as_str().unwrap());
        assert!(fs::metadata(&p).unwrap().len() > 0, "{}", p.display());
        assert_eq!(fs::metadata(&p).unwrap().len(), e["bytes"].as_u64().unwrap());
    }
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

#[test]
fn simulate_writes_trajectory_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "simulate", &small_solver("snapshot_every = 5"), &["--seed", "3"]);
    assert_eq!(code, 0);
    assert_outputs_listed(&out);
    let rows = csv_rows(&out.join("trajectory.csv"));
    assert_eq!(rows.len(), 11);
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 3);
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert!(m["metrics"]["final_l2"].as_f64().unwrap().is_finite());
    let fin = nseobs_core::spectral::snapshot::load(&out.join("state_final.nsef")).unwrap();
    assert!((fin.l2_norm() - rows[10][1]).abs() <= 1e-12 * rows[10][1]);
    assert!(out.join("snapshots/state_000005.nsef").exists());
}

#[test]
fn zero_duration_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "simulate", &SMALL.replace("t_end = 0.1", "t_end = 0"), &[]);
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out.join("trajectory.csv")).len(), 1);
}

#[test]
fn config_errors_name_the_key_and_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "simulate", "[solver]\nnuu = 0.1\n", &[]);
    assert_eq!(code, 2);
    let m = manifest(&out);
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("solver.nuu"));
    let (code, out) = run(dir.path(), "observe", "[observer]\ngain = -3.0\n", &[]);
    assert_eq!(code, 2);
    assert!(manifest(&out)["error"].as_str().unwrap().contains("observer.gain"));
}

#[test]
fn step_failure_reports_the_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_solver("picard_max_iters = 1");
    let (code, out) = run(dir.path(), "simulate", &cfg, &[]);
    assert_eq!(code, 1);
    let err = manifest(&out)["error"].as_str().unwrap().to_string();
    assert!(err.contains("t = 0"), "{err}");
}

#[test]
fn infeasible_automatic_gain_cites_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace("nx = 16\nny = 16", "nx = 4\nny = 4");
    let (code, out) = run(dir.path(), "observe", &cfg, &[]);
    assert_eq!(code, 1);
    let m = manifest(&out);
    let err = m["error"].as_str().unwrap();
    assert!(err.contains("infeasible") && err.contains("gain_report_average.txt"), "{err}");
    assert_outputs_listed(&out);
    let doc = fs::read_to_string(out.join("gain_report_average.txt")).unwrap();
    assert!(doc.contains("feasible_gradient = false"));
}

#[test]
fn observe_both_operators_with_fixed_gain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}operator = \"both\"\ngain = 40.0\nz0 = \"random\"\nz0_scale = 0.5\n");
    let (code, out) = run(dir.path(), "observe", &cfg, &[]);
    assert_eq!(code, 0);
    assert_outputs_listed(&out);
    for name in ["average", "point"] {
        let rows = csv_rows(&out.join(format!("observer_{name}.csv")));
        assert_eq!(rows.len(), 11);
        assert!(rows[10][6] < rows[0][6], "{name}");
    }
    let header = fs::read_to_string(out.join("observer_point.csv")).unwrap();
    assert!(header.starts_with(nseobs_core::observer::ERROR_TRACE_HEADER));
}

#[test]
fn zero_perturbation_sensitivity_is_identically_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}[sweep]\nic_amplitude = 0.0\ninput_amplitude = 0.0\n");
    let (code, out) = run(dir.path(), "sensitivity", &cfg, &[]);
    assert_eq!(code, 0);
    assert_outputs_listed(&out);
    for tag in ["1em2", "1em1"] {
        let rows = csv_rows(&out.join(format!("sensitivity_nu{tag}.csv")));
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0));
    }
}

#[test]
fn compare_bounds_has_one_row_per_viscosity() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "compare-bounds", SMALL, &[]);
    assert_eq!(code, 0);
    assert_outputs_listed(&out);
    assert_eq!(csv_rows(&out.join("compare_bounds.csv")).len(), 25);
    assert!(fs::read_to_string(out.join("compare_bounds.svg")).unwrap().contains("<polyline"));
}

#[test]
fn gain_report_logs_reference_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "gain-report", SMALL, &[]);
    assert_eq!(code, 0);
    let doc = fs::read_to_string(out.join("gain_report_average.txt")).unwrap();
    assert!(doc.contains("reference_gamma_max = 7.1e1"));
    assert!(doc.contains("gamma_max_relative_deviation = "));
    assert!(manifest(&out)["metrics"]["average_gamma_max_relative_deviation"].is_number());
}

#[test]
fn empty_inequality_audit_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}[sweep]\ninequality_count = 0\nappendix_gammas = 0\n");
    let (code, out) = run(dir.path(), "inequality-audit", &cfg, &[]);
    assert_eq!(code, 0);
    assert_outputs_listed(&out);
    let report = fs::read_to_string(out.join("inequality_report.txt")).unwrap();
    assert!(report.contains("fields = 0") && report.contains("passed = true"));
    assert_eq!(manifest(&out)["metrics"]["violations"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}gain = 30.0\nknown_input = false\n");
    let mut seen = Vec::new();
    for run_id in ["a", "b"] {
        let d = dir.path().join(run_id);
        fs::create_dir_all(&d).unwrap();
        let (c1, s) = run(&d, "simulate", &cfg, &["--seed", "5"]);
        let (c2, o) = run(&d, "observe", &cfg, &["--seed", "5"]);
        assert_eq!((c1, c2), (0, 0));
        seen.push([
            fs::read(s.join("trajectory.csv")).unwrap(),
            fs::read(s.join("trajectory.svg")).unwrap(),
            fs::read(o.join("observer_average.csv")).unwrap(),
            fs::read(o.join("observer.svg")).unwrap(),
        ]);
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn binary_reports_thread_setting_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = Command::new(env!("CARGO_BIN_EXE_nseobs"))
        .args(["gain-report", "--out"])
        .arg(&out)
        .args(["--config", "/nonexistent/config.toml"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_nseobs"))
        .env("NSEOBS_THREADS", "zero")
        .args(["gain-report", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let output = Command::new(env!("CARGO_BIN_EXE_nseobs"))
        .env("NSEOBS_THREADS", "1")
        .args(["gain-report", "--preset", "desk", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert_eq!(manifest(&out)["preset"], "desk");
}
