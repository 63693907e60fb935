//! End-to-end checks of the `purcell` binary: exit codes, output formats,
//! and override handling.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_purcell"))
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(text.as_bytes()).unwrap();
    path
}

const TWO_ATOM: &str = r#"
kappa = 1.0

[[atoms]]
g = 0.05
excited = true

[[atoms]]
g = 3.0
gamma = 1.0
"#;

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn spectrum_emits_json_with_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["dim"], 3);
    let eigenvalues = v["spectrum"]["eigenvalues"].as_array().unwrap();
    assert_eq!(eigenvalues.len(), 3);
    // matrix serialized as [re, im] pairs, row-major
    assert_eq!(v["matrix"].as_array().unwrap().len(), 9);
}

#[test]
fn spectrum_csv_has_vector_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let out = bin()
        .args(["spectrum", "--format", "csv", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert!(text.starts_with("index,lambda_re,lambda_im,v0_re,v0_im"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn evolve_csv_contract_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let out_path = dir.path().join("traj.csv");
    let out = bin()
        .args(["evolve", "--t-end", "5", "--dt", "0.01", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("t,pop_atom_0,pop_atom_1,pop_photon,pop_ground,trace_error"));
}

#[test]
fn evolve_rejects_oversized_step_citing_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let out = bin()
        .args(["evolve", "--t-end", "5", "--dt", "0.5", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_str(&out);
    assert!(err.contains("0.0166"), "bound not cited: {err}");
}

#[test]
fn missing_kappa_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", "[[atoms]]\ng = 1.0\nexcited = true\n");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("kappa"));
}

#[test]
fn double_excitation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = TWO_ATOM.replace("gamma = 1.0", "gamma = 1.0\nexcited = true");
    let cfg = write_config(&dir, "cfg.toml", &text);
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("exactly one atom"));
}

#[test]
fn unknown_override_path_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let out = bin()
        .args(["spectrum", "--override", "atoms[1].mass=3", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn override_changes_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let base = bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let tweaked = bin()
        .args(["spectrum", "--override", "atoms[1].g=5.0", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(tweaked.status.code(), Some(0));
    assert_ne!(stdout_str(&base), stdout_str(&tweaked));
}

#[test]
fn ep_find_reports_second_order_point() {
    let out = bin()
        .args(["ep-find", "--kappa", "1", "--gamma-b", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["order"], 2);
    assert_eq!(v["g_b"], 2.0);
    assert!(v["min_gap"].as_f64().unwrap() <= 1e-6);
    assert!(v["max_overlap"].as_f64().unwrap() >= 1.0 - 1e-4);
    let p = v["splitting_exponent"].as_f64().unwrap();
    assert!((p - 0.5).abs() < 0.05);
}

#[test]
fn ep_find_requires_exactly_one_decay_argument() {
    let out = bin().args(["ep-find", "--kappa", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // both at once is rejected by clap itself
    let out = bin()
        .args(["ep-find", "--gamma-b", "5", "--gamma-c", "1.95"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_closed_form_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let run = || {
        bin()
            .args([
                "sweep",
                "--param",
                "atoms[1].g",
                "--grid",
                "0,3,5",
                "--observable",
                "closed_form:cooperativity",
                "--config",
            ])
            .arg(&cfg)
            .output()
            .unwrap()
    };
    let a = run();
    assert_eq!(a.status.code(), Some(0), "stderr: {}", stderr_str(&a));
    let text = stdout_str(&a);
    assert!(text.starts_with("param,value,diagnostic,error"));
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let gamma = 0.05f64 * 0.05;
    for (got, want) in values.iter().zip([1.0, 0.1, 1.0 / 26.0]) {
        assert!((got / gamma - want).abs() < 1e-12);
    }
    let b = run();
    assert_eq!(
        a.stdout, b.stdout,
        "identical invocations must emit identical bytes"
    );
}

#[test]
fn sweep_with_jobs_matches_sequential_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "cfg.toml", TWO_ATOM);
    let run = |jobs: &str| {
        bin()
            .args([
                "sweep",
                "--param",
                "atoms[1].g",
                "--grid",
                "0:6:0.25",
                "--observable",
                "slow_mode_rate",
                "--jobs",
                jobs,
                "--config",
            ])
            .arg(&cfg)
            .output()
            .unwrap()
    };
    let seq = run("1");
    let par = run("4");
    assert_eq!(seq.status.code(), Some(0));
    assert_eq!(par.status.code(), Some(0));
    assert_eq!(seq.stdout, par.stdout);
}

#[test]
fn reproduce_prints_five_reference_rows() {
    let out = bin()
        .args(["reproduce", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_str(&out));
    let rows: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cf_dev = row["closed_form_deviation"].as_f64().unwrap();
        let fit_dev = row["fit_deviation"].as_f64().unwrap();
        assert!(cf_dev <= 0.01, "closed form drifted: {row}");
        assert!(fit_dev <= 0.03, "fit outside tolerance: {row}");
    }
}
