use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_pencil-graph");

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

fn artifact(summary: &Value, name: &str) -> Value {
    let dir = PathBuf::from(summary["run_dir"].as_str().unwrap());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    v
}

fn constant_pencil(ps: &[f64]) -> String {
    let edges: Vec<String> = ps
        .iter()
        .map(|p| format!("  {{ p = {{ cheb = [{p}] }}, q = {{ cheb = [0.0] }} }},"))
        .collect();
    format!("[pencil]\nedges = [\n{}\n]\n", edges.join("\n"))
}

const ZERO_M2: &str = r#"
[pencil]
edges = [
  { p = { cheb = [0.0] }, q = { cheb = [0.0] } },
  { p = { cheb = [0.0] }, q = { cheb = [0.0] } },
]

[forward]
window = { re_min = 0.5, re_max = 4.5, height = 1.0 }
"#;

#[test]
fn betas_for_two_boundary_means() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &constant_pencil(&[0.3, 0.7, 0.0]));
    let o = run("betas", &cfg, dir.path(), &[]);
    let s = stdout_json(&o);
    assert_eq!(s["summary"]["count"], 6);
    let a = artifact(&s, "betas.json");
    let betas: Vec<f64> = serde_json::from_value(a["data"]["betas"].clone()).unwrap();
    assert_eq!(betas.len(), 6);
    assert!(betas.iter().any(|b| b.abs() < 1e-12), "{betas:?}");
    let residuals: Vec<f64> = serde_json::from_value(a["data"]["residuals"].clone()).unwrap();
    assert!(residuals.iter().all(|r| *r < 1e-10));
    assert_eq!(a["meta"]["config_hash"].as_str().unwrap().len(), 16);
    assert_eq!(a["meta"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn colliding_means_exit_with_assumption_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &constant_pencil(&[0.3, 0.3, 0.0]));
    let o = run("betas", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "DegenerateAlphas");
}

#[test]
fn invert_edge_without_forward_run_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &constant_pencil(&[0.3, 0.7, 0.0]));
    let o = run("invert-edge", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "MissingArtifact");
    assert!(e["path"].as_str().unwrap().ends_with("spectrum.json"));
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{}\n[forward]\nnmax = 4\n", constant_pencil(&[0.3, 0.7, 0.0]));
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = run("forward", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "ConfigError");
    assert!(e["message"].as_str().unwrap().contains("nmax"));
}

#[test]
fn zero_pencil_spectrum_contains_closed_form_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", ZERO_M2);
    let s = stdout_json(&run("forward", &cfg, dir.path(), &[]));
    let a = artifact(&s, "spectrum.json");
    let values: Vec<f64> = a["data"]["spectrum"]["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lambda"][0].as_f64().unwrap())
        .collect();
    let x = (2.0f64 / 3.0).acos() / std::f64::consts::PI;
    for target in [1.0, 2.0 - x, 2.0, 2.0 + x, 3.0, 4.0 - x, 4.0, 4.0 + x] {
        assert!(values.iter().any(|v| (v - target).abs() < 1e-8), "{target} missing from {values:?}");
    }
    assert_eq!(values.len(), 8);
    let dir2 = PathBuf::from(s["run_dir"].as_str().unwrap());
    assert!(dir2.join("spectrum.csv").is_file());
    assert!(std::fs::read_to_string(dir2.join("spectrum.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = write_config(a.path(), "c.toml", ZERO_M2);
    let cb = write_config(b.path(), "c.toml", ZERO_M2);
    let sa = stdout_json(&run("forward", &ca, a.path(), &[]));
    let sb = stdout_json(&run("forward", &cb, b.path(), &[]));
    let read = |s: &Value| std::fs::read(PathBuf::from(s["run_dir"].as_str().unwrap()).join("spectrum.json")).unwrap();
    assert_eq!(read(&sa), read(&sb));
    let sc = stdout_json(&run("forward", &ca, a.path(), &["--seed", "9"]));
    assert_ne!(sa["run_dir"], sc["run_dir"]);
}

#[test]
fn verify_reports_consistent_forward_model() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
seed = 5

[pencil]
edges = [
  { p = { cheb = [0.3, 0.05] }, q = { cheb = [0.1, -0.2] } },
  { p = { cheb = [0.7] }, q = { samples = [0.5, 0.3, 0.0, -0.3, -0.5] } },
  { p = { cheb = [0.1, 0.1] }, q = { cheb = [0.2] } },
]

[verify]
samples = 10
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    let s = stdout_json(&run("verify", &cfg, dir.path(), &["--truncation", "16"]));
    let w = s["summary"]["wronskian"].as_f64().unwrap();
    assert!(w < 1e-9, "{w}");
    assert!(s["summary"]["edge1_identity"].as_f64().unwrap() < 1e-10);
    assert!(s["summary"]["loop_identity"].as_f64().unwrap() < 1e-10);
}

#[test]
fn edge_pipeline_on_small_window() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[pencil]
edges = [
  { p = { cheb = [0.3, 0.05] }, q = { cheb = [0.1, 0.1] } },
  { p = { cheb = [0.7, 0.0, 0.05] }, q = { cheb = [0.4] } },
  { p = { cheb = [0.0, 0.1] }, q = { cheb = [0.1] } },
]

[forward]
n_max = 10

[subspectrum]
n_window = 8

[inversion]
truncation = 16
fit = false
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    stdout_json(&run("forward", &cfg, dir.path(), &[]));
    stdout_json(&run("subspectrum", &cfg, dir.path(), &[]));
    let s = stdout_json(&run("invert-edge", &cfg, dir.path(), &[]));
    let err = s["summary"]["s_max_error"].as_f64().unwrap();
    assert!(err < 1e-4, "{err}");
    let d = artifact(&s, "edge-diagnostics.json");
    assert!((d["data"]["alpha1"].as_f64().unwrap() - d["data"]["alpha1_config"].as_f64().unwrap()).abs() < 1e-6);
}
