//! End-to-end exercises of the command-line surface: file schemas, the
//! gen/run/bounds/verify pipeline, and exit codes (0 success, 2 validation
//! failure, 3 numerical failure).

use std::path::Path;
use std::process::Command;

fn dwls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dwls"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn dwls");
    assert!(
        out.status.success(),
        "command failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn gen_graph(dir: &Path, name: &str, nodes: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(name);
    run_ok(dwls()
        .args(["gen", "--nodes", &nodes.to_string(), "--degree", "3", "--seed"])
        .arg(seed.to_string())
        .arg("--out")
        .arg(&path));
    path
}

#[test]
fn gen_writes_schema_compatible_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_graph(dir.path(), "g.json", 24, 3);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let node = &doc["nodes"][0];
    for key in ["id", "dim", "C", "R", "z"] {
        assert!(!node[key].is_null(), "node is missing {key}");
    }
    let edge = &doc["edges"][0];
    for key in ["i", "j", "C_ij", "C_ji", "R", "z"] {
        assert!(!edge[key].is_null(), "edge is missing {key}");
    }
    // Row-major nested arrays of numbers.
    assert!(node["C"][0][0].is_number());
    assert_eq!(node["C"].as_array().unwrap().len(), 3);
}

#[test]
fn gen_then_run_produces_csv_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_graph(dir.path(), "g.json", 30, 11);
    let out_dir = dir.path().join("results");
    let stdout = run_ok(dwls()
        .args(["run", "--rounds", "12", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(&out_dir));
    assert!(stdout.contains("dwls_rounds_to_1e6"));
    let conv = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
    assert!(conv.starts_with("round,dwls_mismatch,jacobi_mismatch\n"));
    assert_eq!(conv.lines().count(), 13);
    let cov = std::fs::read_to_string(out_dir.join("depth_cov.csv")).unwrap();
    assert!(cov.starts_with("node,depth,cov_mismatch,cov_bound,applicable\n"));
    assert_eq!(cov.lines().count(), 31);
    let est = std::fs::read_to_string(out_dir.join("depth_est.csv")).unwrap();
    assert!(est.starts_with("node,depth,est_mismatch,est_bound,applicable\n"));
}

#[test]
fn bounds_report_uses_ascii_constant_names() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_graph(dir.path(), "g.json", 24, 5);
    let stdout = run_ok(dwls().args(["bounds", "--probe", "1", "--graph"]).arg(&graph));
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for key in ["rho", "lambda", "alpha1", "beta1", "alpha2", "beta2", "delta_bar", "varpi_explicit"] {
        assert!(!doc["covariance"][key].is_null(), "covariance report is missing {key}");
    }
    for key in ["kappa", "omega", "iota", "zeta", "chi_bar", "q_over", "q_under", "eps_over", "eps_under"] {
        assert!(!doc["estimate"][key].is_null(), "estimate report is missing {key}");
    }
    assert!(doc["covariance"]["rho"].as_f64().unwrap() < 1.0);
}

#[test]
fn verify_suites_run_from_cli() {
    for suite in ["riemann", "equiv", "bounds", "acyclic"] {
        let stdout = run_ok(dwls().args(["verify", "--suite", suite, "--trials", "3", "--seed", "9"]));
        assert!(stdout.contains(&format!("suite {suite}: PASS")), "{stdout}");
    }
}

#[test]
fn invalid_network_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    // C = 0 violates per-node observability.
    std::fs::write(
        &path,
        r#"{"nodes":[{"id":1,"dim":1,"C":[[0.0]],"R":[[1.0]],"z":[0.0]}],"edges":[]}"#,
    )
    .unwrap();
    let out = dwls().args(["bounds", "--probe", "1", "--graph"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = dwls()
        .args(["run", "--rounds", "3", "--graph"])
        .arg(&path)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unsatisfiable_generator_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dwls()
        .args(["gen", "--family", "random-regular", "--nodes", "5", "--degree", "3", "--seed", "1", "--out"])
        .arg(dir.path().join("g.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_is_reproducible_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_graph(dir.path(), "a.json", 20, 77);
    let b = gen_graph(dir.path(), "b.json", 20, 77);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
