use std::path::Path;
use std::process::{Command, Output};

use udfm::pipeline::{Manifest, RunConfig, SUMMARY_FILE};

fn udfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udfm"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env("UDFM_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn config_subcommand_prints_parseable_preset() {
    let out = udfm(&["config", "--preset", "full"]);
    assert!(out.status.success());
    let cfg: RunConfig = serde_json_from(&out.stdout);
    assert_eq!(cfg, RunConfig::full_scale());
}

fn serde_json_from(bytes: &[u8]) -> RunConfig {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, bytes).unwrap();
    RunConfig::load(&path).unwrap()
}

#[test]
fn generate_writes_networks_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = udfm(&["generate", "--seed", "3,4", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::load(dir.path()).unwrap();
    assert_eq!(manifest.summary.networks.len(), 2);
    assert!(manifest.summary.meshes.is_empty());
    assert!(manifest.verify(dir.path()).unwrap().is_empty());
    assert!(dir.path().join("seed3_p1/network.jsonl").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::desk();
    cfg.seeds = vec![9];
    cfg.orls = vec![3];
    let path = dir.path().join("run.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    let run_dir = dir.path().join("run");
    let out = udfm(&[
        "mesh",
        "--config",
        &out_arg(&path),
        "--orl",
        "1",
        "--isolated",
        "removed",
        "--no-vtk",
        "--out",
        &out_arg(&run_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stored = RunConfig::load(&run_dir.join("config.json")).unwrap();
    assert_eq!(stored.seeds, vec![9]);
    assert_eq!(stored.orls, vec![1]);
    assert_eq!(stored.isolated_modes, vec![udfm::pipeline::IsolatedMode::Removed]);
    assert!(!stored.write_vtk);
    let manifest = Manifest::load(&run_dir).unwrap();
    assert_eq!(manifest.summary.meshes.len(), 1);
    assert!(manifest.summary.flows.is_empty());
}

#[test]
fn all_on_empty_network_gives_matrix_permeability_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = udfm(&[
        "all", "--p-prime", "0", "--orl", "1", "--km", "1e-15", "--no-vtk", "--out", &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::load(dir.path()).unwrap();
    let flow = &manifest.summary.flows[0];
    assert!(((flow.k_eff - 1e-15) / 1e-15).abs() < 1e-8);
    assert_eq!(manifest.summary.transports.len(), 3);
    for name in ["report.md", "table_networks.csv", "table_percolation.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    assert!(dir.path().join(SUMMARY_FILE).exists());

    // report alone is idempotent
    let first = std::fs::read(dir.path().join("report.md")).unwrap();
    let again = udfm(&["report", "--out", &out_arg(dir.path())]);
    assert!(again.status.success());
    assert_eq!(std::fs::read(dir.path().join("report.md")).unwrap(), first);
}

#[test]
fn invalid_values_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = udfm(&["generate", "--km", "-1", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = udfm(&["generate", "--isolated", "sometimes"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_without_manifest_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = udfm(&["report", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(15));
}

#[test]
fn bad_thread_override_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_udfm"))
        .args(["config"])
        .env("UDFM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
