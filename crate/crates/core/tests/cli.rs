use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tamed-spde"))
}

fn small_config(dir: &std::path::Path) -> std::path::PathBuf {
    let mut c = tamed_spde::config::ExperimentConfig::default();
    c.discretization.n_modes = 8;
    c.discretization.levels = vec![4];
    c.discretization.fine_level = 6;
    c.sampling.n_samples = 10;
    c.outputs.directory = dir.join("out");
    let path = dir.join("small.toml");
    fs::write(&path, c.to_toml()).unwrap();
    path
}

#[test]
fn verify_passes_and_mutant_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["verify", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let report = fs::read_to_string(dir.path().join("verify_report.json")).unwrap();
    assert!(report.contains("\"passed\": true"));

    let bad = bin()
        .args(["verify", "--mutant", "drop-exponent", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("u = "));
}

#[test]
fn single_level_converge_explains_missing_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = bin()
        .arg("converge")
        .arg("--config")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 3 rows"));
    let csv = fs::read_to_string(dir.path().join("out/converge_errors.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[model]\nepsilon = 0.1\n").unwrap();
    let out = bin()
        .arg("converge")
        .arg("--config")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["converge", "--config", "/nonexistent/cfg.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .args(["converge", "--preset", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_override_reaches_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = bin()
        .args(["converge", "--seed", "314", "--threads", "2", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let m =
        tamed_spde::runner::load_config(&dir.path().join("out/manifest_converge.json")).unwrap();
    assert_eq!(m.sampling.master_seed, 314);
}
