use std::fs;

use tamed_spde::config::ExperimentConfig;
use tamed_spde::runner::{cmd_converge, cmd_interface, load_config, with_threads};

fn small(dir: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.discretization.n_modes = 16;
    c.discretization.levels = vec![4, 5, 6];
    c.discretization.fine_level = 8;
    c.sampling.n_samples = 24;
    c.interface.level = 6;
    c.interface.epsilons = vec![0.01];
    c.interface.times = vec![0.0, 0.5, 1.0];
    c.outputs.directory = dir.to_path_buf();
    c
}

#[test]
fn thread_count_does_not_change_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    with_threads(Some(1), || cmd_converge(&small(a.path()))).unwrap();
    with_threads(Some(3), || cmd_converge(&small(b.path()))).unwrap();
    with_threads(Some(1), || cmd_interface(&small(a.path()))).unwrap();
    with_threads(Some(4), || cmd_interface(&small(b.path()))).unwrap();
    for name in ["converge_errors.csv", "profile_eps_1e-2.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn seeds_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ca = small(a.path());
    let mut cb = small(b.path());
    cb.sampling.master_seed += 1;
    let ra = cmd_converge(&ca).unwrap();
    let rb = cmd_converge(&cb).unwrap();
    assert_ne!(ra.table.rows[0].weak_error, rb.table.rows[0].weak_error);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let first = cmd_converge(&small(a.path())).unwrap();
    let before = fs::read(a.path().join("converge_errors.csv")).unwrap();
    let replayed = load_config(&a.path().join("manifest_converge.json")).unwrap();
    let second = cmd_converge(&replayed).unwrap();
    assert_eq!(first.table, second.table);
    assert_eq!(
        before,
        fs::read(a.path().join("converge_errors.csv")).unwrap()
    );
}
