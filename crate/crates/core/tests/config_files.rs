use std::fs;

use tamed_spde::config::{ExperimentConfig, Preset};
use tamed_spde::runner::{load_config, RunError};
use tamed_spde::NormKind;

#[test]
fn toml_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    let mut c = Preset::from_name("paper7-beta100").unwrap().config();
    c.observable.norm = NormKind::Sobolev { gamma: 0.25 };
    fs::write(&path, c.to_toml()).unwrap();
    assert_eq!(load_config(&path).unwrap(), c);
}

#[test]
fn hand_written_toml() {
    let text = r#"
[model]
epsilon = 0.05
q = 3
leading = 2.0
lower = [0.0, 1.0, 0.0, -0.5]

[discretization]
n_modes = 32
horizon = 0.5
levels = [4, 5, 6]
fine_level = 9

[taming]
alpha = 0.5
beta = 10.0
theta = 0.5
table_alphas = [1.0, 0.5]

[sampling]
n_samples = 100
master_seed = 7
coupled = false

[observable]
norm = { kind = "lp", rho = 4 }

[interface]
epsilons = [0.05]
level = 6
times = [0.0, 0.25, 0.5]

[moments]
level = 8
horizons = [1.0]
stride = 4
noise_intensity = 0.5
drift = true
sine_initial = false

[outputs]
directory = "results"
"#;
    let c = ExperimentConfig::from_toml(text).unwrap();
    assert_eq!(c.model.q, 3);
    assert_eq!(c.observable.norm, NormKind::Lp { rho: 4 });
    assert!(!c.sampling.coupled);
    assert_eq!(c.tau(6), 0.5 / 64.0);
}

#[test]
fn invalid_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let mut c = ExperimentConfig::default();
    c.model.epsilon = 2.0;
    fs::write(&path, c.to_toml()).unwrap();
    let e = load_config(&path).unwrap_err();
    assert!(matches!(e, RunError::Config(_)));
    assert_eq!(e.exit_code(), 1);
    assert!(e.to_string().starts_with("model.epsilon"), "{e}");
    let missing = load_config(&dir.path().join("absent.toml")).unwrap_err();
    assert_eq!(missing.exit_code(), 3);
}

#[test]
fn documented_example_is_the_default() {
    let doc = include_str!("../docs/config.md");
    let start = doc.find("```toml\n").unwrap() + "```toml\n".len();
    let end = start + doc[start..].find("```").unwrap();
    let c = ExperimentConfig::from_toml(&doc[start..end]).unwrap();
    assert_eq!(c, ExperimentConfig::default());
}
