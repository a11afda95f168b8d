//! Building a config from a preset, editing it in TOML and running a command.

use tamed_spde::config::{ExperimentConfig, Preset};
use tamed_spde::runner::cmd_converge;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = Preset::from_name("paper7-beta5")?.config();
    cfg.sampling.n_samples = 50;
    cfg.discretization.n_modes = 16;
    cfg.discretization.levels = vec![6, 7, 8];
    cfg.discretization.fine_level = 10;
    cfg.outputs.directory = std::env::temp_dir().join("tamed-spde-example");

    let text = cfg.to_toml();
    println!("{text}");
    let cfg = ExperimentConfig::from_toml(&text)?;

    let out = cmd_converge(&cfg)?;
    print!("{}", out.table.to_csv());
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
