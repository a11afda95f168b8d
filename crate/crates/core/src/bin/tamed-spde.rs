use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tamed_spde::analysis::TamingVariant;
use tamed_spde::config::{ExperimentConfig, Preset};
use tamed_spde::runner::{self, RunError};

#[derive(Parser)]
#[command(
    name = "tamed-spde",
    version,
    about = "Tamed exponential Euler experiments for stochastic Allen-Cahn"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML config, or a manifest JSON from an earlier run
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_parser = Preset::NAMES)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_samples: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weak errors and fitted rate for one alpha
    Converge,
    /// Weak errors for every alpha in the sweep
    Table1,
    /// Ensemble-mean profiles per epsilon
    Interface,
    /// Moment monitors over the configured horizons
    Moments,
    /// Property checks of the drift and taming
    Verify {
        /// Check a deliberately broken taming instead
        #[arg(long, value_enum)]
        mutant: Option<Mutant>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Mutant {
    DropExponent,
    Inverted,
}

fn resolve(c: &Common) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match (&c.config, &c.preset) {
        (Some(path), _) => runner::load_config(path)?,
        (None, Some(name)) => Preset::from_name(name)?.config(),
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.sampling.master_seed = seed;
    }
    if let Some(n) = c.n_samples {
        cfg.sampling.n_samples = n;
    }
    if let Some(dir) = &c.out_dir {
        cfg.outputs.directory = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let cfg = resolve(&cli.common)?;
    let files = match &cli.command {
        Command::Converge => {
            let out = runner::cmd_converge(&cfg)?;
            match (&out.summary.fit, &out.summary.refused) {
                (Some(fit), _) => eprintln!("observed order {:.4}", fit.slope),
                (None, Some(why)) => eprintln!("no rate fit: {why}"),
                _ => {}
            }
            out.files
        }
        Command::Table1 => {
            let out = runner::cmd_table1(&cfg)?;
            for s in &out.summaries {
                match &s.fit {
                    Some(fit) => eprintln!("alpha {:.4}: observed order {:.4}", s.alpha, fit.slope),
                    None => eprintln!("alpha {:.4}: no rate fit", s.alpha),
                }
            }
            out.files
        }
        Command::Interface => runner::cmd_interface(&cfg)?.files,
        Command::Moments => runner::cmd_moments(&cfg)?.files,
        Command::Verify { mutant } => {
            let variant = match mutant {
                None => TamingVariant::Exact,
                Some(Mutant::DropExponent) => TamingVariant::DropExponent,
                Some(Mutant::Inverted) => TamingVariant::Inverted,
            };
            runner::cmd_verify(&cfg, variant)?.files
        }
    };
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let threads = cli.common.threads;
    match runner::with_threads(threads, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
