//! Experiment commands. Each `cmd_*` function runs one experiment from an
//! [`ExperimentConfig`], writes its CSV/JSON artifacts plus a manifest into
//! `outputs.directory` and returns the computed results.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    fit_convergence_rate, interface_profile, moment_sup_estimate, property_suite, weak_error_sweep,
    Coupling, ErrorRow, ErrorTable, MomentReport, ProfileSnapshot, PropertyReport, RateFit,
    RateFitError, StepTestFunction, TableMeta, TamingVariant,
};
use crate::config::{moment_level, ConfigError, ExperimentConfig};
use crate::noise::NoisePlan;
use crate::nonlinearity::{derive_growth_constants, step_size_condition, DriftConstants};
use crate::scheme::{SchemeConfig, SchemeError};
use crate::spectral::SineBasis;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("property checks failed: {0}")]
    PropertyFailure(String),
}

impl RunError {
    /// 1 for invalid input or failed checks, 2 for numerical failure, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::PropertyFailure(_) => 1,
            RunError::Scheme(e) if e.blow_up_step().is_none() => {
                if matches!(e, SchemeError::Config(_) | SchemeError::Drift(_)) {
                    1
                } else {
                    2
                }
            }
            RunError::Scheme(_) => 2,
            RunError::Io { .. } => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a TOML config, or the `config` of a run manifest when the file ends in `.json`.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<RunManifest>(&text)
            .map_err(|e| ConfigError::Parse(e.to_string()))?
            .config
    } else {
        toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `f` on a dedicated pool of `threads` workers (all cores when `None`).
/// Outputs do not depend on the thread count.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityEntry {
    pub alpha: f64,
    pub level: u32,
    pub tau: f64,
    pub admissible: bool,
    pub ratio: f64,
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub config: ExperimentConfig,
    pub constants: Option<DriftConstants>,
    pub admissibility: Vec<AdmissibilityEntry>,
    pub outputs: Vec<String>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

struct Artifacts<'a> {
    cfg: &'a ExperimentConfig,
    command: &'static str,
    started: u64,
    files: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    fn new(cfg: &'a ExperimentConfig, command: &'static str) -> Result<Self, RunError> {
        cfg.validate()?;
        let dir = &cfg.outputs.directory;
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            cfg,
            command,
            started: unix_now(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.cfg.outputs.directory.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(
        mut self,
        constants: Option<DriftConstants>,
        admissibility: Vec<AdmissibilityEntry>,
    ) -> Result<Vec<PathBuf>, RunError> {
        let name = format!("manifest_{}.json", self.command);
        let outputs = self
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: unix_now(),
            config: self.cfg.clone(),
            constants,
            admissibility,
            outputs,
        };
        self.write_json(&name, &manifest)?;
        Ok(self.files)
    }
}

fn constants(cfg: &ExperimentConfig) -> Result<DriftConstants, RunError> {
    let drift = cfg.drift()?;
    derive_growth_constants(&drift).map_err(|e| RunError::Scheme(e.into()))
}

fn admissibility_rows(
    cfg: &ExperimentConfig,
    dc: &DriftConstants,
    alphas: &[f64],
    levels: &[u32],
    epsilon: f64,
) -> Result<Vec<AdmissibilityEntry>, RunError> {
    let mut out = Vec::new();
    for &alpha in alphas {
        for &level in levels {
            let tau = cfg.tau(level);
            let a = step_size_condition(dc, &cfg.taming_at(alpha, tau), epsilon)
                .map_err(|e| RunError::Scheme(e.into()))?;
            out.push(AdmissibilityEntry {
                alpha,
                level,
                tau,
                admissible: a.admissible,
                ratio: a.ratio,
            });
        }
    }
    Ok(out)
}

fn coupling(cfg: &ExperimentConfig) -> Coupling {
    if cfg.sampling.coupled {
        Coupling::Coupled
    } else {
        Coupling::Independent
    }
}

/// Weak-error tables for every `alpha`, all step sizes and all `alpha`s
/// sharing one fine noise path per sample.
pub fn error_tables(
    cfg: &ExperimentConfig,
    alphas: &[f64],
    dc: &DriftConstants,
) -> Result<Vec<ErrorTable>, RunError> {
    cfg.validate()?;
    let d = &cfg.discretization;
    let eps = cfg.model.epsilon;
    let drift = cfg.drift()?;
    let basis = SineBasis::new(d.n_modes).map_err(SchemeError::from)?;
    let plan = NoisePlan::new(cfg.sampling.master_seed, d.fine_level, d.horizon)
        .map_err(SchemeError::from)?;
    let fine_steps = 1u64 << d.fine_level;
    let reference = SchemeConfig::reference(
        &basis,
        eps,
        drift.clone(),
        cfg.tau(d.fine_level),
        fine_steps,
    )?;
    let mut schemes = Vec::with_capacity(alphas.len() * d.levels.len());
    for &alpha in alphas {
        for &level in &d.levels {
            let taming = cfg.taming_at(alpha, cfg.tau(level));
            schemes.push(SchemeConfig::tamed(
                &basis,
                eps,
                drift.clone(),
                taming,
                1u64 << level,
            )?);
        }
    }
    let phi = StepTestFunction::new(cfg.observable.norm).map_err(SchemeError::from)?;
    let errors = weak_error_sweep(
        &schemes,
        &reference,
        &plan,
        cfg.sampling.n_samples,
        &phi,
        coupling(cfg),
    )?;
    let admissible = admissibility_rows(cfg, dc, alphas, &d.levels, eps)?;
    let per_alpha = d.levels.len();
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| ErrorTable {
            meta: TableMeta {
                epsilon: eps,
                alpha,
                beta: cfg.taming.beta,
                theta: cfg.taming.theta,
                seed: cfg.sampling.master_seed,
                coupling: coupling(cfg),
            },
            rows: d
                .levels
                .iter()
                .enumerate()
                .map(|(i, &level)| {
                    let e = &errors[a * per_alpha + i];
                    let adm = &admissible[a * per_alpha + i];
                    ErrorRow {
                        level,
                        tau: cfg.tau(level),
                        weak_error: e.error,
                        mc_halfwidth: e.halfwidth,
                        n_samples: e.n_samples,
                        admissibility: crate::nonlinearity::Admissibility {
                            admissible: adm.admissible,
                            ratio: adm.ratio,
                        },
                    }
                })
                .collect(),
        })
        .collect())
}

/// Either the fitted rate or the reason no fit was made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub alpha: f64,
    pub fit: Option<RateFit>,
    pub refused: Option<String>,
    pub nonincreasing_pairs: usize,
    pub pairs: usize,
    pub all_admissible: bool,
}

impl FitSummary {
    fn new(table: &ErrorTable) -> Self {
        let fit: Result<RateFit, RateFitError> = fit_convergence_rate(&table.points());
        Self {
            alpha: table.meta.alpha,
            refused: fit.as_ref().err().map(|e| e.to_string()),
            fit: fit.ok(),
            nonincreasing_pairs: table.nonincreasing_pairs(),
            pairs: table.rows.len().saturating_sub(1),
            all_admissible: table.rows.iter().all(|r| r.admissibility.admissible),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergeOutcome {
    pub table: ErrorTable,
    pub summary: FitSummary,
    pub files: Vec<PathBuf>,
}

/// Weak errors at every configured step size for `taming.alpha`.
pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<ConvergeOutcome, RunError> {
    let mut art = Artifacts::new(cfg, "converge")?;
    let dc = constants(cfg)?;
    let table = error_tables(cfg, &[cfg.taming.alpha], &dc)?
        .pop()
        .expect("one table");
    let summary = FitSummary::new(&table);
    art.write("converge_errors.csv", &table.to_csv())?;
    art.write_json("converge_fit.json", &summary)?;
    let adm = admissibility_rows(
        cfg,
        &dc,
        &[cfg.taming.alpha],
        &cfg.discretization.levels,
        cfg.model.epsilon,
    )?;
    let files = art.finish(Some(dc), adm)?;
    Ok(ConvergeOutcome {
        table,
        summary,
        files,
    })
}

/// Column label for `alpha`: `1`, `1_2`, `1_3`, ... for unit fractions.
pub fn alpha_label(alpha: f64) -> String {
    let k = (1.0 / alpha).round();
    if k >= 1.0 && (1.0 / k - alpha).abs() < 1e-12 {
        if k == 1.0 {
            "1".to_string()
        } else {
            format!("1_{}", k as u64)
        }
    } else {
        format!("{alpha}").replace('.', "p")
    }
}

#[derive(Debug, Clone)]
pub struct Table1Outcome {
    pub tables: Vec<ErrorTable>,
    pub summaries: Vec<FitSummary>,
    pub files: Vec<PathBuf>,
}

/// Wide table: one row per step size, one weak-error column per `alpha`.
pub fn wide_csv(tables: &[ErrorTable]) -> String {
    use crate::analysis::weak::fmt_f64;
    let mut out = String::from("level,tau");
    for t in tables {
        out.push_str(&format!(",alpha_{}", alpha_label(t.meta.alpha)));
    }
    out.push('\n');
    let Some(first) = tables.first() else {
        return out;
    };
    for (i, row) in first.rows.iter().enumerate() {
        out.push_str(&format!("{},{}", row.level, fmt_f64(row.tau)));
        for t in tables {
            out.push_str(&format!(",{}", fmt_f64(t.rows[i].weak_error)));
        }
        out.push('\n');
    }
    out
}

/// The `alpha` sweep over `taming.table_alphas`.
pub fn cmd_table1(cfg: &ExperimentConfig) -> Result<Table1Outcome, RunError> {
    let mut art = Artifacts::new(cfg, "table1")?;
    let dc = constants(cfg)?;
    let alphas = cfg.taming.table_alphas.clone();
    let tables = error_tables(cfg, &alphas, &dc)?;
    let summaries: Vec<FitSummary> = tables.iter().map(FitSummary::new).collect();
    art.write("table1.csv", &wide_csv(&tables))?;
    for t in &tables {
        art.write(
            &format!("table1_alpha_{}.csv", alpha_label(t.meta.alpha)),
            &t.to_csv(),
        )?;
    }
    art.write_json("table1_summary.json", &summaries)?;
    let adm = admissibility_rows(
        cfg,
        &dc,
        &alphas,
        &cfg.discretization.levels,
        cfg.model.epsilon,
    )?;
    let files = art.finish(Some(dc), adm)?;
    Ok(Table1Outcome {
        tables,
        summaries,
        files,
    })
}

/// Profile CSV with header `time,node_index,x,mean_value`.
pub fn profile_csv(basis: &SineBasis, snaps: &[ProfileSnapshot]) -> String {
    use crate::analysis::weak::fmt_f64;
    let mut out = String::from("time,node_index,x,mean_value\n");
    for s in snaps {
        for (i, (v, x)) in s.mean_values.iter().zip(basis.grid()).enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(s.time),
                i + 1,
                fmt_f64(*x),
                fmt_f64(*v)
            ));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct InterfaceOutcome {
    /// `(epsilon, snapshots)` per configured epsilon.
    pub profiles: Vec<(f64, Vec<ProfileSnapshot>)>,
    pub files: Vec<PathBuf>,
}

/// Ensemble-mean profiles for each `interface.epsilons` entry.
pub fn cmd_interface(cfg: &ExperimentConfig) -> Result<InterfaceOutcome, RunError> {
    let mut art = Artifacts::new(cfg, "interface")?;
    let dc = constants(cfg)?;
    let i = &cfg.interface;
    let drift = cfg.drift()?;
    let basis = SineBasis::new(cfg.discretization.n_modes).map_err(SchemeError::from)?;
    let tau = cfg.tau(i.level);
    let plan = NoisePlan::new(
        cfg.sampling.master_seed,
        i.level,
        cfg.discretization.horizon,
    )
    .map_err(SchemeError::from)?;
    let mut profiles = Vec::new();
    let mut adm = Vec::new();
    for &eps in &i.epsilons {
        let scheme = SchemeConfig::tamed(
            &basis,
            eps,
            drift.clone(),
            cfg.taming_at(cfg.taming.alpha, tau),
            1u64 << i.level,
        )?;
        let snaps = interface_profile(&scheme, &plan, cfg.sampling.n_samples, &i.times)?;
        art.write(
            &format!("profile_eps_{eps:e}.csv"),
            &profile_csv(&basis, &snaps),
        )?;
        adm.extend(admissibility_rows(
            cfg,
            &dc,
            &[cfg.taming.alpha],
            &[i.level],
            eps,
        )?);
        profiles.push((eps, snaps));
    }
    let files = art.finish(Some(dc), adm)?;
    Ok(InterfaceOutcome { profiles, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub horizon: f64,
    pub tau: f64,
    pub n_steps: u64,
    pub max_mean_l2_sq: f64,
    pub max_mean_l4_4: f64,
    pub max_mean_sup: f64,
    pub mean_running_max_l2_sq: f64,
    pub finite: bool,
}

#[derive(Debug, Clone)]
pub struct MomentsOutcome {
    /// `(horizon, report)` per configured horizon.
    pub reports: Vec<(f64, MomentReport)>,
    pub summaries: Vec<MomentSummary>,
    pub files: Vec<PathBuf>,
}

/// Moment monitors of the tamed scheme at `τ = 2^-moments.level`.
pub fn cmd_moments(cfg: &ExperimentConfig) -> Result<MomentsOutcome, RunError> {
    let mut art = Artifacts::new(cfg, "moments")?;
    let dc = constants(cfg)?;
    let m = &cfg.moments;
    let eps = cfg.model.epsilon;
    let drift = cfg.drift()?;
    let basis = SineBasis::new(cfg.discretization.n_modes).map_err(SchemeError::from)?;
    let tau = f64::powi(2.0, -(m.level as i32));
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    let mut adm = Vec::new();
    for &horizon in &m.horizons {
        let fine = moment_level(horizon, m.level).map_err(|msg| ConfigError::Invalid {
            path: "moments.horizons",
            message: msg,
        })?;
        let n_steps = 1u64 << fine;
        let taming = cfg.taming_at(cfg.taming.alpha, tau);
        let mut scheme = SchemeConfig::tamed(&basis, eps, drift.clone(), taming, n_steps)?
            .with_noise_intensity(m.noise_intensity);
        if !m.drift {
            scheme = scheme.without_drift();
        }
        if !m.sine_initial {
            scheme = scheme.with_initial(basis.zeros());
        }
        let plan =
            NoisePlan::new(cfg.sampling.master_seed, fine, horizon).map_err(SchemeError::from)?;
        let mut steps: Vec<u64> = (0..=n_steps).step_by(m.stride as usize).collect();
        if steps.last() != Some(&n_steps) {
            steps.push(n_steps);
        }
        let report = moment_sup_estimate(&scheme, &plan, cfg.sampling.n_samples, &steps)?;
        art.write(&format!("moments_T{horizon}.csv"), &report.to_csv())?;
        let a = step_size_condition(&dc, &taming, eps).map_err(|e| RunError::Scheme(e.into()))?;
        adm.push(AdmissibilityEntry {
            alpha: taming.alpha,
            level: m.level,
            tau,
            admissible: a.admissible,
            ratio: a.ratio,
        });
        summaries.push(MomentSummary {
            horizon,
            tau,
            n_steps,
            max_mean_l2_sq: report.max_mean_l2_sq,
            max_mean_l4_4: report.max_mean_l4_4,
            max_mean_sup: report.max_mean_sup,
            mean_running_max_l2_sq: report.mean_running_max_l2_sq,
            finite: report.is_finite(),
        });
        reports.push((horizon, report));
    }
    art.write_json("moments_summary.json", &summaries)?;
    let files = art.finish(Some(dc), adm)?;
    Ok(MomentsOutcome {
        reports,
        summaries,
        files,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub report: PropertyReport,
    pub files: Vec<PathBuf>,
}

/// Property checks for the configured drift. The report is written even when
/// a check fails; the failure is then returned as [`RunError::PropertyFailure`].
pub fn cmd_verify(
    cfg: &ExperimentConfig,
    variant: TamingVariant,
) -> Result<VerifyOutcome, RunError> {
    let mut art = Artifacts::new(cfg, "verify")?;
    let m = &cfg.model;
    let report = property_suite(
        m.q,
        m.leading,
        m.lower.clone(),
        cfg.sampling.master_seed,
        variant,
    );
    art.write_json("verify_report.json", &report)?;
    let files = art.finish(None, Vec::new())?;
    if !report.all_passed() {
        let failed: Vec<String> = match &report.error {
            Some(e) => vec![e.clone()],
            None => report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| match &c.counterexample {
                    Some(ce) => format!("{} ({ce})", c.name),
                    None => c.name.clone(),
                })
                .collect(),
        };
        return Err(RunError::PropertyFailure(failed.join("; ")));
    }
    Ok(VerifyOutcome { report, files })
}
