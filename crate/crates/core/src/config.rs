//! Experiment configuration: a TOML document with nested sections, plus the
//! built-in presets. See `docs/config.md` for the schema.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nonlinearity::{DriftSpec, TamingParams};
use crate::spectral::NormKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: &'static str, message: String },
    #[error("unknown preset `{0}` (expected one of {presets})", presets = Preset::NAMES.join(", "))]
    UnknownPreset(String),
    #[error("could not parse config: {0}")]
    Parse(String),
}

fn invalid(path: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub epsilon: f64,
    pub q: u32,
    /// `c_f` in `f(v) = -c_f v^{2q-1} + f₀(v)`.
    pub leading: f64,
    /// Coefficients of `f₀`, lowest power first.
    pub lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub n_modes: usize,
    pub horizon: f64,
    /// Scheme step sizes `τ = T / 2^level`, coarsest first.
    pub levels: Vec<u32>,
    /// The reference integrator runs `2^fine_level` steps.
    pub fine_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TamingSection {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    /// Column order of the α sweep.
    pub table_alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub n_samples: u64,
    pub master_seed: u64,
    pub coupled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSection {
    pub norm: NormKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSection {
    pub epsilons: Vec<f64>,
    /// Step `τ = T / 2^level`.
    pub level: u32,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSection {
    /// Step `τ = 2^-level`, independent of the horizon.
    pub level: u32,
    pub horizons: Vec<f64>,
    /// Record every `stride`-th step.
    pub stride: u64,
    pub noise_intensity: f64,
    /// `false` switches the reaction term off.
    pub drift: bool,
    /// `false` starts from zero instead of `sin(πx)`.
    pub sine_initial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub discretization: DiscretizationSection,
    pub taming: TamingSection,
    pub sampling: SamplingSection,
    pub observable: ObservableSection,
    pub interface: InterfaceSection,
    pub moments: MomentsSection,
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Paper7Beta5,
    Paper7Beta5Ci,
    Paper7Beta100,
    InterfaceEps2,
    InterfaceEps3,
}

impl Preset {
    pub const NAMES: [&'static str; 5] = [
        "paper7-beta5",
        "paper7-beta5-ci",
        "paper7-beta100",
        "interface-eps2",
        "interface-eps3",
    ];

    pub fn from_name(name: &str) -> Result<Self, ConfigError> {
        Ok(match name {
            "paper7-beta5" => Preset::Paper7Beta5,
            "paper7-beta5-ci" => Preset::Paper7Beta5Ci,
            "paper7-beta100" => Preset::Paper7Beta100,
            "interface-eps2" => Preset::InterfaceEps2,
            "interface-eps3" => Preset::InterfaceEps3,
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        })
    }

    pub fn config(self) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        match self {
            Preset::Paper7Beta5 => {}
            Preset::Paper7Beta5Ci => {
                c.sampling.n_samples = 200;
                c.discretization.levels = (8..=11).collect();
                c.discretization.fine_level = 12;
            }
            Preset::Paper7Beta100 => {
                c.taming.beta = 100.0;
                c.discretization.levels = (5..=9).collect();
            }
            Preset::InterfaceEps2 => c.interface.epsilons = vec![0.01],
            Preset::InterfaceEps3 => c.interface.epsilons = vec![0.001],
        }
        c
    }
}

impl Default for ExperimentConfig {
    /// Allen–Cahn `f(v) = v - v³`, `ε = 0.01`, 64 modes, `T = 1`,
    /// `α = 1, β = 5, θ = 1/2`, 1000 samples, reference on `2^14` steps, observable
    /// on the Euclidean norm of the nodal vector.
    fn default() -> Self {
        Self {
            model: ModelSection {
                epsilon: 0.01,
                q: 2,
                leading: 1.0,
                lower: vec![0.0, 1.0],
            },
            discretization: DiscretizationSection {
                n_modes: 64,
                horizon: 1.0,
                levels: (8..=12).collect(),
                fine_level: 14,
            },
            taming: TamingSection {
                alpha: 1.0,
                beta: 5.0,
                theta: 0.5,
                table_alphas: vec![1.0, 0.5, 1.0 / 3.0, 0.25],
            },
            sampling: SamplingSection {
                n_samples: 1000,
                master_seed: 2025,
                coupled: true,
            },
            observable: ObservableSection {
                norm: NormKind::NodalEuclidean,
            },
            interface: InterfaceSection {
                epsilons: vec![0.01, 0.001],
                level: 10,
                times: vec![0.0, 0.0078125, 0.03125, 0.125, 0.5, 1.0],
            },
            moments: MomentsSection {
                level: 10,
                horizons: vec![1.0, 2.0],
                stride: 1,
                noise_intensity: 1.0,
                drift: true,
                sine_initial: true,
            },
            outputs: OutputSection {
                directory: PathBuf::from("out"),
            },
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn drift(&self) -> Result<DriftSpec, ConfigError> {
        DriftSpec::new(self.model.q, self.model.leading, self.model.lower.clone())
            .map_err(|e| invalid("model", e.to_string()))
    }

    pub fn tau(&self, level: u32) -> f64 {
        self.discretization.horizon / f64::powi(2.0, level as i32)
    }

    pub fn taming_at(&self, alpha: f64, tau: f64) -> TamingParams {
        TamingParams {
            alpha,
            beta: self.taming.beta,
            theta: self.taming.theta,
            tau,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        if !(m.epsilon > 0.0 && m.epsilon <= 1.0) {
            return Err(invalid(
                "model.epsilon",
                format!("must lie in (0, 1], got {}", m.epsilon),
            ));
        }
        self.drift()?;
        let d = &self.discretization;
        if d.n_modes < 1 {
            return Err(invalid("discretization.n_modes", "must be >= 1"));
        }
        if !(d.horizon > 0.0 && d.horizon.is_finite()) {
            return Err(invalid("discretization.horizon", "must be positive"));
        }
        if d.fine_level > 30 {
            return Err(invalid("discretization.fine_level", "must be <= 30"));
        }
        if d.levels.is_empty() {
            return Err(invalid("discretization.levels", "needs at least one level"));
        }
        if let Some(&l) = d.levels.iter().find(|&&l| l > d.fine_level) {
            return Err(invalid(
                "discretization.levels",
                format!("level {l} is finer than fine_level {}", d.fine_level),
            ));
        }
        if d.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "discretization.levels",
                "must be strictly increasing",
            ));
        }
        let t = &self.taming;
        if t.table_alphas.is_empty() {
            return Err(invalid("taming.table_alphas", "needs at least one alpha"));
        }
        for &alpha in std::iter::once(&t.alpha).chain(&t.table_alphas) {
            self.taming_at(alpha, 1.0)
                .validate()
                .map_err(|e| invalid("taming", e.to_string()))?;
        }
        if self.sampling.n_samples < 2 {
            return Err(invalid("sampling.n_samples", "must be >= 2"));
        }
        self.observable
            .norm
            .validate()
            .map_err(|e| invalid("observable.norm", e.to_string()))?;
        let i = &self.interface;
        if i.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(invalid("interface.epsilons", "each must lie in (0, 1]"));
        }
        if i.level > 30 {
            return Err(invalid("interface.level", "must be <= 30"));
        }
        let tau_i = self.tau(i.level);
        for &time in &i.times {
            let m = (time / tau_i).round();
            if !(time >= 0.0 && time <= d.horizon) || (m * tau_i - time).abs() > 1e-9 * tau_i {
                return Err(invalid(
                    "interface.times",
                    format!(
                        "time {time} is not a multiple of {tau_i} within [0, {}]",
                        d.horizon
                    ),
                ));
            }
        }
        let mo = &self.moments;
        if mo.stride == 0 {
            return Err(invalid("moments.stride", "must be >= 1"));
        }
        if !(mo.noise_intensity >= 0.0 && mo.noise_intensity.is_finite()) {
            return Err(invalid("moments.noise_intensity", "must be >= 0"));
        }
        for &h in &mo.horizons {
            moment_level(h, mo.level).map_err(|m| invalid("moments.horizons", m))?;
        }
        Ok(())
    }
}

/// Dyadic level of the noise grid when stepping `τ = 2^-level` up to `horizon`.
pub(crate) fn moment_level(horizon: f64, level: u32) -> Result<u32, String> {
    let steps = horizon * f64::powi(2.0, level as i32);
    let rounded = steps.round();
    if !(rounded >= 1.0) || (steps - rounded).abs() > 1e-9 || !(rounded as u64).is_power_of_two() {
        return Err(format!(
            "horizon {horizon} must be a power-of-two multiple of 2^-{level}"
        ));
    }
    Ok((rounded as u64).trailing_zeros())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn presets_validate() {
        for name in Preset::NAMES {
            Preset::from_name(name)
                .unwrap()
                .config()
                .validate()
                .unwrap();
        }
        assert!(matches!(
            Preset::from_name("nope"),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn default_toml_round_trips() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation_reports_field_paths() {
        let mut c = ExperimentConfig::default();
        c.discretization.levels = vec![8, 15];
        let e = c.validate().unwrap_err().to_string();
        assert!(e.starts_with("discretization.levels"), "{e}");
        let mut c = ExperimentConfig::default();
        c.sampling.n_samples = 1;
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .starts_with("sampling.n_samples"));
        let mut c = ExperimentConfig::default();
        c.taming.table_alphas = vec![3.0];
        assert!(c.validate().unwrap_err().to_string().starts_with("taming"));
        let mut c = ExperimentConfig::default();
        c.interface.times = vec![0.001];
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .starts_with("interface.times"));
        let mut c = ExperimentConfig::default();
        c.model.leading = -1.0;
        assert!(c.validate().unwrap_err().to_string().starts_with("model"));
        let mut c = ExperimentConfig::default();
        c.moments.horizons = vec![1.5];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("model = 3").is_err());
    }

    #[test]
    fn moment_levels() {
        assert_eq!(moment_level(1.0, 10), Ok(10));
        assert_eq!(moment_level(2.0, 10), Ok(11));
        assert!(moment_level(3.0, 10).is_err());
    }

    proptest! {
        #[test]
        fn toml_round_trip(
            eps in 1e-4f64..1.0,
            beta in 0.1f64..500.0,
            n in 2u64..100_000,
            seed in any::<u64>(),
            coupled in any::<bool>(),
            lvl in 1u32..10,
            extra in 0u32..4,
            rho in 1u32..5,
            modes in 1usize..256,
        ) {
            let mut c = ExperimentConfig::default();
            c.model.epsilon = eps;
            c.taming.beta = beta;
            c.sampling.n_samples = n;
            c.sampling.master_seed = seed;
            c.sampling.coupled = coupled;
            c.discretization.levels = (lvl..=lvl + extra).collect();
            c.discretization.n_modes = modes;
            c.observable.norm = NormKind::Lp { rho };
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
