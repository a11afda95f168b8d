//! Time stepping: the tamed exponential Euler scheme, the linear-implicit
//! reference integrator, and trajectory/ensemble drivers on a shared noise
//! path.
//!
//! The tamed step is
//!
//! ```text
//! X_{m+1} = E(τ) X_m + τ E(τ) ε⁻¹ F_τ(X_m) + ∫_{t_m}^{t_{m+1}} E(t_{m+1}-s) dW(s)
//! ```
//!
//! with `F_τ` evaluated by collocation. The reference step treats the
//! Laplacian implicitly and the drift explicitly:
//!
//! ```text
//! X_{m+1,j} = (X_{m,j} + τ ε⁻¹ [F(X_m)]_j + ΔW_j) / (1 + τ λ_j)
//! ```

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{FinePath, NoiseError, NoisePlan};
use crate::nonlinearity::{DriftError, DriftSpec, TamingParams};
use crate::spectral::{self, SineBasis, SpectralError, SpectralField};
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("non-finite state after step {step}")]
    BlowUp { step: u64 },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid scheme configuration: {0}")]
    Config(String),
    #[error("sample {sample}: {source}")]
    Sample {
        sample: u64,
        #[source]
        source: Box<SchemeError>,
    },
}

impl SchemeError {
    /// The underlying blow-up step, looking through sample wrappers.
    pub fn blow_up_step(&self) -> Option<u64> {
        match self {
            SchemeError::BlowUp { step } => Some(*step),
            SchemeError::Sample { source, .. } => source.blow_up_step(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SchemeKind {
    TamedExpEuler(TamingParams),
    SemiImplicitReference,
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub epsilon: f64,
    pub tau: f64,
    pub n_steps: u64,
    pub basis: Arc<SineBasis>,
    /// `None` switches the reaction term off (`F ≡ 0`).
    pub drift: Option<DriftSpec>,
    pub kind: SchemeKind,
    pub initial: SpectralField,
    /// Multiplier on the noise increments; `0` gives deterministic runs.
    pub noise_intensity: f64,
}

impl SchemeConfig {
    /// Tamed scheme with step `taming.tau` started from `sin(πx)`.
    pub fn tamed(
        basis: &Arc<SineBasis>,
        epsilon: f64,
        drift: DriftSpec,
        taming: TamingParams,
        n_steps: u64,
    ) -> Result<Self, SchemeError> {
        let cfg = Self {
            epsilon,
            tau: taming.tau,
            n_steps,
            basis: Arc::clone(basis),
            drift: Some(drift),
            kind: SchemeKind::TamedExpEuler(taming),
            initial: basis.sine_initial(),
            noise_intensity: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn reference(
        basis: &Arc<SineBasis>,
        epsilon: f64,
        drift: DriftSpec,
        tau: f64,
        n_steps: u64,
    ) -> Result<Self, SchemeError> {
        let cfg = Self {
            epsilon,
            tau,
            n_steps,
            basis: Arc::clone(basis),
            drift: Some(drift),
            kind: SchemeKind::SemiImplicitReference,
            initial: basis.sine_initial(),
            noise_intensity: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn without_drift(mut self) -> Self {
        self.drift = None;
        self
    }

    pub fn with_initial(mut self, initial: SpectralField) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_noise_intensity(mut self, intensity: f64) -> Self {
        self.noise_intensity = intensity;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.n_steps as f64
    }

    pub fn taming(&self) -> Option<&TamingParams> {
        match &self.kind {
            SchemeKind::TamedExpEuler(t) => Some(t),
            SchemeKind::SemiImplicitReference => None,
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(SchemeError::Config(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(SchemeError::Config(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.noise_intensity >= 0.0 && self.noise_intensity.is_finite()) {
            return Err(SchemeError::Config("noise intensity must be >= 0".into()));
        }
        if self.initial.coeffs().len() != self.basis.n_modes() {
            return Err(SchemeError::Config(
                "initial state does not match the basis".into(),
            ));
        }
        if let SchemeKind::TamedExpEuler(t) = &self.kind {
            t.validate()?;
            if t.tau != self.tau {
                return Err(SchemeError::Config(format!(
                    "taming step {} differs from scheme step {}",
                    t.tau, self.tau
                )));
            }
        }
        Ok(())
    }
}

/// Precomputed per-config factors plus scratch space for one trajectory.
struct Stepper<'a> {
    cfg: &'a SchemeConfig,
    /// `e^{-λ_j τ}` (tamed) or `1/(1+τλ_j)` (reference)
    linear: Vec<f64>,
    dt_over_eps: f64,
    nodal: Vec<f64>,
    reaction: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a SchemeConfig) -> Self {
        let n = cfg.basis.n_modes();
        let linear = cfg
            .basis
            .eigenvalues()
            .iter()
            .map(|&l| match cfg.kind {
                SchemeKind::TamedExpEuler(_) => (-l * cfg.tau).exp(),
                SchemeKind::SemiImplicitReference => 1.0 / (1.0 + cfg.tau * l),
            })
            .collect();
        Self {
            cfg,
            linear,
            dt_over_eps: cfg.tau / cfg.epsilon,
            nodal: vec![0.0; n],
            reaction: vec![0.0; n],
        }
    }

    /// Writes `P F(X)` (tamed or plain) into `self.reaction`.
    fn eval_reaction(&mut self, state: &[f64]) {
        let Some(drift) = &self.cfg.drift else {
            self.reaction.fill(0.0);
            return;
        };
        self.cfg.basis.synthesize_into(state, &mut self.nodal);
        match &self.cfg.kind {
            SchemeKind::TamedExpEuler(t) => {
                for v in self.nodal.iter_mut() {
                    *v = drift.f_tau(t, *v);
                }
            }
            SchemeKind::SemiImplicitReference => {
                for v in self.nodal.iter_mut() {
                    *v = drift.f(*v);
                }
            }
        }
        self.cfg.basis.analyze_into(&self.nodal, &mut self.reaction);
    }

    /// One step in place. `noise` holds convolution increments for the tamed
    /// scheme and Brownian increments for the reference.
    fn advance(&mut self, state: &mut [f64], noise: &[f64], step: u64) -> Result<(), SchemeError> {
        self.eval_reaction(state);
        let k = self.dt_over_eps;
        let s = self.cfg.noise_intensity;
        match self.cfg.kind {
            SchemeKind::TamedExpEuler(_) => {
                for (((x, e), r), w) in state
                    .iter_mut()
                    .zip(&self.linear)
                    .zip(&self.reaction)
                    .zip(noise)
                {
                    *x = e * (*x + k * r) + s * w;
                }
            }
            SchemeKind::SemiImplicitReference => {
                for (((x, e), r), w) in state
                    .iter_mut()
                    .zip(&self.linear)
                    .zip(&self.reaction)
                    .zip(noise)
                {
                    *x = (*x + k * r + s * w) * e;
                }
            }
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(SchemeError::BlowUp { step });
        }
        Ok(())
    }
}

/// `E(τ)X + τE(τ)ε⁻¹F_τ(X) + noise` for one step.
pub fn tamed_exponential_step(
    state: &SpectralField,
    cfg: &SchemeConfig,
    noise: &SpectralField,
) -> Result<SpectralField, SchemeError> {
    if !matches!(cfg.kind, SchemeKind::TamedExpEuler(_)) {
        return Err(SchemeError::Config("expected a tamed scheme config".into()));
    }
    single_step(state, cfg, noise)
}

/// `(X + τε⁻¹F(X) + ΔW) / (1 + τλ)` coefficient-wise.
pub fn semi_implicit_reference_step(
    state: &SpectralField,
    cfg: &SchemeConfig,
    dw: &SpectralField,
) -> Result<SpectralField, SchemeError> {
    if cfg.kind != SchemeKind::SemiImplicitReference {
        return Err(SchemeError::Config("expected a reference config".into()));
    }
    single_step(state, cfg, dw)
}

fn single_step(
    state: &SpectralField,
    cfg: &SchemeConfig,
    noise: &SpectralField,
) -> Result<SpectralField, SchemeError> {
    // the noise argument is taken as given; intensity applies only to sampled paths
    let unit = SchemeConfig {
        noise_intensity: 1.0,
        ..cfg.clone()
    };
    let mut stepper = Stepper::new(&unit);
    let mut next = state.clone();
    stepper.advance(next.coeffs_mut(), noise.coeffs(), 1)?;
    Ok(next)
}

/// Running maxima of norms over every state visited, including `X₀`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Monitors {
    pub max_l2: f64,
    pub max_l4: f64,
    pub max_sup: f64,
}

impl Monitors {
    fn observe(&mut self, coeffs: &[f64], nodal: &[f64]) {
        self.max_l2 = self.max_l2.max(spectral::l2_norm(coeffs));
        self.max_l4 = self.max_l4.max(spectral::nodal_lp_norm(nodal, 2));
        self.max_sup = self.max_sup.max(spectral::nodal_sup_norm(nodal));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Endpoint,
    /// Step indices `0..=n_steps` at which to store the state.
    Snapshots(Vec<u64>),
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub state: SpectralField,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub endpoint: SpectralField,
    pub snapshots: Vec<Snapshot>,
    pub monitors: Monitors,
}

/// Converts times to step indices; each must be a multiple of `tau` in `[0, T]`.
pub fn steps_for_times(cfg: &SchemeConfig, times: &[f64]) -> Result<Vec<u64>, SchemeError> {
    times
        .iter()
        .map(|&t| {
            let m = (t / cfg.tau).round();
            if !(m >= 0.0) || m > cfg.n_steps as f64 || (m * cfg.tau - t).abs() > 1e-9 * cfg.tau {
                return Err(SchemeError::Config(format!(
                    "time {t} is not on the step grid of size {} up to {}",
                    cfg.tau,
                    cfg.horizon()
                )));
            }
            Ok(m as u64)
        })
        .collect()
}

fn check_alignment(cfg: &SchemeConfig, plan: &NoisePlan) -> Result<u64, SchemeError> {
    cfg.validate()?;
    plan.validate()?;
    let h = cfg.horizon();
    if (h - plan.horizon).abs() > 1e-12 * plan.horizon {
        return Err(SchemeError::Config(format!(
            "scheme horizon {h} differs from noise horizon {}",
            plan.horizon
        )));
    }
    Ok(plan.ratio_for(cfg.tau)?)
}

/// Runs several configs on the fine path of one sample, calling
/// `observe(config_index, step, coeffs)` for the initial state and after
/// every step. Each entry of the result is that config's endpoint.
pub fn drive_coupled(
    cfgs: &[&SchemeConfig],
    plan: &NoisePlan,
    sample: u64,
    mut observe: impl FnMut(usize, u64, &[f64]),
) -> Vec<Result<SpectralField, SchemeError>> {
    let ratios: Vec<Result<u64, SchemeError>> =
        cfgs.iter().map(|c| check_alignment(c, plan)).collect();
    let Some(first) = cfgs.first() else {
        return Vec::new();
    };
    let basis = &first.basis;
    let n = basis.n_modes();
    let mut outcome: Vec<Result<(), SchemeError>> = ratios
        .iter()
        .zip(cfgs)
        .map(|(r, c)| match r {
            Err(e) => Err(e.clone()),
            Ok(_) if c.basis.n_modes() != n => Err(SchemeError::Config(
                "coupled configs must share a basis size".into(),
            )),
            Ok(_) => Ok(()),
        })
        .collect();
    let mut steppers: Vec<Stepper> = cfgs.iter().map(|c| Stepper::new(c)).collect();
    let mut states: Vec<Vec<f64>> = cfgs.iter().map(|c| c.initial.coeffs().to_vec()).collect();
    for (i, s) in states.iter().enumerate() {
        if outcome[i].is_ok() {
            observe(i, 0, s);
        }
    }
    let noisy = cfgs.iter().any(|c| c.noise_intensity != 0.0);
    let mut path = FinePath::new(plan, basis.eigenvalues(), sample);
    let decay: Vec<f64> = path.laws().iter().map(|l| l.decay).collect();
    let mut dw = vec![0.0; n];
    let mut conv = vec![0.0; n];
    let mut acc_dw = vec![vec![0.0; n]; cfgs.len()];
    let mut acc_conv = vec![vec![0.0; n]; cfgs.len()];
    let ratio: Vec<u64> = ratios.iter().map(|r| *r.as_ref().unwrap_or(&1)).collect();

    for k in 0..plan.fine_steps() {
        if noisy {
            path.next_into(&mut dw, &mut conv);
        }
        for i in 0..cfgs.len() {
            if outcome[i].is_err() {
                continue;
            }
            let (ad, ac) = (&mut acc_dw[i], &mut acc_conv[i]);
            for j in 0..n {
                ad[j] += dw[j];
                ac[j] = decay[j] * ac[j] + conv[j];
            }
            if (k + 1) % ratio[i] != 0 {
                continue;
            }
            let step = (k + 1) / ratio[i];
            let noise = match cfgs[i].kind {
                SchemeKind::TamedExpEuler(_) => &acc_conv[i],
                SchemeKind::SemiImplicitReference => &acc_dw[i],
            };
            match steppers[i].advance(&mut states[i], noise, step) {
                Ok(()) => observe(i, step, &states[i]),
                Err(e) => outcome[i] = Err(e),
            }
            acc_dw[i].fill(0.0);
            acc_conv[i].fill(0.0);
        }
    }
    outcome
        .into_iter()
        .zip(states)
        .map(|(o, s)| o.and_then(|_| Ok(basis.field(s)?)))
        .collect()
}

/// Runs one trajectory, recording the endpoint, optional snapshots, and norm monitors.
pub fn run_trajectory(
    cfg: &SchemeConfig,
    plan: &NoisePlan,
    sample: u64,
    record: &Record,
) -> Result<TrajectoryRecord, SchemeError> {
    let wanted: &[u64] = match record {
        Record::Endpoint => &[],
        Record::Snapshots(steps) => steps,
    };
    if let Some(bad) = wanted.iter().find(|&&s| s > cfg.n_steps) {
        return Err(SchemeError::Config(format!(
            "snapshot step {bad} beyond {} steps",
            cfg.n_steps
        )));
    }
    let mut monitors = Monitors::default();
    let mut snapshots = Vec::new();
    let mut nodal = vec![0.0; cfg.basis.n_modes()];
    let endpoint = drive_coupled(&[cfg], plan, sample, |_, step, coeffs| {
        cfg.basis.synthesize_into(coeffs, &mut nodal);
        monitors.observe(coeffs, &nodal);
        if wanted.contains(&step) {
            snapshots.push(Snapshot {
                step,
                time: step as f64 * cfg.tau,
                state: cfg.basis.field(coeffs.to_vec()).expect("finite after step"),
            });
        }
    })
    .pop()
    .expect("one config")?;
    Ok(TrajectoryRecord {
        endpoint,
        snapshots,
        monitors,
    })
}

/// Maps `f` over sample ids in parallel; output order follows sample order.
pub fn par_samples<T: Send>(n_samples: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..n_samples).into_par_iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlowupPolicy {
    Abort,
    SkipAndCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: f64,
    pub std: f64,
    pub n: u64,
    /// Sample ids that blew up (only populated under `SkipAndCount`).
    pub failures: Vec<u64>,
}

/// Mean and standard deviation of `observable(X_T)` over `n_samples` paths.
pub fn run_ensemble(
    cfg: &SchemeConfig,
    plan: &NoisePlan,
    n_samples: u64,
    observable: impl Fn(&SpectralField) -> f64 + Sync + Send,
    policy: BlowupPolicy,
) -> Result<EnsembleStats, SchemeError> {
    if n_samples < 2 {
        return Err(SchemeError::Config(
            "an ensemble needs at least 2 samples".into(),
        ));
    }
    check_alignment(cfg, plan)?;
    let results = par_samples(n_samples, |s| {
        drive_coupled(&[cfg], plan, s, |_, _, _| {})
            .pop()
            .expect("one config")
            .map(|x| observable(&x))
    });
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (s, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => match policy {
                BlowupPolicy::Abort => {
                    return Err(SchemeError::Sample {
                        sample: s as u64,
                        source: Box::new(e),
                    })
                }
                BlowupPolicy::SkipAndCount => failures.push(s as u64),
            },
        }
    }
    let (mean, std) = stats::mean_std(&values);
    Ok(EnsembleStats {
        mean,
        std,
        n: values.len() as u64,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::coarse_convolution_increment;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn basis() -> Arc<SineBasis> {
        SineBasis::new(64).unwrap()
    }

    fn tamed_cfg(b: &Arc<SineBasis>, tau: f64, n: u64) -> SchemeConfig {
        let t = TamingParams::new(1.0, 5.0, 0.5, tau).unwrap();
        SchemeConfig::tamed(b, 0.01, DriftSpec::allen_cahn(), t, n).unwrap()
    }

    #[test]
    fn zero_state_is_fixed_without_noise() {
        let b = basis();
        let cfg = tamed_cfg(&b, 1e-3, 1);
        let out = tamed_exponential_step(&b.zeros(), &cfg, &b.zeros()).unwrap();
        assert!(out.coeffs().iter().all(|&c| c == 0.0));
        let r = SchemeConfig::reference(&b, 0.01, DriftSpec::allen_cahn(), 1e-3, 1).unwrap();
        let out = semi_implicit_reference_step(&b.zeros(), &r, &b.zeros()).unwrap();
        assert!(out.coeffs().iter().all(|&c| c == 0.0));
        assert!(tamed_exponential_step(&b.zeros(), &r, &b.zeros()).is_err());
    }

    #[test]
    fn untamed_limit_single_mode_step() {
        // β → 0 so the taming denominator is 1 up to rounding
        let b = basis();
        let tau = 0.1;
        let t = TamingParams::new(1.0, 1e-300, 0.5, tau).unwrap();
        let cfg = SchemeConfig::tamed(&b, 1.0, DriftSpec::allen_cahn(), t, 1).unwrap();
        let x0 = b.sine_initial();
        let out = tamed_exponential_step(&x0, &cfg, &b.zeros()).unwrap();
        // oracle: √2 ∫₀¹ f(sin πx) sin(πx) dx by composite Simpson with 20000 panels
        let g = |x: f64| {
            let s = (PI * x).sin();
            2f64.sqrt() * (s - s * s * s) * s
        };
        let n = 20_000;
        let dx = 1.0 / n as f64;
        let mut acc = g(0.0) + g(1.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * dx);
        }
        let c = acc * dx / 3.0;
        // closed form: √2 (1/2 - 3/8) = √2/8 = (1/√2)(1 - 3/4)
        assert_relative_eq!(c, FRAC_1_SQRT_2 * 0.25, max_relative = 1e-10);
        let expect = (-0.1 * PI * PI).exp() * (FRAC_1_SQRT_2 + 0.1 * c);
        assert_relative_eq!(out.coeffs()[0], expect, max_relative = 1e-12);
    }

    #[test]
    fn reference_linear_damping() {
        let b = basis();
        let tau = 2f64.powi(-14);
        let cfg = SchemeConfig::reference(&b, 0.01, DriftSpec::allen_cahn(), tau, 1)
            .unwrap()
            .without_drift();
        let out = semi_implicit_reference_step(&b.sine_initial(), &cfg, &b.zeros()).unwrap();
        let factor = out.coeffs()[0] / FRAC_1_SQRT_2;
        assert_relative_eq!(
            factor,
            1.0 / (1.0 + PI * PI / 16384.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(factor, 0.999_398, epsilon = 1e-6);
        // high modes are damped harder
        let spike = b.field(vec![1.0; 64]).unwrap();
        let out = semi_implicit_reference_step(&spike, &cfg, &b.zeros()).unwrap();
        assert!(out.coeffs().windows(2).all(|w| w[1].abs() < w[0].abs()));
    }

    #[test]
    fn blow_up_is_reported_with_step() {
        let b = SineBasis::new(8).unwrap();
        let t = TamingParams::new(1.0, 1e-300, 0.5, 0.5).unwrap();
        let cfg = SchemeConfig::tamed(&b, 1e-3, DriftSpec::allen_cahn(), t, 64)
            .unwrap()
            .with_initial(b.field(vec![10.0; 8]).unwrap())
            .with_noise_intensity(0.0);
        let plan = NoisePlan::new(1, 6, cfg.horizon()).unwrap();
        let err = run_trajectory(&cfg, &plan, 0, &Record::Endpoint).unwrap_err();
        assert!(matches!(err, SchemeError::BlowUp { step } if (1..=64).contains(&step)));
    }

    #[test]
    fn zero_steps_returns_initial() {
        let b = basis();
        let cfg = SchemeConfig::reference(&b, 0.01, DriftSpec::allen_cahn(), 0.5, 2).unwrap();
        let plan = NoisePlan::new(3, 1, 1.0).unwrap();
        let rec = run_trajectory(&cfg, &plan, 0, &Record::Snapshots(vec![0])).unwrap();
        assert_eq!(rec.snapshots[0].state, b.sine_initial());
    }

    #[test]
    fn deterministic_heat_flow_is_exact_semigroup() {
        let b = basis();
        let tau = 2f64.powi(-6);
        let cfg = tamed_cfg(&b, tau, 64)
            .without_drift()
            .with_noise_intensity(0.0);
        let plan = NoisePlan::new(3, 6, 1.0).unwrap();
        let rec = run_trajectory(&cfg, &plan, 0, &Record::Endpoint).unwrap();
        let exact = b.sine_initial().semigroup_apply(1.0).unwrap();
        assert_relative_eq!(
            rec.endpoint.coeffs()[0],
            exact.coeffs()[0],
            max_relative = 1e-12
        );
    }

    #[test]
    fn monitors_match_snapshot_recomputation() {
        let b = basis();
        let tau = 2f64.powi(-8);
        let cfg = tamed_cfg(&b, tau, 256);
        let plan = NoisePlan::new(11, 10, 1.0).unwrap();
        let all: Vec<u64> = (0..=256).collect();
        let rec = run_trajectory(&cfg, &plan, 4, &Record::Snapshots(all)).unwrap();
        assert_eq!(rec.snapshots.len(), 257);
        let max_l2 = rec
            .snapshots
            .iter()
            .map(|s| s.state.norm(spectral::NormKind::L2).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(rec.monitors.max_l2, max_l2);
        let max_sup = rec
            .snapshots
            .iter()
            .map(|s| s.state.norm(spectral::NormKind::Sup).unwrap())
            .fold(0.0, f64::max);
        assert_relative_eq!(rec.monitors.max_sup, max_sup, max_relative = 1e-15);
        assert_eq!(rec.snapshots.last().unwrap().state, rec.endpoint);
    }

    #[test]
    fn coarse_noise_in_driver_matches_pure_aggregation() {
        // one tamed step from 0 with F ≡ 0 yields exactly the coarse convolution increment
        let b = SineBasis::new(8).unwrap();
        let plan = NoisePlan::new(5, 4, 1.0).unwrap();
        let t = TamingParams::new(1.0, 5.0, 0.5, 0.25).unwrap();
        let cfg = SchemeConfig::tamed(&b, 0.5, DriftSpec::allen_cahn(), t, 4)
            .unwrap()
            .without_drift()
            .with_initial(b.zeros());
        let rec = run_trajectory(&cfg, &plan, 2, &Record::Snapshots(vec![1])).unwrap();
        for j in 1..=8 {
            let lambda = b.eigenvalue(j).unwrap();
            let expect = coarse_convolution_increment(&plan, lambda, 2, j, 0, 4).unwrap();
            assert_relative_eq!(
                rec.snapshots[0].state.coeffs()[j - 1],
                expect,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn same_config_twice_is_identical_in_coupled_drive() {
        let b = basis();
        let cfg = tamed_cfg(&b, 2f64.powi(-6), 64);
        let plan = NoisePlan::new(9, 8, 1.0).unwrap();
        let out = drive_coupled(&[&cfg, &cfg], &plan, 7, |_, _, _| {});
        assert_eq!(out[0].as_ref().unwrap(), out[1].as_ref().unwrap());
        let solo = run_trajectory(&cfg, &plan, 7, &Record::Endpoint).unwrap();
        assert_eq!(&solo.endpoint, out[0].as_ref().unwrap());
    }

    #[test]
    fn misaligned_and_mismatched_configs_error() {
        let b = basis();
        let cfg = tamed_cfg(&b, 2f64.powi(-6), 64);
        let plan = NoisePlan::new(9, 4, 1.0).unwrap();
        assert!(matches!(
            run_trajectory(&cfg, &plan, 0, &Record::Endpoint),
            Err(SchemeError::Noise(NoiseError::Misaligned { .. }))
        ));
        let plan2 = NoisePlan::new(9, 8, 2.0).unwrap();
        assert!(matches!(
            run_trajectory(&cfg, &plan2, 0, &Record::Endpoint),
            Err(SchemeError::Config(_))
        ));
        assert!(steps_for_times(&cfg, &[0.0, 0.5, 1.0]).is_ok());
        assert!(steps_for_times(&cfg, &[0.001]).is_err());
        assert!(steps_for_times(&cfg, &[2.0]).is_err());
    }

    #[test]
    fn ensemble_of_constant_observable() {
        let b = SineBasis::new(8).unwrap();
        let cfg = SchemeConfig::reference(&b, 0.1, DriftSpec::allen_cahn(), 0.125, 8).unwrap();
        let plan = NoisePlan::new(1, 3, 1.0).unwrap();
        let s = run_ensemble(&cfg, &plan, 16, |_| 3.5, BlowupPolicy::Abort).unwrap();
        assert_eq!((s.mean, s.std, s.n), (3.5, 0.0, 16));
        assert!(run_ensemble(&cfg, &plan, 1, |_| 0.0, BlowupPolicy::Abort).is_err());
    }
}
