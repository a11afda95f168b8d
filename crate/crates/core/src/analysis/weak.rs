use serde::{Deserialize, Serialize};

use crate::analysis::StepTestFunction;
use crate::noise::NoisePlan;
use crate::nonlinearity::Admissibility;
use crate::scheme::{drive_coupled, par_samples, SchemeConfig, SchemeError};
use crate::stats;

/// Normal 97.5% quantile used for Monte-Carlo halfwidths.
const Z_975: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Scheme and reference see the same Brownian path.
    Coupled,
    /// Reference runs on an independent stream.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakError {
    pub error: f64,
    pub halfwidth: f64,
    pub mean_scheme: f64,
    pub mean_reference: f64,
    pub n_samples: u64,
}

/// `|E φ(X^τ_T) − E φ(X^ref_T)|` for one scheme config.
pub fn weak_error_estimate(
    scheme: &SchemeConfig,
    reference: &SchemeConfig,
    plan: &NoisePlan,
    n_samples: u64,
    phi: &StepTestFunction,
    coupling: Coupling,
) -> Result<WeakError, SchemeError> {
    Ok(weak_error_sweep(
        std::slice::from_ref(scheme),
        reference,
        plan,
        n_samples,
        phi,
        coupling,
    )?
    .pop()
    .expect("one scheme"))
}

/// Weak errors of several scheme configs against one reference.
///
/// Every config (and, when coupled, the reference) is driven by the same fine
/// noise path per sample, so all step sizes see exactly coupled increments.
pub fn weak_error_sweep(
    schemes: &[SchemeConfig],
    reference: &SchemeConfig,
    plan: &NoisePlan,
    n_samples: u64,
    phi: &StepTestFunction,
    coupling: Coupling,
) -> Result<Vec<WeakError>, SchemeError> {
    if n_samples < 2 {
        return Err(SchemeError::Config(
            "weak errors need at least 2 samples".into(),
        ));
    }
    let k = schemes.len();
    let per_sample = par_samples(n_samples, |s| -> Result<Vec<f64>, SchemeError> {
        let wrap = |e: SchemeError| SchemeError::Sample {
            sample: s,
            source: Box::new(e),
        };
        let mut values = Vec::with_capacity(k + 1);
        match coupling {
            Coupling::Coupled => {
                let mut cfgs: Vec<&SchemeConfig> = vec![reference];
                cfgs.extend(schemes);
                for r in drive_coupled(&cfgs, plan, s, |_, _, _| {}) {
                    values.push(phi.eval(&r.map_err(wrap)?));
                }
            }
            Coupling::Independent => {
                let ref_plan = plan.with_stream(plan.stream.wrapping_add(1));
                let r = drive_coupled(&[reference], &ref_plan, s, |_, _, _| {})
                    .pop()
                    .expect("one config");
                values.push(phi.eval(&r.map_err(wrap)?));
                let cfgs: Vec<&SchemeConfig> = schemes.iter().collect();
                for r in drive_coupled(&cfgs, plan, s, |_, _, _| {}) {
                    values.push(phi.eval(&r.map_err(wrap)?));
                }
            }
        }
        Ok(values)
    });
    let rows: Vec<Vec<f64>> = per_sample.into_iter().collect::<Result<_, _>>()?;
    let column = |i: usize| -> Vec<f64> { rows.iter().map(|r| r[i]).collect() };
    let reference_vals = column(0);
    let (mean_ref, std_ref) = stats::mean_std(&reference_vals);
    let n = n_samples as f64;
    Ok((1..=k)
        .map(|i| {
            let vals = column(i);
            let (mean_s, std_s) = stats::mean_std(&vals);
            let halfwidth = match coupling {
                Coupling::Coupled => {
                    let diffs: Vec<f64> = vals
                        .iter()
                        .zip(&reference_vals)
                        .map(|(a, b)| a - b)
                        .collect();
                    Z_975 * stats::mean_std(&diffs).1 / n.sqrt()
                }
                Coupling::Independent => Z_975 * ((std_s * std_s + std_ref * std_ref) / n).sqrt(),
            };
            WeakError {
                error: (mean_s - mean_ref).abs(),
                halfwidth,
                mean_scheme: mean_s,
                mean_reference: mean_ref,
                n_samples,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub seed: u64,
    pub coupling: Coupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    /// `τ = T / 2^level`
    pub level: u32,
    pub tau: f64,
    pub weak_error: f64,
    pub mc_halfwidth: f64,
    pub n_samples: u64,
    pub admissibility: Admissibility,
}

/// Weak errors per step size, ordered by strictly decreasing `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub meta: TableMeta,
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.tau, r.weak_error)).collect()
    }

    /// Number of refinement pairs over which the error did not increase.
    pub fn nonincreasing_pairs(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[1].weak_error <= w[0].weak_error)
            .count()
    }

    pub fn is_well_formed(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].tau < w[0].tau)
            && self
                .rows
                .iter()
                .all(|r| r.weak_error.is_finite() && r.weak_error >= 0.0)
    }

    /// CSV with header `level,tau,weak_error,mc_halfwidth,n_samples,admissible,admissibility_ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "level,tau,weak_error,mc_halfwidth,n_samples,admissible,admissibility_ratio\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.level,
                fmt_f64(r.tau),
                fmt_f64(r.weak_error),
                fmt_f64(r.mc_halfwidth),
                r.n_samples,
                r.admissibility.admissible,
                fmt_f64(r.admissibility.ratio)
            ));
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{DriftSpec, TamingParams};
    use crate::spectral::SineBasis;

    fn small_setup() -> (SchemeConfig, SchemeConfig, NoisePlan) {
        let b = SineBasis::new(16).unwrap();
        let t = TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-5)).unwrap();
        let s = SchemeConfig::tamed(&b, 0.1, DriftSpec::allen_cahn(), t, 32).unwrap();
        let r =
            SchemeConfig::reference(&b, 0.1, DriftSpec::allen_cahn(), 2f64.powi(-8), 256).unwrap();
        (s, r, NoisePlan::new(77, 8, 1.0).unwrap())
    }

    #[test]
    fn scheme_against_itself_is_exactly_zero() {
        let (s, _, plan) = small_setup();
        let e = weak_error_estimate(
            &s,
            &s,
            &plan,
            20,
            &StepTestFunction::default(),
            Coupling::Coupled,
        )
        .unwrap();
        assert_eq!(e.error, 0.0);
        assert_eq!(e.halfwidth, 0.0);
    }

    #[test]
    fn sweep_and_single_agree() {
        let (s, r, plan) = small_setup();
        let phi = StepTestFunction::default();
        let single = weak_error_estimate(&s, &r, &plan, 16, &phi, Coupling::Coupled).unwrap();
        let s2 = SchemeConfig {
            tau: 2f64.powi(-6),
            n_steps: 64,
            kind: crate::scheme::SchemeKind::TamedExpEuler(
                TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-6)).unwrap(),
            ),
            ..s.clone()
        };
        let sweep =
            weak_error_sweep(&[s2, s.clone()], &r, &plan, 16, &phi, Coupling::Coupled).unwrap();
        assert_eq!(sweep[1], single);
        let indep = weak_error_estimate(&s, &r, &plan, 16, &phi, Coupling::Independent).unwrap();
        assert_eq!(indep.mean_scheme, single.mean_scheme);
        assert_ne!(indep.mean_reference, single.mean_reference);
    }

    #[test]
    fn csv_layout() {
        let t = ErrorTable {
            meta: TableMeta {
                epsilon: 0.01,
                alpha: 1.0,
                beta: 5.0,
                theta: 0.5,
                seed: 1,
                coupling: Coupling::Coupled,
            },
            rows: vec![ErrorRow {
                level: 8,
                tau: 2f64.powi(-8),
                weak_error: 0.5,
                mc_halfwidth: 0.01,
                n_samples: 1000,
                admissibility: Admissibility {
                    admissible: false,
                    ratio: 2.5,
                },
            }],
        };
        assert_eq!(
            t.to_csv(),
            "level,tau,weak_error,mc_halfwidth,n_samples,admissible,admissibility_ratio\n\
             8,3.9062500000000000e-3,5.0000000000000000e-1,1.0000000000000000e-2,1000,false,2.5000000000000000e0\n"
        );
        assert!(t.is_well_formed());
    }
}
