use serde::{Deserialize, Serialize};

use crate::noise::NoisePlan;
use crate::scheme::{drive_coupled, par_samples, steps_for_times, SchemeConfig, SchemeError};
use crate::spectral;
use crate::stats::compensated_sum;

/// Ensemble means of `‖X‖²_{L²}`, `‖X‖⁴_{L⁴}` and `‖X‖_sup` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub times: Vec<f64>,
    pub mean_l2_sq: Vec<f64>,
    pub mean_l4_4: Vec<f64>,
    pub mean_sup: Vec<f64>,
    pub max_mean_l2_sq: f64,
    pub max_mean_l4_4: f64,
    pub max_mean_sup: f64,
    /// `E[max_t ‖X_t‖²_{L²}]` over the same grid.
    pub mean_running_max_l2_sq: f64,
    pub n_samples: u64,
}

impl MomentReport {
    pub fn is_finite(&self) -> bool {
        self.mean_l2_sq
            .iter()
            .chain(&self.mean_l4_4)
            .chain(&self.mean_sup)
            .all(|v| v.is_finite())
            && self.mean_running_max_l2_sq.is_finite()
    }

    /// CSV with header `time,mean_l2_sq,mean_l4_4,mean_sup`.
    pub fn to_csv(&self) -> String {
        use super::weak::fmt_f64;
        let mut out = String::from("time,mean_l2_sq,mean_l4_4,mean_sup\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.times[i]),
                fmt_f64(self.mean_l2_sq[i]),
                fmt_f64(self.mean_l4_4[i]),
                fmt_f64(self.mean_sup[i])
            ));
        }
        out
    }
}

fn mean_over_samples(per_sample: &[Vec<f64>], i: usize) -> f64 {
    compensated_sum(per_sample.iter().map(|v| v[i])) / per_sample.len() as f64
}

fn sorted_steps(steps: &[u64]) -> Vec<u64> {
    let mut s = steps.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Moment monitors at the given step indices (each in `0..=n_steps`).
pub fn moment_sup_estimate(
    cfg: &SchemeConfig,
    plan: &NoisePlan,
    n_samples: u64,
    steps: &[u64],
) -> Result<MomentReport, SchemeError> {
    if n_samples < 1 {
        return Err(SchemeError::Config("moments need at least 1 sample".into()));
    }
    let steps = sorted_steps(steps);
    if let Some(&last) = steps.last() {
        if last > cfg.n_steps {
            return Err(SchemeError::Config(format!(
                "grid step {last} beyond {} steps",
                cfg.n_steps
            )));
        }
    }
    let n = cfg.basis.n_modes();
    let runs = par_samples(n_samples, |s| {
        let mut l2 = Vec::with_capacity(steps.len());
        let mut l4 = Vec::with_capacity(steps.len());
        let mut sup = Vec::with_capacity(steps.len());
        let mut nodal = vec![0.0; n];
        let r = drive_coupled(&[cfg], plan, s, |_, step, coeffs| {
            if steps.binary_search(&step).is_ok() {
                cfg.basis.synthesize_into(coeffs, &mut nodal);
                l2.push(coeffs.iter().map(|c| c * c).sum::<f64>());
                l4.push(spectral::nodal_lp_norm(&nodal, 2).powi(4));
                sup.push(spectral::nodal_sup_norm(&nodal));
            }
        })
        .pop()
        .expect("one config");
        r.map(|_| (l2, l4, sup)).map_err(|e| SchemeError::Sample {
            sample: s,
            source: Box::new(e),
        })
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;
    let l2: Vec<Vec<f64>> = runs.iter().map(|r| r.0.clone()).collect();
    let l4: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
    let sup: Vec<Vec<f64>> = runs.iter().map(|r| r.2.clone()).collect();
    let k = steps.len();
    let mean_l2_sq: Vec<f64> = (0..k).map(|i| mean_over_samples(&l2, i)).collect();
    let mean_l4_4: Vec<f64> = (0..k).map(|i| mean_over_samples(&l4, i)).collect();
    let mean_sup: Vec<f64> = (0..k).map(|i| mean_over_samples(&sup, i)).collect();
    let running = compensated_sum(l2.iter().map(|v| v.iter().copied().fold(0.0, f64::max)))
        / n_samples as f64;
    let fmax = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MomentReport {
        times: steps.iter().map(|&s| s as f64 * cfg.tau).collect(),
        max_mean_l2_sq: fmax(&mean_l2_sq),
        max_mean_l4_4: fmax(&mean_l4_4),
        max_mean_sup: fmax(&mean_sup),
        mean_l2_sq,
        mean_l4_4,
        mean_sup,
        mean_running_max_l2_sq: running,
        n_samples,
    })
}

/// Nodal ensemble mean at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSnapshot {
    pub time: f64,
    pub mean_values: Vec<f64>,
}

/// Nodewise ensemble means of `X_t` at the requested times.
pub fn interface_profile(
    cfg: &SchemeConfig,
    plan: &NoisePlan,
    n_samples: u64,
    times: &[f64],
) -> Result<Vec<ProfileSnapshot>, SchemeError> {
    if n_samples < 1 {
        return Err(SchemeError::Config(
            "profiles need at least 1 sample".into(),
        ));
    }
    let steps = steps_for_times(cfg, times)?;
    let wanted = sorted_steps(&steps);
    let n = cfg.basis.n_modes();
    let runs = par_samples(n_samples, |s| {
        let mut snaps: Vec<Vec<f64>> = Vec::with_capacity(wanted.len());
        let r = drive_coupled(&[cfg], plan, s, |_, step, coeffs| {
            if wanted.binary_search(&step).is_ok() {
                let mut nodal = vec![0.0; n];
                cfg.basis.synthesize_into(coeffs, &mut nodal);
                snaps.push(nodal);
            }
        })
        .pop()
        .expect("one config");
        r.map(|_| snaps).map_err(|e| SchemeError::Sample {
            sample: s,
            source: Box::new(e),
        })
    });
    let runs: Vec<Vec<Vec<f64>>> = runs.into_iter().collect::<Result<_, _>>()?;
    Ok(steps
        .iter()
        .map(|step| {
            let idx = wanted.binary_search(step).expect("present");
            let mean_values = (0..n)
                .map(|node| compensated_sum(runs.iter().map(|r| r[idx][node])) / n_samples as f64)
                .collect();
            ProfileSnapshot {
                time: *step as f64 * cfg.tau,
                mean_values,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{DriftSpec, TamingParams};
    use crate::spectral::SineBasis;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn cfg(n: usize, tau: f64, steps: u64) -> SchemeConfig {
        let b = SineBasis::new(n).unwrap();
        let t = TamingParams::new(1.0, 5.0, 0.5, tau).unwrap();
        SchemeConfig::tamed(&b, 0.01, DriftSpec::allen_cahn(), t, steps).unwrap()
    }

    #[test]
    fn deterministic_report_equals_single_trajectory() {
        let c = cfg(16, 2f64.powi(-6), 64).with_noise_intensity(0.0);
        let plan = NoisePlan::new(1, 6, 1.0).unwrap();
        let grid: Vec<u64> = (0..=64).step_by(8).collect();
        let r = moment_sup_estimate(&c, &plan, 2, &grid).unwrap();
        let rec = crate::scheme::run_trajectory(
            &c,
            &plan,
            0,
            &crate::scheme::Record::Snapshots(grid.clone()),
        )
        .unwrap();
        for (i, snap) in rec.snapshots.iter().enumerate() {
            let l2 = snap.state.norm(crate::NormKind::L2).unwrap();
            assert_relative_eq!(r.mean_l2_sq[i], l2 * l2, max_relative = 1e-14);
        }
        assert!(r.is_finite());
    }

    #[test]
    fn heat_decay_profile() {
        let c = cfg(32, 2f64.powi(-7), 128)
            .without_drift()
            .with_noise_intensity(0.0);
        let plan = NoisePlan::new(1, 7, 1.0).unwrap();
        let prof = interface_profile(&c, &plan, 2, &[0.0, 0.25]).unwrap();
        let grid = c.basis.grid().to_vec();
        for (v, x) in prof[0].mean_values.iter().zip(&grid) {
            assert_relative_eq!(*v, (PI * x).sin(), epsilon = 1e-12);
        }
        let decay = (-PI * PI * 0.25).exp();
        for (v, x) in prof[1].mean_values.iter().zip(&grid) {
            assert_relative_eq!(*v, decay * (PI * x).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_noise_no_drift_norms_decay() {
        let c = cfg(16, 2f64.powi(-6), 64)
            .without_drift()
            .with_noise_intensity(0.0);
        let plan = NoisePlan::new(1, 6, 1.0).unwrap();
        let grid: Vec<u64> = (0..=64).collect();
        let r = moment_sup_estimate(&c, &plan, 2, &grid).unwrap();
        assert!(r.mean_l2_sq.windows(2).all(|w| w[1] < w[0]));
        assert!(r.mean_sup.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(r.max_mean_l2_sq, r.mean_l2_sq[0]);
    }
}
