//! Ensemble statistics of an observable at the final time.

use tamed_spde::analysis::StepTestFunction;
use tamed_spde::scheme::{run_ensemble, BlowupPolicy};
use tamed_spde::{DriftSpec, NoisePlan, NormKind, SchemeConfig, SineBasis, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(64)?;
    let taming = TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-8))?;
    let cfg = SchemeConfig::tamed(&basis, 0.01, DriftSpec::allen_cahn(), taming, 256)?;
    let plan = NoisePlan::new(11, 8, 1.0)?;
    let phi = StepTestFunction::new(NormKind::NodalEuclidean)?;

    let stats = run_ensemble(
        &cfg,
        &plan,
        200,
        |x| phi.eval(x),
        BlowupPolicy::SkipAndCount,
    )?;
    println!(
        "E phi(X_T) = {:.4} +- {:.4} over {} paths ({} failed)",
        stats.mean,
        1.96 * stats.std / (stats.n as f64).sqrt(),
        stats.n,
        stats.failures.len()
    );
    Ok(())
}
