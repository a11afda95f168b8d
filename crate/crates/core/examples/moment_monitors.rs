//! Mean moments over time for two horizons.

use tamed_spde::analysis::moment_sup_estimate;
use tamed_spde::{DriftSpec, NoisePlan, SchemeConfig, SineBasis, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(64)?;
    let tau = 2f64.powi(-9);
    for (horizon, level) in [(1.0, 9), (2.0, 10)] {
        let t = TamingParams::new(1.0, 5.0, 0.5, tau)?;
        let cfg = SchemeConfig::tamed(&basis, 0.01, DriftSpec::allen_cahn(), t, 1 << level)?;
        let plan = NoisePlan::new(5, level, horizon)?;
        let steps: Vec<u64> = (0..=(1u64 << level)).step_by(64).collect();
        let r = moment_sup_estimate(&cfg, &plan, 50, &steps)?;
        println!(
            "T = {horizon}: max E|X|^2 = {:.4}, max E|X|_4^4 = {:.4}, max E|X|_sup = {:.4}",
            r.max_mean_l2_sq, r.max_mean_l4_4, r.max_mean_sup
        );
    }
    Ok(())
}
