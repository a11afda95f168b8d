//! Ensemble-mean profile of a thin interface.

use tamed_spde::analysis::interface_profile;
use tamed_spde::{DriftSpec, NoisePlan, SchemeConfig, SineBasis, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(64)?;
    let t = TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-10))?;
    let cfg = SchemeConfig::tamed(&basis, 0.001, DriftSpec::allen_cahn(), t, 1024)?;
    let plan = NoisePlan::new(3, 10, 1.0)?;

    let snaps = interface_profile(&cfg, &plan, 100, &[0.0, 0.125, 1.0])?;
    for s in &snaps {
        let row: Vec<String> = s
            .mean_values
            .iter()
            .step_by(8)
            .map(|v| format!("{v:+.2}"))
            .collect();
        println!("t = {:<6} {}", s.time, row.join(" "));
    }
    Ok(())
}
