//! Coupled weak errors against a fine reference and the fitted order.

use tamed_spde::analysis::{fit_convergence_rate, weak_error_sweep, Coupling, StepTestFunction};
use tamed_spde::{DriftSpec, NoisePlan, NormKind, SchemeConfig, SineBasis, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(32)?;
    let eps = 0.05;
    let fine: i32 = 11;
    let plan = NoisePlan::new(1, fine as u32, 1.0)?;
    let reference = SchemeConfig::reference(
        &basis,
        eps,
        DriftSpec::allen_cahn(),
        2f64.powi(-fine),
        1 << fine,
    )?;
    let levels = [5, 6, 7, 8];
    let schemes = levels
        .iter()
        .map(|&k| {
            let t = TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-k))?;
            Ok(SchemeConfig::tamed(
                &basis,
                eps,
                DriftSpec::allen_cahn(),
                t,
                1 << k,
            )?)
        })
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let phi = StepTestFunction::new(NormKind::NodalEuclidean)?;

    let errs = weak_error_sweep(&schemes, &reference, &plan, 200, &phi, Coupling::Coupled)?;
    let mut points = Vec::new();
    for (k, e) in levels.iter().zip(&errs) {
        println!(
            "tau = 2^-{k}: error {:.4e} (+- {:.1e})",
            e.error, e.halfwidth
        );
        points.push((2f64.powi(-k), e.error));
    }
    match fit_convergence_rate(&points) {
        Ok(fit) => println!("observed order {:.3}", fit.slope),
        Err(e) => println!("no fit: {e}"),
    }
    Ok(())
}
