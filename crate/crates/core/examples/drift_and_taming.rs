//! The Allen-Cahn drift, its tamed and regularized versions, the derived
//! growth constants and the step-size condition.

use tamed_spde::nonlinearity::{derive_growth_constants, step_size_condition};
use tamed_spde::{DriftSpec, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = DriftSpec::allen_cahn();
    let taming = TamingParams::new(1.0, 5.0, 0.5, 2f64.powi(-8))?;

    println!("{:>6} {:>12} {:>12} {:>12}", "v", "f", "f_tau", "f_delta");
    for v in [0.5, 1.0, 2.0, 5.0, 20.0] {
        println!(
            "{v:>6} {:>12.5} {:>12.5} {:>12.5}",
            f.f(v),
            f.f_tau(&taming, v),
            f.f_delta(1e-4, v)?
        );
    }

    let dc = derive_growth_constants(&f)?;
    println!("{dc:#?}");

    let eps = 0.01;
    for beta in [5.0, 100.0] {
        for k in [5, 8, 12] {
            let p = TamingParams::new(1.0, beta, 0.5, 2f64.powi(-k))?;
            let a = step_size_condition(&dc, &p, eps)?;
            println!(
                "beta = {beta:<5} tau = 2^-{k:<2} admissible = {:<5} ratio = {:.3}",
                a.admissible, a.ratio
            );
        }
    }
    Ok(())
}
