//! One path of the tamed scheme with snapshots and norm monitors.

use tamed_spde::scheme::{run_trajectory, Record};
use tamed_spde::{DriftSpec, NoisePlan, NormKind, SchemeConfig, SineBasis, TamingParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(64)?;
    let tau = 2f64.powi(-10);
    let taming = TamingParams::new(1.0, 5.0, 0.5, tau)?;
    let cfg = SchemeConfig::tamed(&basis, 0.01, DriftSpec::allen_cahn(), taming, 1024)?;
    let plan = NoisePlan::new(7, 10, 1.0)?;

    let rec = run_trajectory(&cfg, &plan, 0, &Record::Snapshots(vec![0, 16, 128, 1024]))?;
    for s in &rec.snapshots {
        let x = s.state.to_physical();
        println!(
            "t = {:.4}  |X|_L2 = {:.4}  X(1/2) = {:+.4}",
            s.time,
            s.state.norm(NormKind::L2)?,
            x.values()[31]
        );
    }
    println!("{:?}", rec.monitors);
    Ok(())
}
