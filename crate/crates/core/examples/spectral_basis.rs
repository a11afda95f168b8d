//! Sine basis, collocation transforms, semigroup and norms.

use tamed_spde::{NormKind, SineBasis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let basis = SineBasis::new(64)?;
    let u = basis.sine_initial();
    let nodal = u.to_physical();
    println!("u(x_32) = {:.6}", nodal.values()[31]);

    let back = nodal.to_spectral();
    let drift: f64 = back
        .coeffs()
        .iter()
        .zip(u.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("round-trip max error {drift:.2e}");

    for t in [0.0, 0.01, 0.1] {
        let e = u.semigroup_apply(t)?;
        println!("t = {t:<5} |E(t)u|_L2 = {:.6}", e.norm(NormKind::L2)?);
    }

    for kind in [
        NormKind::L2,
        NormKind::Lp { rho: 4 },
        NormKind::Sup,
        NormKind::Sobolev { gamma: 0.4 },
        NormKind::NodalEuclidean,
    ] {
        println!("{kind:?}: {:.6}", u.norm(kind)?);
    }
    Ok(())
}
