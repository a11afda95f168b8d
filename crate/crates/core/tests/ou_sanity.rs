use tamed_spde::scheme::{run_ensemble, BlowupPolicy};
use tamed_spde::{DriftSpec, NoisePlan, SchemeConfig, SineBasis, TamingParams};

// With no drift each mode is an exact OU process, whatever the step size.
#[test]
fn linear_modes_have_exact_ou_variance() {
    let basis = SineBasis::new(8).unwrap();
    let tau = 2f64.powi(-4);
    let t = TamingParams::new(1.0, 5.0, 0.5, tau).unwrap();
    let cfg = SchemeConfig::tamed(&basis, 0.5, DriftSpec::allen_cahn(), t, 32)
        .unwrap()
        .without_drift()
        .with_initial(basis.zeros());
    let plan = NoisePlan::new(21, 7, 2.0).unwrap();
    let n = 4000;
    for mode in [1usize, 3] {
        let lambda = basis.eigenvalue(mode).unwrap();
        let s = run_ensemble(
            &cfg,
            &plan,
            n,
            |x| x.coeffs()[mode - 1].powi(2),
            BlowupPolicy::Abort,
        )
        .unwrap();
        let exact = -(-2.0 * lambda * 2.0f64).exp_m1() / (2.0 * lambda);
        let se = s.std / (n as f64).sqrt();
        assert!(
            (s.mean - exact).abs() <= 4.0 * se,
            "mode {mode}: {} vs {exact}",
            s.mean
        );
    }
}
