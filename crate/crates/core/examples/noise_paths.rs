//! Counter-based noise: random access, the increment law and coarse aggregation.

use tamed_spde::noise::{coarse_convolution_increment, sample_increment_pair, IncrementLaw};
use tamed_spde::{NoisePlan, SineBasis};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = NoisePlan::new(2025, 10, 1.0)?;
    let basis = SineBasis::new(64)?;
    let lambda = basis.eigenvalue(1)?;

    // the same (sample, mode, step) always gives the same pair
    let a = sample_increment_pair(&plan, lambda, 3, 1, 500);
    let b = sample_increment_pair(&plan, lambda, 3, 1, 500);
    assert_eq!(a, b);
    println!("sample 3, mode 1, step 500: {a:?}");

    let law = IncrementLaw::new(lambda, plan.fine_step());
    let n = 20_000u64;
    let (mut sw, mut sc, mut swc) = (0.0, 0.0, 0.0);
    for s in 0..n {
        let p = sample_increment_pair(&plan, lambda, s, 1, 0);
        sw += p.dw * p.dw;
        sc += p.conv * p.conv;
        swc += p.dw * p.conv;
    }
    let n = n as f64;
    println!("Var(dW)   {:.4e} vs {:.4e}", sw / n, law.var_dw);
    println!("Var(conv) {:.4e} vs {:.4e}", sc / n, law.var_conv);
    println!("Cov       {:.4e} vs {:.4e}", swc / n, law.cov);

    for ratio in [2, 16] {
        let c = coarse_convolution_increment(&plan, lambda, 0, 1, 0, ratio)?;
        println!("coarse convolution over {ratio} fine steps: {c:.6e}");
    }
    Ok(())
}
