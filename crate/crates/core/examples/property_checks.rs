//! Randomized property checks, once for the real taming and once for a broken one.

use tamed_spde::analysis::{property_suite, TamingVariant};

fn main() {
    for variant in [TamingVariant::Exact, TamingVariant::DropExponent] {
        let report = property_suite(2, 1.0, vec![0.0, 1.0], 42, variant);
        println!("{variant:?}: all passed = {}", report.all_passed());
        for c in &report.checks {
            println!(
                "  {:<26} {:<5} worst ratio {:.3e}",
                c.name, c.passed, c.worst_ratio
            );
            if let Some(ce) = &c.counterexample {
                println!("    {ce}");
            }
        }
    }
}
