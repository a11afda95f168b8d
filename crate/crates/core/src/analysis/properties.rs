//! Randomized and grid checks of the structural inequalities the scheme
//! relies on: taming domination and taming gap, the δ-uniform bounds on the
//! regularized drift derivative, the `(A + rB)^ρ` scalar inequality, and the
//! certified growth constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nonlinearity::{derive_growth_constants, verification_grid, DriftSpec, TamingParams};

/// Which taming function the checks exercise. Anything but `Exact` is a
/// deliberately broken variant used to confirm the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TamingVariant {
    Exact,
    /// `f / (1 + βτ^θ|v|^{(2q-2)/α})`, the outer power `α` dropped.
    DropExponent,
    /// `f · (1 + βτ^θ|v|^{(2q-2)/α})^α`.
    Inverted,
}

impl TamingVariant {
    fn eval(self, d: &DriftSpec, p: &TamingParams, v: f64) -> f64 {
        match self {
            TamingVariant::Exact => d.f_tau(p, v),
            TamingVariant::DropExponent => {
                let x =
                    p.beta * p.tau.powf(p.theta) * v.abs().powf(d.taming_power() as f64 / p.alpha);
                d.f(v) / (1.0 + x)
            }
            TamingVariant::Inverted => d.f(v) * p.denominator(d.taming_power(), v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub samples: u64,
    pub passed: bool,
    /// Largest observed `lhs / rhs` (or equivalent) over the sample.
    pub worst_ratio: f64,
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub variant: TamingVariant,
    pub checks: Vec<CheckResult>,
    /// Set when the drift itself is invalid or its constants cannot be certified.
    pub error: Option<String>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

pub const RANDOM_SAMPLES: u64 = 100_000;
const DELTAS: [f64; 3] = [1.0, 1e-2, 1e-4];

struct Tracker {
    name: &'static str,
    samples: u64,
    worst: f64,
    counterexample: Option<String>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            samples: 0,
            worst: f64::NEG_INFINITY,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, ratio: f64, describe: impl FnOnce() -> String) {
        self.samples += 1;
        if ratio > self.worst || ratio.is_nan() {
            self.worst = ratio;
        }
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(describe());
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            samples: self.samples,
            passed: self.counterexample.is_none(),
            worst_ratio: self.worst,
            counterexample: self.counterexample,
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn random_taming(rng: &mut ChaCha8Rng) -> TamingParams {
    let theta: f64 = rng.random_range(0.05..1.0);
    let alpha_max = (1.0 / theta).min(4.0) * 0.999;
    TamingParams {
        alpha: rng.random_range(0.05..alpha_max),
        beta: log_uniform(rng, 1e-3, 1e3),
        theta,
        tau: log_uniform(rng, 1e-6, 1.0),
    }
}

/// `|f_τ(u)| ≤ |f(u)|` with `1e-12` slack.
pub fn check_domination(d: &DriftSpec, variant: TamingVariant, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tracker::new("taming_domination");
    for _ in 0..RANDOM_SAMPLES {
        let u = rng.random_range(-1e3..1e3);
        let p = random_taming(&mut rng);
        let tamed = variant.eval(d, &p, u).abs();
        let plain = d.f(u).abs();
        let ok = tamed <= plain + 1e-12 * plain.max(1.0);
        t.record(ok, if plain > 0.0 { tamed / plain } else { 0.0 }, || {
            format!("u = {u:e}, params = {p:?}: |f_tau| = {tamed:e} > |f| = {plain:e}")
        });
    }
    t.finish()
}

/// `|f_τ(u) - f(u)| ≤ αβτ^θ|u|^{(2q-2)/α}|f(u)|` with `1e-9` relative slack,
/// plus the rounding floor `4ε|f(u)|` of the subtraction itself.
pub fn check_taming_gap(d: &DriftSpec, variant: TamingVariant, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let mut t = Tracker::new("taming_gap");
    for _ in 0..RANDOM_SAMPLES {
        let u = rng.random_range(-1e3..1e3);
        let p = random_taming(&mut rng);
        let f = d.f(u);
        let gap = (variant.eval(d, &p, u) - f).abs();
        let bound = p.alpha
            * p.beta
            * p.tau.powf(p.theta)
            * u.abs().powf(d.taming_power() as f64 / p.alpha)
            * f.abs();
        let allowed = bound * (1.0 + 1e-9) + 4.0 * f64::EPSILON * f.abs();
        let ok = gap <= allowed;
        t.record(ok, if allowed > 0.0 { gap / allowed } else { 0.0 }, || {
            format!("u = {u:e}, params = {p:?}: gap = {gap:e} > bound = {bound:e}")
        });
    }
    t.finish()
}

/// `(A + rB)^ρ ≤ e^{(ρ-1)υr}A^ρ + r(r^{ρ-1} + (1 + (2/υ)^{ρ-1})(1 + r^{ρ-1})e^{ρ-1})B^ρ`.
pub fn scalar_inequality_rhs(a: f64, b: f64, r: f64, upsilon: f64, rho: i32) -> f64 {
    let k = (rho - 1) as f64;
    (k * upsilon * r).exp() * a.powi(rho)
        + r * (r.powi(rho - 1)
            + (1.0 + (2.0 / upsilon).powi(rho - 1)) * (1.0 + r.powi(rho - 1)) * k.exp())
            * b.powi(rho)
}

pub fn check_scalar_inequality(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let mut t = Tracker::new("scalar_power_inequality");
    for _ in 0..RANDOM_SAMPLES {
        let a = rng.random_range(0.0..10.0);
        let b = rng.random_range(0.0..10.0);
        let r = log_uniform(&mut rng, 1e-3, 10.0);
        let upsilon = log_uniform(&mut rng, 1e-3, 10.0);
        let rho = rng.random_range(1..=6);
        let lhs = (a + r * b).powi(rho);
        let rhs = scalar_inequality_rhs(a, b, r, upsilon, rho);
        let ok = lhs <= rhs * (1.0 + 1e-9);
        t.record(ok, if rhs > 0.0 { lhs / rhs } else { 0.0 }, || {
            format!(
                "A = {a}, B = {b}, r = {r}, upsilon = {upsilon}, rho = {rho}: {lhs:e} > {rhs:e}"
            )
        });
    }
    t.finish()
}

/// `sup_u f_δ'(u)` stays below one δ-independent constant.
///
/// The constant is the grid supremum at the smallest δ plus 10% of its magnitude.
pub fn check_regularized_one_sided(d: &DriftSpec) -> CheckResult {
    let grid = verification_grid();
    let sup_at = |delta: f64| {
        grid.iter()
            .map(|&u| d.f_delta_prime(delta, u).expect("delta in range"))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let smallest = sup_at(DELTAS[DELTAS.len() - 1]);
    let bound = smallest + 0.1 * smallest.abs();
    let mut t = Tracker::new("regularized_one_sided_bound");
    for &delta in &DELTAS {
        let s = sup_at(delta);
        t.samples += grid.len() as u64 - 1;
        t.record(s <= bound, s / bound, || {
            format!("delta = {delta:e}: sup f_delta' = {s} > {bound}")
        });
    }
    t.finish()
}

/// `|f_δ'(u)| ≤ C(1 + min(|u|^{2q-2}, δ^{-1/2}))` with `C` fitted once and
/// frozen across δ.
///
/// `C` is fitted on the δ → 0 limit, i.e. from `|f'(u)| / (1 + |u|^{2q-2})`,
/// and then checked for every δ in `{1, 1e-2, 1e-4, 1e-8}`.
pub fn check_regularized_growth(d: &DriftSpec) -> CheckResult {
    let grid = verification_grid();
    let p = d.taming_power();
    let c = grid
        .iter()
        .map(|&u| d.f_prime(u).abs() / (1.0 + u.abs().powi(p)))
        .fold(0.0, f64::max);
    let mut t = Tracker::new("regularized_derivative_growth");
    for delta in [1.0f64, 1e-2, 1e-4, 1e-8] {
        let cap = delta.powf(-0.5);
        for &u in &grid {
            let lhs = d.f_delta_prime(delta, u).expect("delta in range").abs();
            let rhs = c * (1.0 + u.abs().powi(p).min(cap));
            t.record(lhs <= rhs * (1.0 + 1e-9), lhs / rhs, || {
                format!("delta = {delta:e}, u = {u:e}: |f_delta'| = {lhs:e} > {rhs:e} (C = {c})")
            });
        }
    }
    t.finish()
}

/// Growth bound and one-sided Lipschitz bound of the certified constants on
/// the verification grid.
fn check_constants(d: &DriftSpec) -> Result<CheckResult, String> {
    let dc = derive_growth_constants(d).map_err(|e| e.to_string())?;
    let top = 2 * d.q() as i32 - 1;
    let mut t = Tracker::new("growth_constants");
    for u in verification_grid() {
        let bound = dc.c3 * u.abs().powi(top) + dc.c4 * u.abs() + dc.c5;
        let f = d.f(u).abs();
        t.record(
            f <= bound * (1.0 + 1e-12) + 1e-300,
            if bound > 0.0 { f / bound } else { 0.0 },
            || format!("u = {u:e}: |f| = {f:e} > {bound:e}"),
        );
        let fp = d.f_prime(u);
        t.record(fp <= dc.lipschitz, 0.0, || {
            format!("u = {u:e}: f' = {fp} > L_f = {}", dc.lipschitz)
        });
    }
    Ok(t.finish())
}

/// Runs every check for the drift `(q, leading, lower)`.
pub fn property_suite(
    q: u32,
    leading: f64,
    lower: Vec<f64>,
    seed: u64,
    variant: TamingVariant,
) -> PropertyReport {
    let mut report = PropertyReport {
        seed,
        variant,
        checks: Vec::new(),
        error: None,
    };
    let d = match DriftSpec::new(q, leading, lower) {
        Ok(d) => d,
        Err(e) => {
            report.error = Some(format!("constant derivation failed: {e}"));
            return report;
        }
    };
    match check_constants(&d) {
        Ok(c) => report.checks.push(c),
        Err(e) => {
            report.error = Some(format!("constant derivation failed: {e}"));
            return report;
        }
    }
    report.checks.push(check_domination(&d, variant, seed));
    report.checks.push(check_taming_gap(&d, variant, seed));
    report.checks.push(check_regularized_one_sided(&d));
    report.checks.push(check_regularized_growth(&d));
    report.checks.push(check_scalar_inequality(seed));
    report
}
