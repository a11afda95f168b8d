//! Polynomial drift `f(v) = -c_f v^{2q-1} + f₀(v)`, its tamed and regularized
//! variants, the structural growth constants, and the step-size condition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("q must be an integer >= 2, got {0}")]
    InvalidDegree(u32),
    #[error("leading coefficient c_f must be positive and finite, got {0}")]
    InvalidLeading(f64),
    #[error("lower-order part has degree {degree}, must be at most {max}")]
    LowerDegreeTooHigh { degree: usize, max: usize },
    #[error("non-finite lower-order coefficient at power {0}")]
    NonFiniteCoefficient(usize),
    #[error("invalid taming parameters: {0}")]
    InvalidTaming(String),
    #[error("regularization delta must lie in (0, 1], got {0}")]
    DeltaOutOfRange(f64),
    #[error("constant certification failed at u = {u}, v = {v} (excess {excess:e})")]
    Certification { u: f64, v: f64, excess: f64 },
}

/// Drift `f(v) = -leading · v^{2q-1} + Σ_k lower[k] v^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    q: u32,
    leading: f64,
    lower: Vec<f64>,
}

impl DriftSpec {
    pub fn new(q: u32, leading: f64, lower: Vec<f64>) -> Result<Self, DriftError> {
        if q < 2 {
            return Err(DriftError::InvalidDegree(q));
        }
        if !(leading > 0.0 && leading.is_finite()) {
            return Err(DriftError::InvalidLeading(leading));
        }
        let max = 2 * q as usize - 2;
        if let Some(degree) = lower.iter().rposition(|c| *c != 0.0) {
            if degree > max {
                return Err(DriftError::LowerDegreeTooHigh { degree, max });
            }
        }
        if let Some(k) = lower.iter().position(|c| !c.is_finite()) {
            return Err(DriftError::NonFiniteCoefficient(k));
        }
        let mut lower = lower;
        lower.truncate(max + 1);
        Ok(Self { q, leading, lower })
    }

    /// `f(v) = v - v³`.
    pub fn allen_cahn() -> Self {
        Self {
            q: 2,
            leading: 1.0,
            lower: vec![0.0, 1.0],
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn leading(&self) -> f64 {
        self.leading
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Exponent `2q - 2` appearing in the taming denominators.
    pub fn taming_power(&self) -> i32 {
        2 * self.q as i32 - 2
    }

    pub fn f(&self, v: f64) -> f64 {
        let top = 2 * self.q as i32 - 1;
        let low = self.lower.iter().rev().fold(0.0, |acc, c| acc * v + c);
        -self.leading * v.powi(top) + low
    }

    pub fn f_prime(&self, v: f64) -> f64 {
        let top = 2 * self.q as i32 - 1;
        let low = self
            .lower
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * v + k as f64 * c);
        -self.leading * top as f64 * v.powi(top - 1) + low
    }

    /// `f(v) / (1 + βτ^θ |v|^{(2q-2)/α})^α`.
    pub fn f_tau(&self, taming: &TamingParams, v: f64) -> f64 {
        self.f(v) / taming.denominator(self.taming_power(), v)
    }

    /// `f(v) / (1 + √δ |v|^{2q-2})`.
    pub fn f_delta(&self, delta: f64, v: f64) -> Result<f64, DriftError> {
        check_delta(delta)?;
        Ok(self.f(v) / (1.0 + delta.sqrt() * v.abs().powi(self.taming_power())))
    }

    /// Quotient-rule derivative of [`DriftSpec::f_delta`].
    pub fn f_delta_prime(&self, delta: f64, v: f64) -> Result<f64, DriftError> {
        check_delta(delta)?;
        let p = self.taming_power();
        let sd = delta.sqrt();
        let den = 1.0 + sd * v.abs().powi(p);
        // d/dv |v|^p = p v^{p-1} for even p >= 2
        let den_prime = sd * p as f64 * v.powi(p - 1);
        Ok((self.f_prime(v) * den - self.f(v) * den_prime) / (den * den))
    }

    /// Coefficient-wise `(c3, c4, c5)` with `|f(u)| ≤ c3|u|^{2q-1} + c4|u| + c5`.
    ///
    /// Intermediate powers `1 < k < 2q-1` use `|u|^k ≤ |u| + |u|^{2q-1}`.
    pub fn growth_bound(&self) -> (f64, f64, f64) {
        let mut c3 = self.leading;
        let mut c4 = 0.0;
        let mut c5 = 0.0;
        for (k, a) in self.lower.iter().enumerate() {
            let a = a.abs();
            match k {
                0 => c5 += a,
                1 => c4 += a,
                _ => {
                    c3 += a;
                    c4 += a;
                }
            }
        }
        (c3, c4, c5)
    }
}

fn check_delta(delta: f64) -> Result<(), DriftError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(DriftError::DeltaOutOfRange(delta));
    }
    Ok(())
}

/// Taming triple `(α, β, θ)` plus the step size it is tied to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TamingParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub tau: f64,
}

impl TamingParams {
    pub fn new(alpha: f64, beta: f64, theta: f64, tau: f64) -> Result<Self, DriftError> {
        let p = Self {
            alpha,
            beta,
            theta,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DriftError> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("theta", self.theta),
            ("tau", self.tau),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DriftError::InvalidTaming(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.theta * self.alpha >= 1.0 {
            return Err(DriftError::InvalidTaming(format!(
                "theta * alpha must be < 1, got {}",
                self.theta * self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    /// `(1 + βτ^θ |v|^{p/α})^α`, always `>= 1`.
    pub(crate) fn denominator(&self, power: i32, v: f64) -> f64 {
        let x = self.beta * self.tau.powf(self.theta) * v.abs().powf(power as f64 / self.alpha);
        (1.0 + x).powf(self.alpha)
    }
}

/// Structural constants of a drift, certified on bounded grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConstants {
    /// One-sided Lipschitz bound `sup f'`.
    pub lipschitz: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

const GRID_MAX: f64 = 1e3;
const GRID_MIN: f64 = 1e-6;

/// `2·10⁵` points log-uniform in `|u| ∈ [1e-6, 1e3]`, both signs, plus `0`.
pub fn verification_grid() -> Vec<f64> {
    symmetric_log_grid(100_000, 0.0)
}

/// `2n + 1` points symmetric about zero; `offset ∈ [0, 1)` shifts the log
/// positions by a fraction of one spacing.
fn symmetric_log_grid(n: usize, offset: f64) -> Vec<f64> {
    let lo = GRID_MIN.log10();
    let hi = GRID_MAX.log10();
    let step = (hi - lo) / (n - 1) as f64;
    let pos: Vec<f64> = (0..n)
        .map(|i| 10f64.powf((lo + (i as f64 + offset) * step).min(hi)))
        .collect();
    let mut g: Vec<f64> = pos.iter().rev().map(|p| -p).collect();
    g.push(0.0);
    g.extend(pos);
    g
}

/// Points per sign for the 2D coercivity certification grid.
const PAIR_GRID: usize = 2_000;

/// Derives `(L_f, c0..c5)` for `d`.
///
/// `c3..c5` come from [`DriftSpec::growth_bound`]; `L_f` is the supremum of
/// `f'` over [`verification_grid`]. For `c0` the candidates `c_f/2^k`,
/// `k = 1, 2, ...`, are tried in order: `c1, c2` are fitted from the
/// profile `h(v) = sup_u (u+v)f(u) + c0|u|^{2q}` and the resulting
/// inequality is then checked on an offset grid that was not used for fitting.
pub fn derive_growth_constants(d: &DriftSpec) -> Result<DriftConstants, DriftError> {
    if !(d.leading > 0.0) {
        return Err(DriftError::InvalidLeading(d.leading));
    }
    let (c3, c4, c5) = d.growth_bound();
    let lipschitz = verification_grid()
        .into_iter()
        .map(|u| d.f_prime(u))
        .fold(f64::NEG_INFINITY, f64::max);

    let fit_grid = symmetric_log_grid(PAIR_GRID, 0.0);
    let check_grid = symmetric_log_grid(PAIR_GRID, 0.5);
    let two_q = 2 * d.q as i32;
    let mut last_err = None;
    for k in 1..=12 {
        let c0 = d.leading / f64::powi(2.0, k);
        let (c1, c2) = fit_coercivity(d, c0, &fit_grid);
        match certify_coercivity(d, c0, c1, c2, &check_grid, two_q) {
            Ok(()) => {
                return Ok(DriftConstants {
                    lipschitz,
                    c0,
                    c1,
                    c2,
                    c3,
                    c4,
                    c5,
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one candidate tried"))
}

fn coercivity_lhs(d: &DriftSpec, c0: f64, u: f64, v: f64) -> f64 {
    (u + v) * d.f(u) + c0 * u.abs().powi(2 * d.q as i32)
}

/// Golden-section refinement of `sup_u` on `[a, b]`.
fn refine_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..80 {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + r * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - r * (b - a);
            g1 = g(x1);
        }
    }
    g1.max(g2)
}

fn fit_coercivity(d: &DriftSpec, c0: f64, grid: &[f64]) -> (f64, f64) {
    let two_q = 2 * d.q as i32;
    let fu: Vec<f64> = grid.iter().map(|&u| d.f(u)).collect();
    let base: Vec<f64> = grid
        .iter()
        .zip(&fu)
        .map(|(&u, &f)| u * f + c0 * u.abs().powi(two_q))
        .collect();
    let mut c2 = 0.0_f64;
    let mut profile = Vec::with_capacity(grid.len());
    for &v in grid {
        let (imax, _) = base
            .iter()
            .zip(&fu)
            .map(|(b, f)| b + v * f)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| {
                if x > best.1 {
                    (i, x)
                } else {
                    best
                }
            });
        let a = grid[imax.saturating_sub(1)];
        let b = grid[(imax + 1).min(grid.len() - 1)];
        let h = refine_max(|u| coercivity_lhs(d, c0, u, v), a, b)
            .max(coercivity_lhs(d, c0, grid[imax], v));
        if v.abs() <= 1.0 {
            c2 = c2.max(h);
        }
        profile.push((v, h));
    }
    let c1 = profile
        .iter()
        .filter(|(v, _)| v.abs() > 1.0)
        .map(|(v, h)| (h - c2) / v.abs().powi(two_q))
        .fold(0.0_f64, f64::max);
    // absorb rounding in the refined maxima
    (c1 * (1.0 + 1e-9), c2 * (1.0 + 1e-9) + 1e-12)
}

fn certify_coercivity(
    d: &DriftSpec,
    c0: f64,
    c1: f64,
    c2: f64,
    grid: &[f64],
    two_q: i32,
) -> Result<(), DriftError> {
    for &u in grid {
        for &v in grid {
            let lhs = coercivity_lhs(d, c0, u, v);
            let rhs = c1 * v.abs().powi(two_q) + c2;
            let excess = lhs - rhs;
            if excess > 1e-12 * (1.0 + lhs.abs().max(rhs.abs())) {
                return Err(DriftError::Certification { u, v, excess });
            }
        }
    }
    Ok(())
}

/// Outcome of the step-size condition `2 c3² τ^{1-θα} ≤ c0 β^α ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// `LHS / RHS`; admissible iff `<= 1`.
    pub ratio: f64,
}

pub fn step_size_condition(
    dc: &DriftConstants,
    p: &TamingParams,
    epsilon: f64,
) -> Result<Admissibility, DriftError> {
    p.validate()?;
    if !(epsilon > 0.0) {
        return Err(DriftError::InvalidTaming(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let lhs = 2.0 * dc.c3 * dc.c3 * p.tau.powf(1.0 - p.theta * p.alpha);
    let rhs = dc.c0 * p.beta.powf(p.alpha) * epsilon;
    Ok(Admissibility {
        admissible: lhs <= rhs,
        ratio: lhs / rhs,
    })
}
