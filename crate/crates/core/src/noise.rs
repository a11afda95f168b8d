//! Counter-based sampling of the spectrally truncated cylindrical Wiener
//! process.
//!
//! Every Gaussian pair is a pure function of
//! `(master_seed, stream, sample, mode, fine_step)`: the ChaCha key is built
//! from `(master_seed, sample, stream)`, the ChaCha stream id is the mode, and
//! the word position is `4 · fine_step`. One pair of 64-bit words feeds a
//! Box–Muller transform, so a trajectory can read the counters sequentially
//! and still agree bit-for-bit with random access.
//!
//! Per mode `j` and fine step `h` the pair `(dW, conv)` is the Brownian
//! increment together with the Ornstein–Uhlenbeck integral
//! `∫₀ʰ e^{-λ_j(h-s)} dβ_j(s)`:
//!
//! ```text
//! Var(dW) = h,  Var(conv) = (1 - e^{-2λh}) / (2λ),  Cov = (1 - e^{-λh}) / λ
//! ```
//!
//! Coarse increments over `R` fine steps are exact aggregations of these, so
//! runs at every step size `R·h` share one path.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("step {tau} is not an integer multiple of the fine step {fine_step}")]
    Misaligned { tau: f64, fine_step: f64 },
    #[error("coarse ratio must be at least 1")]
    ZeroRatio,
    #[error("invalid noise plan: {0}")]
    InvalidPlan(String),
}

/// Below this `λh` the covariance is replaced by its Taylor limit.
const DEGENERATE_LAMBDA_H: f64 = 1e-10;

/// Addressing of the noise path: a seed, a horizon, and the dyadic level of
/// the finest time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePlan {
    pub master_seed: u64,
    /// Fine step is `horizon / 2^fine_level`.
    pub fine_level: u32,
    pub horizon: f64,
    /// Independent path family; runs that must be coupled share a stream.
    pub stream: u32,
}

impl NoisePlan {
    pub fn new(master_seed: u64, fine_level: u32, horizon: f64) -> Result<Self, NoiseError> {
        let plan = Self {
            master_seed,
            fine_level,
            horizon,
            stream: 0,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(NoiseError::InvalidPlan(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.fine_level > 40 {
            return Err(NoiseError::InvalidPlan(format!(
                "fine level {} is too deep",
                self.fine_level
            )));
        }
        Ok(())
    }

    pub fn with_stream(self, stream: u32) -> Self {
        Self { stream, ..self }
    }

    pub fn fine_step(&self) -> f64 {
        self.horizon / f64::powi(2.0, self.fine_level as i32)
    }

    pub fn fine_steps(&self) -> u64 {
        1u64 << self.fine_level
    }

    /// Number of fine steps per step of size `tau`.
    pub fn ratio_for(&self, tau: f64) -> Result<u64, NoiseError> {
        let h = self.fine_step();
        let r = (tau / h).round();
        if !(r >= 1.0) || ((r * h - tau).abs() > 1e-12 * tau) {
            return Err(NoiseError::Misaligned { tau, fine_step: h });
        }
        Ok(r as u64)
    }

    fn key(&self, sample: u64) -> [u8; 32] {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&sample.to_le_bytes());
        seed[16..20].copy_from_slice(&self.stream.to_le_bytes());
        seed[20..24].copy_from_slice(b"spde");
        seed
    }

    /// Generator positioned at fine step 0 of `(sample, mode)`; mode is 1-based.
    pub(crate) fn mode_stream(&self, sample: u64, mode: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key(sample));
        rng.set_stream(mode as u64);
        rng
    }

    /// Standard normal pair at `(sample, mode, fine_step)`.
    pub fn standard_pair(&self, sample: u64, mode: usize, fine_step: u64) -> (f64, f64) {
        let mut rng = self.mode_stream(sample, mode);
        rng.set_word_pos(4 * fine_step as u128);
        box_muller(&mut rng)
    }
}

/// Two standard normals from exactly two 64-bit words.
#[inline]
pub(crate) fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    // u1 in (0, 1], u2 in [0, 1)
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

/// Per-fine-step Brownian and convolution increments of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIncrementPair {
    pub dw: f64,
    pub conv: f64,
}

/// Joint law of `(dW, conv)` for one mode over one step of length `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementLaw {
    pub var_dw: f64,
    pub var_conv: f64,
    pub cov: f64,
    /// `e^{-λh}`
    pub decay: f64,
    chol_dw: f64,
    chol_conv_1: f64,
    chol_conv_2: f64,
}

impl IncrementLaw {
    pub fn new(lambda: f64, h: f64) -> Self {
        let lh = lambda * h;
        let (var_conv, cov, resid) = if lh < DEGENERATE_LAMBDA_H {
            (h, h, 0.0)
        } else {
            let var_conv = -(-2.0 * lh).exp_m1() / (2.0 * lambda);
            let cov = -(-lh).exp_m1() / lambda;
            (var_conv, cov, (var_conv - cov * cov / h).max(0.0))
        };
        let chol_dw = h.sqrt();
        Self {
            var_dw: h,
            var_conv,
            cov,
            decay: (-lh).exp(),
            chol_dw,
            chol_conv_1: cov / chol_dw,
            chol_conv_2: resid.sqrt(),
        }
    }

    #[inline]
    pub fn map(&self, z1: f64, z2: f64) -> NoiseIncrementPair {
        NoiseIncrementPair {
            dw: self.chol_dw * z1,
            conv: self.chol_conv_1 * z1 + self.chol_conv_2 * z2,
        }
    }
}

/// Closed-form variance of the convolution increment over a step `tau`.
pub fn convolution_variance(lambda: f64, tau: f64) -> f64 {
    if lambda * tau < DEGENERATE_LAMBDA_H {
        tau
    } else {
        -(-2.0 * lambda * tau).exp_m1() / (2.0 * lambda)
    }
}

/// `(dW, conv)` for `(sample, mode, fine_step)`; `lambda` is the mode's eigenvalue.
pub fn sample_increment_pair(
    plan: &NoisePlan,
    lambda: f64,
    sample: u64,
    mode: usize,
    fine_step: u64,
) -> NoiseIncrementPair {
    let (z1, z2) = plan.standard_pair(sample, mode, fine_step);
    IncrementLaw::new(lambda, plan.fine_step()).map(z1, z2)
}

/// Convolution increment over coarse step `m` of `ratio` fine steps:
/// `Σ_k e^{-λ(R-1-k)h} conv_k`.
pub fn coarse_convolution_increment(
    plan: &NoisePlan,
    lambda: f64,
    sample: u64,
    mode: usize,
    coarse_step: u64,
    ratio: u64,
) -> Result<f64, NoiseError> {
    if ratio == 0 {
        return Err(NoiseError::ZeroRatio);
    }
    if !plan.fine_steps().is_multiple_of(ratio) {
        return Err(NoiseError::Misaligned {
            tau: ratio as f64 * plan.fine_step(),
            fine_step: plan.fine_step(),
        });
    }
    let law = IncrementLaw::new(lambda, plan.fine_step());
    let mut rng = plan.mode_stream(sample, mode);
    rng.set_word_pos(4 * (coarse_step * ratio) as u128);
    let mut acc = 0.0;
    for _ in 0..ratio {
        let (z1, z2) = box_muller(&mut rng);
        acc = law.decay * acc + law.map(z1, z2).conv;
    }
    Ok(acc)
}

/// Sequential reader of the fine path of one sample across all modes.
pub(crate) struct FinePath {
    streams: Vec<ChaCha8Rng>,
    laws: Vec<IncrementLaw>,
}

impl FinePath {
    pub fn new(plan: &NoisePlan, eigenvalues: &[f64], sample: u64) -> Self {
        let h = plan.fine_step();
        Self {
            streams: (1..=eigenvalues.len())
                .map(|j| plan.mode_stream(sample, j))
                .collect(),
            laws: eigenvalues
                .iter()
                .map(|&l| IncrementLaw::new(l, h))
                .collect(),
        }
    }

    pub fn laws(&self) -> &[IncrementLaw] {
        &self.laws
    }

    /// Draws the next fine step for every mode.
    #[inline]
    pub fn next_into(&mut self, dw: &mut [f64], conv: &mut [f64]) {
        for (((rng, law), d), c) in self
            .streams
            .iter_mut()
            .zip(&self.laws)
            .zip(dw.iter_mut())
            .zip(conv.iter_mut())
        {
            let (z1, z2) = box_muller(rng);
            let p = law.map(z1, z2);
            *d = p.dw;
            *c = p.conv;
        }
    }
}
