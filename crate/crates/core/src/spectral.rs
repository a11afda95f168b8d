//! Sine-spectral representation of L²(0,1) with the Dirichlet Laplacian.
//!
//! A field is stored as coefficients against the orthonormal basis
//! `e_j(x) = √2 sin(jπx)`, `j = 1..=N`, whose eigenvalues under `-∂²ₓ` are
//! `λ_j = (jπ)²`. Nodal values live on the `N` interior points
//! `x_i = i/(N+1)`. The discrete sine orthogonality
//!
//! ```text
//! Σ_i sin(jπx_i) sin(kπx_i) = (N+1)/2 · δ_jk
//! ```
//!
//! makes the collocation transform pair exactly invertible, so nonlinear
//! Nemytskii operators can be evaluated nodewise and projected back.

use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("mode index {index} out of range 1..={n_modes}")]
    IndexOutOfRange { index: usize, n_modes: usize },
    #[error("basis needs at least one mode")]
    EmptyBasis,
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at position {position}")]
    NonFinite { position: usize },
    #[error("semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
}

/// Norms used by the monitors and observables.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NormKind {
    /// L²(0,1), computed from coefficients (Parseval).
    L2,
    /// L^{2ρ}(0,1), rectangle rule on the nodal values with weight 1/(N+1).
    Lp { rho: u32 },
    /// Max of nodal absolute values.
    Sup,
    /// `sqrt(Σ λ_j^γ c_j²)`.
    Sobolev { gamma: f64 },
    /// Euclidean norm of the nodal value vector, without quadrature weight.
    NodalEuclidean,
}

impl NormKind {
    pub fn validate(&self) -> Result<(), SpectralError> {
        match *self {
            NormKind::Lp { rho: 0 } => Err(SpectralError::InvalidNorm("Lp needs rho >= 1".into())),
            NormKind::Sobolev { gamma } if !(gamma < 1.0) => Err(SpectralError::InvalidNorm(
                format!("sobolev exponent must be < 1, got {gamma}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Dirichlet sine basis on `N` modes together with its collocation matrix.
#[derive(Debug)]
pub struct SineBasis {
    n_modes: usize,
    eigenvalues: Vec<f64>,
    grid: Vec<f64>,
    /// Symmetric `N×N` matrix `S[i][j] = √2 sin((i+1)(j+1)π/(N+1))`, row-major.
    synthesis: Vec<f64>,
}

impl SineBasis {
    pub fn new(n_modes: usize) -> Result<Arc<Self>, SpectralError> {
        if n_modes == 0 {
            return Err(SpectralError::EmptyBasis);
        }
        let np1 = (n_modes + 1) as f64;
        let eigenvalues = (1..=n_modes)
            .map(|j| {
                let k = j as f64 * PI;
                k * k
            })
            .collect();
        let grid = (1..=n_modes).map(|i| i as f64 / np1).collect();
        let mut synthesis = vec![0.0; n_modes * n_modes];
        for i in 0..n_modes {
            for j in 0..n_modes {
                // reduce (i+1)(j+1) mod 2(N+1) so the sine argument stays small
                let period = 2 * (n_modes + 1);
                let m = ((i + 1) * (j + 1)) % period;
                synthesis[i * n_modes + j] = 2f64.sqrt() * (m as f64 * PI / np1).sin();
            }
        }
        Ok(Arc::new(Self {
            n_modes,
            eigenvalues,
            grid,
            synthesis,
        }))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `λ_j = (jπ)²` for `1 ≤ j ≤ N`.
    pub fn eigenvalue(&self, j: usize) -> Result<f64, SpectralError> {
        if j == 0 || j > self.n_modes {
            return Err(SpectralError::IndexOutOfRange {
                index: j,
                n_modes: self.n_modes,
            });
        }
        Ok(self.eigenvalues[j - 1])
    }

    /// Nodal values from coefficients, written into `out`.
    pub(crate) fn synthesize_into(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.n_modes;
        out.fill(0.0);
        // S is symmetric: column j equals row j, so this is an axpy sweep over rows.
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let col = &self.synthesis[j * n..(j + 1) * n];
            for (o, &s) in out.iter_mut().zip(col) {
                *o += c * s;
            }
        }
    }

    /// Coefficients from nodal values, written into `out`.
    pub(crate) fn analyze_into(&self, values: &[f64], out: &mut [f64]) {
        self.synthesize_into(values, out);
        let scale = 1.0 / (self.n_modes + 1) as f64;
        for o in out.iter_mut() {
            *o *= scale;
        }
    }

    pub fn zeros(self: &Arc<Self>) -> SpectralField {
        SpectralField {
            basis: Arc::clone(self),
            coeffs: vec![0.0; self.n_modes],
        }
    }

    /// Projection of `sin(πx)`: the single coefficient `1/√2` on mode 1.
    pub fn sine_initial(self: &Arc<Self>) -> SpectralField {
        let mut f = self.zeros();
        f.coeffs[0] = std::f64::consts::FRAC_1_SQRT_2;
        f
    }

    pub fn field(self: &Arc<Self>, coeffs: Vec<f64>) -> Result<SpectralField, SpectralError> {
        check_len(self.n_modes, coeffs.len())?;
        check_finite(&coeffs)?;
        Ok(SpectralField {
            basis: Arc::clone(self),
            coeffs,
        })
    }

    pub fn physical(self: &Arc<Self>, values: Vec<f64>) -> Result<PhysicalField, SpectralError> {
        check_len(self.n_modes, values.len())?;
        check_finite(&values)?;
        Ok(PhysicalField {
            basis: Arc::clone(self),
            values,
        })
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), SpectralError> {
    if expected != got {
        return Err(SpectralError::LengthMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64]) -> Result<(), SpectralError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(position) => Err(SpectralError::NonFinite { position }),
        None => Ok(()),
    }
}

/// Coefficients of a field against `e_j(x) = √2 sin(jπx)`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    basis: Arc<SineBasis>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn basis(&self) -> &Arc<SineBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn to_physical(&self) -> PhysicalField {
        let mut values = vec![0.0; self.coeffs.len()];
        self.basis.synthesize_into(&self.coeffs, &mut values);
        PhysicalField {
            basis: Arc::clone(&self.basis),
            values,
        }
    }

    /// `E(t)u`: coefficient-wise `e^{-λ_j t}`.
    pub fn semigroup_apply(&self, t: f64) -> Result<SpectralField, SpectralError> {
        if !(t >= 0.0) {
            return Err(SpectralError::NegativeTime(t));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(c, l)| c * (-l * t).exp())
            .collect();
        Ok(SpectralField {
            basis: Arc::clone(&self.basis),
            coeffs,
        })
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64, SpectralError> {
        kind.validate()?;
        Ok(match kind {
            NormKind::L2 => l2_norm(&self.coeffs),
            NormKind::Sobolev { gamma } => self
                .coeffs
                .iter()
                .zip(self.basis.eigenvalues())
                .map(|(c, l)| l.powf(gamma) * c * c)
                .sum::<f64>()
                .sqrt(),
            NormKind::Lp { .. } | NormKind::Sup | NormKind::NodalEuclidean => {
                self.to_physical().norm(kind)?
            }
        })
    }
}

pub(crate) fn l2_norm(coeffs: &[f64]) -> f64 {
    coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Nodal `L^{2ρ}` norm with rectangle weight `1/(N+1)`.
pub(crate) fn nodal_lp_norm(values: &[f64], rho: u32) -> f64 {
    let p = 2 * rho as i32;
    let w = 1.0 / (values.len() + 1) as f64;
    (w * values.iter().map(|v| v.powi(p)).sum::<f64>()).powf(1.0 / p as f64)
}

pub(crate) fn nodal_sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Values of a field at the interior grid nodes.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    basis: Arc<SineBasis>,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis(&self) -> &Arc<SineBasis> {
        &self.basis
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut coeffs = vec![0.0; self.values.len()];
        self.basis.analyze_into(&self.values, &mut coeffs);
        SpectralField {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64, SpectralError> {
        kind.validate()?;
        Ok(match kind {
            NormKind::Lp { rho } => nodal_lp_norm(&self.values, rho),
            NormKind::Sup => nodal_sup_norm(&self.values),
            NormKind::NodalEuclidean => l2_norm(&self.values),
            NormKind::L2 | NormKind::Sobolev { .. } => self.to_spectral().norm(kind)?,
        })
    }
}
