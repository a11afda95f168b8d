use serde::{Deserialize, Serialize};

use crate::spectral::{NormKind, SpectralError, SpectralField};

/// Piecewise-constant test function `φ(X) = sin(⌊10‖X‖⌋ / 10)`.
///
/// On every bin `[a + k/10, a + (k+1)/10)` it takes the value `sin(a + k/10)`,
/// so `|φ| ≤ 1` and it is discontinuous at each bin edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTestFunction {
    pub norm: NormKind,
}

impl Default for StepTestFunction {
    fn default() -> Self {
        Self { norm: NormKind::L2 }
    }
}

impl StepTestFunction {
    pub const BIN_WIDTH: f64 = 0.1;

    pub fn new(norm: NormKind) -> Result<Self, SpectralError> {
        norm.validate()?;
        Ok(Self { norm })
    }

    /// Value for a given norm `r >= 0`.
    pub fn of_radius(r: f64) -> f64 {
        ((10.0 * r).floor() / 10.0).sin()
    }

    pub fn eval(&self, x: &SpectralField) -> f64 {
        Self::of_radius(x.norm(self.norm).expect("norm validated at construction"))
    }
}
