//! Two-valued qubit observables `X = bias·1 + strength·σ·x` and their
//! square-root measurement properties.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigma_dot, CMatrix2};
use crate::state::BlochMap;

const POSITIVITY_TOL: f64 = 1e-12;
const RADICAND_TOL: f64 = 1e-12;

/// A two-valued qubit POVM `{X₊, X₋}` parametrized by outcome bias, strength
/// and a unit direction. The maximum reversibility is computed once at
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawObservable", into = "RawObservable")]
pub struct Observable {
    bias: f64,
    strength: f64,
    direction: Vector3<f64>,
    reversibility: f64,
}

#[derive(Serialize, Deserialize)]
struct RawObservable {
    bias: f64,
    strength: f64,
    direction: [f64; 3],
}

impl TryFrom<RawObservable> for Observable {
    type Error = Error;

    fn try_from(raw: RawObservable) -> Result<Self> {
        Observable::new(raw.bias, raw.strength, Vector3::from(raw.direction))
    }
}

impl From<Observable> for RawObservable {
    fn from(o: Observable) -> Self {
        RawObservable {
            bias: o.bias,
            strength: o.strength,
            direction: o.direction.into(),
        }
    }
}

impl Observable {
    /// Builds an observable, renormalizing the direction.
    pub fn new(bias: f64, strength: f64, direction: Vector3<f64>) -> Result<Self> {
        if !bias.is_finite() {
            return Err(Error::NonFinite("bias"));
        }
        if !strength.is_finite() {
            return Err(Error::NonFinite("strength"));
        }
        if direction.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        if !(0.0..=1.0 + POSITIVITY_TOL).contains(&strength) {
            return Err(Error::StrengthRange(strength));
        }
        let sum = bias.abs() + strength;
        if sum > 1.0 + POSITIVITY_TOL {
            return Err(Error::Positivity { sum });
        }
        let norm = direction.norm();
        if norm == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let strength = strength.min(1.0);
        let reversibility = reversibility(bias, strength)?;
        Ok(Observable {
            bias,
            strength,
            direction: direction / norm,
            reversibility,
        })
    }

    /// Projective observable `σ·x`.
    pub fn projective(direction: Vector3<f64>) -> Result<Self> {
        Self::new(0.0, 1.0, direction)
    }

    /// Unbiased observable of the given strength.
    pub fn unbiased(strength: f64, direction: Vector3<f64>) -> Result<Self> {
        Self::new(0.0, strength, direction)
    }

    /// The constant observable `bias·1`. The direction is irrelevant and set to ẑ.
    pub fn trivial(bias: f64) -> Result<Self> {
        Self::new(bias, 0.0, Vector3::z())
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn reversibility(&self) -> f64 {
        self.reversibility
    }

    /// Strength-weighted direction `strength·x`.
    pub fn weighted_direction(&self) -> Vector3<f64> {
        self.direction * self.strength
    }

    /// The operator `X = bias·1 + strength·σ·x`.
    pub fn operator(&self) -> CMatrix2 {
        CMatrix2::identity() * Complex64::new(self.bias, 0.0)
            + sigma_dot(&self.direction) * Complex64::new(self.strength, 0.0)
    }

    /// POVM elements `X± = ½(1 ± X)`.
    pub fn povm_elements(&self) -> (CMatrix2, CMatrix2) {
        let half = Complex64::new(0.5, 0.0);
        let id = CMatrix2::identity();
        let x = self.operator();
        ((id + x) * half, (id - x) * half)
    }

    /// Bloch-level action of the square-root measurement:
    /// `K = R·I₃ + (1 − R)·x xᵀ`.
    pub fn bloch_channel_map(&self) -> BlochMap {
        let r = self.reversibility;
        let x = self.direction;
        BlochMap::new(Matrix3::identity() * r + (x * x.transpose()) * (1.0 - r))
    }

    /// `R² + S² − 1 + B²(1/R² − 1)`, identically zero for every valid observable.
    pub fn tradeoff_residual(&self) -> Result<f64> {
        tradeoff_residual(self.bias, self.strength, self.reversibility)
    }

    /// Slack of the inequality `R² + S² ≤ 1` (nonnegative when it holds).
    pub fn tradeoff_slack(&self) -> f64 {
        1.0 - self.reversibility.powi(2) - self.strength.powi(2)
    }

    pub fn fidelities(&self) -> FidelityPair {
        FidelityPair {
            operation_fidelity: (2.0 * self.reversibility + 4.0) / 6.0,
            estimation_fidelity: (self.strength + 3.0) / 6.0,
        }
    }
}

/// Mean operation fidelity `F` and mean estimation fidelity `G` of the
/// square-root measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPair {
    pub operation_fidelity: f64,
    pub estimation_fidelity: f64,
}

impl FidelityPair {
    /// `√(6G−2) + √(4−6G) − √(6F−2)`. Nonnegative for every qubit
    /// measurement; zero exactly when `R² + S² = 1`, i.e. for unbiased observables.
    pub fn information_disturbance_slack(&self) -> f64 {
        let f = self.operation_fidelity;
        let g = self.estimation_fidelity;
        (6.0 * g - 2.0).max(0.0).sqrt() + (4.0 - 6.0 * g).max(0.0).sqrt()
            - (6.0 * f - 2.0).max(0.0).sqrt()
    }
}

fn checked_radicand(value: f64) -> Result<f64> {
    if value < -RADICAND_TOL {
        Err(Error::Domain(format!("negative radicand {value:e}")))
    } else {
        Ok(value.max(0.0))
    }
}

/// Maximum reversibility `½√((1+B)²−S²) + ½√((1−B)²−S²)` of the square-root
/// measurement.
pub fn reversibility(bias: f64, strength: f64) -> Result<f64> {
    // Factored radicands keep full precision near the |B| + S = 1 boundary.
    let plus = checked_radicand((1.0 + bias - strength) * (1.0 + bias + strength))?;
    let minus = checked_radicand((1.0 - bias - strength) * (1.0 - bias + strength))?;
    Ok(0.5 * plus.sqrt() + 0.5 * minus.sqrt())
}

/// `R² + S² − 1 + B²(1/R² − 1)` for explicit parameters.
pub fn tradeoff_residual(bias: f64, strength: f64, reversibility: f64) -> Result<f64> {
    if reversibility == 0.0 {
        if bias != 0.0 {
            return Err(Error::Domain(
                "zero reversibility with nonzero bias".to_string(),
            ));
        }
        return Ok(strength * strength - 1.0);
    }
    let r2 = reversibility * reversibility;
    Ok(r2 + strength * strength - 1.0 + bias * bias * (1.0 / r2 - 1.0))
}
