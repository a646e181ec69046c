//! Two-qubit states in Bloch form `(a, b, T)`, density-matrix conversion and
//! the effect of square-root measurements on either qubit.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_defect, hermitian_eigenvalues_4x4, kron, pauli, sqrt_psd_2x2, CMatrix2, CMatrix4,
};
use crate::observable::Observable;

/// Default tolerance on the minimum eigenvalue in physicality checks.
pub const PHYSICAL_TOL: f64 = 1e-9;
const DENSITY_TOL: f64 = 1e-10;
const RANGE_TOL: f64 = 1e-9;

/// A linear map on Bloch vectors / correlation-matrix rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct BlochMap(Matrix3<f64>);

impl BlochMap {
    pub fn new(matrix: Matrix3<f64>) -> Self {
        BlochMap(matrix)
    }

    pub fn identity() -> Self {
        BlochMap(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

impl From<[[f64; 3]; 3]> for BlochMap {
    fn from(rows: [[f64; 3]; 3]) -> Self {
        BlochMap(matrix_from_rows(&rows))
    }
}

impl From<BlochMap> for [[f64; 3]; 3] {
    fn from(m: BlochMap) -> Self {
        matrix_to_rows(&m.0)
    }
}

pub(crate) fn matrix_from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

pub(crate) fn matrix_to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Which qubit a measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

/// Two-qubit state `ρ = ¼(1⊗1 + a·σ⊗1 + 1⊗b·σ + Σ T_jk σ_j⊗σ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct TwoQubitState {
    a: Vector3<f64>,
    b: Vector3<f64>,
    t: Matrix3<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    a: [f64; 3],
    b: [f64; 3],
    #[serde(rename = "T")]
    t: [[f64; 3]; 3],
}

impl TryFrom<RawState> for TwoQubitState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        TwoQubitState::new(
            Vector3::from(raw.a),
            Vector3::from(raw.b),
            matrix_from_rows(&raw.t),
        )
    }
}

impl From<TwoQubitState> for RawState {
    fn from(s: TwoQubitState) -> Self {
        RawState {
            a: s.a.into(),
            b: s.b.into(),
            t: matrix_to_rows(&s.t),
        }
    }
}

impl TwoQubitState {
    /// Checks finiteness and the component bounds `|a|, |b| ≤ 1`, `|T_jk| ≤ 1`.
    /// Physicality is a separate check, see [`TwoQubitState::is_physical`].
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, t: Matrix3<f64>) -> Result<Self> {
        if a.iter().chain(b.iter()).chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        if a.norm() > 1.0 + RANGE_TOL {
            return Err(Error::StateRange(format!("|a| = {}", a.norm())));
        }
        if b.norm() > 1.0 + RANGE_TOL {
            return Err(Error::StateRange(format!("|b| = {}", b.norm())));
        }
        if let Some(v) = t.iter().find(|v| v.abs() > 1.0 + RANGE_TOL) {
            return Err(Error::StateRange(format!("|T_jk| = {}", v.abs())));
        }
        Ok(TwoQubitState { a, b, t })
    }

    /// Internal constructor for values produced by contractive maps.
    pub(crate) fn from_parts(a: Vector3<f64>, b: Vector3<f64>, t: Matrix3<f64>) -> Self {
        TwoQubitState { a, b, t }
    }

    /// `cos α|00⟩ + sin α|11⟩` for `α ∈ [0, π/2]`.
    pub fn pure_state(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..=FRAC_PI_2).contains(&alpha) {
            return Err(Error::Domain(format!("alpha = {alpha} outside [0, pi/2]")));
        }
        let (s, c) = alpha.sin_cos();
        let psi = [c, 0.0, 0.0, s];
        let rho = CMatrix4::from_fn(|i, j| Complex64::new(psi[i] * psi[j], 0.0));
        Self::from_density_matrix(&rho)
    }

    /// The singlet: `a = b = 0`, `T = −I₃`.
    pub fn singlet() -> Self {
        TwoQubitState {
            a: Vector3::zeros(),
            b: Vector3::zeros(),
            t: -Matrix3::identity(),
        }
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState {
            a: Vector3::zeros(),
            b: Vector3::zeros(),
            t: Matrix3::zeros(),
        }
    }

    pub fn bloch_a(&self) -> Vector3<f64> {
        self.a
    }

    pub fn bloch_b(&self) -> Vector3<f64> {
        self.b
    }

    pub fn corr(&self) -> Matrix3<f64> {
        self.t
    }

    /// Extracts `a_j = tr[ρ σ_j⊗1]`, `b_j = tr[ρ 1⊗σ_j]`, `T_jk = tr[ρ σ_j⊗σ_k]`.
    pub fn from_density_matrix(rho: &CMatrix4) -> Result<Self> {
        let defect = hermitian_defect(rho);
        if defect.is_nan() || defect > DENSITY_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = rho.trace();
        if !((tr.re - 1.0).abs() <= DENSITY_TOL && tr.im.abs() <= DENSITY_TOL) {
            return Err(Error::BadTrace(tr.re));
        }
        let expect = |op: CMatrix4| (rho * op).trace().re;
        let id = pauli(0);
        let a = Vector3::from_fn(|j, _| expect(kron(&pauli(j + 1), &id)));
        let b = Vector3::from_fn(|j, _| expect(kron(&id, &pauli(j + 1))));
        let t = Matrix3::from_fn(|j, k| expect(kron(&pauli(j + 1), &pauli(k + 1))));
        Ok(TwoQubitState { a, b, t })
    }

    pub fn to_density_matrix(&self) -> CMatrix4 {
        let id = pauli(0);
        let re = |v: f64| Complex64::new(v, 0.0);
        let mut rho = kron(&id, &id);
        for j in 0..3 {
            rho += kron(&pauli(j + 1), &id) * re(self.a[j]);
            rho += kron(&id, &pauli(j + 1)) * re(self.b[j]);
            for k in 0..3 {
                rho += kron(&pauli(j + 1), &pauli(k + 1)) * re(self.t[(j, k)]);
            }
        }
        rho * re(0.25)
    }

    /// Smallest eigenvalue of the reconstructed density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues_4x4(&self.to_density_matrix())[0]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `a → K a`, `b → L b`, `T → K T Lᵀ`.
    pub fn apply_maps(&self, k: &BlochMap, l: &BlochMap) -> Self {
        TwoQubitState {
            a: k.matrix() * self.a,
            b: l.matrix() * self.b,
            t: k.matrix() * self.t * l.matrix().transpose(),
        }
    }

    /// Square-root measurement of `obs` on the first qubit.
    pub fn apply_measurement_first(&self, obs: &Observable) -> Self {
        self.apply_maps(&obs.bloch_channel_map(), &BlochMap::identity())
    }

    /// Square-root measurement of `obs` on the second qubit.
    pub fn apply_measurement_second(&self, obs: &Observable) -> Self {
        self.apply_maps(&BlochMap::identity(), &obs.bloch_channel_map())
    }

    pub fn apply_measurement(&self, obs: &Observable, side: Side) -> Self {
        match side {
            Side::First => self.apply_measurement_first(obs),
            Side::Second => self.apply_measurement_second(obs),
        }
    }

    /// Convex combination `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        TwoQubitState {
            a: self.a * (1.0 - w) + other.a * w,
            b: self.b * (1.0 - w) + other.b * w,
            t: self.t * (1.0 - w) + other.t * w,
        }
    }

    /// Applies local rotations: `a → R₁a`, `b → R₂b`, `T → R₁ T R₂ᵀ`.
    pub fn rotated(&self, r1: &Matrix3<f64>, r2: &Matrix3<f64>) -> Self {
        TwoQubitState {
            a: r1 * self.a,
            b: r2 * self.b,
            t: r1 * self.t * r2.transpose(),
        }
    }
}

/// One observer's measurement choice: `primary` with probability `1 − ε`,
/// `secondary` with probability `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy", into = "RawPolicy")]
pub struct MeasurementPolicy {
    primary: Observable,
    secondary: Observable,
    secondary_prob: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPolicy {
    primary: Observable,
    secondary: Observable,
    epsilon: f64,
}

impl TryFrom<RawPolicy> for MeasurementPolicy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        MeasurementPolicy::new(raw.primary, raw.secondary, raw.epsilon)
    }
}

impl From<MeasurementPolicy> for RawPolicy {
    fn from(p: MeasurementPolicy) -> Self {
        RawPolicy {
            primary: p.primary,
            secondary: p.secondary,
            epsilon: p.secondary_prob,
        }
    }
}

impl MeasurementPolicy {
    pub fn new(primary: Observable, secondary: Observable, secondary_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&secondary_prob) {
            return Err(Error::Domain(format!(
                "epsilon = {secondary_prob} outside [0, 1]"
            )));
        }
        Ok(MeasurementPolicy {
            primary,
            secondary,
            secondary_prob,
        })
    }

    /// Equal-probability selection.
    pub fn unbiased_selection(primary: Observable, secondary: Observable) -> Self {
        MeasurementPolicy {
            primary,
            secondary,
            secondary_prob: 0.5,
        }
    }

    pub fn primary(&self) -> &Observable {
        &self.primary
    }

    pub fn secondary(&self) -> &Observable {
        &self.secondary
    }

    pub fn secondary_prob(&self) -> f64 {
        self.secondary_prob
    }

    /// `(1 − ε)K^primary + ε K^secondary`.
    pub fn averaged_map(&self) -> BlochMap {
        let e = self.secondary_prob;
        BlochMap::new(
            self.primary.bloch_channel_map().matrix() * (1.0 - e)
                + self.secondary.bloch_channel_map().matrix() * e,
        )
    }
}

/// State shared by the second pair of observers once both first observers have
/// measured according to their policies.
pub fn post_measurement_state(
    state: &TwoQubitState,
    policy_a: &MeasurementPolicy,
    policy_b: &MeasurementPolicy,
) -> TwoQubitState {
    state.apply_maps(&policy_a.averaged_map(), &policy_b.averaged_map())
}

/// Square-root measurement `ρ ↦ X₊^½ρX₊^½ + X₋^½ρX₋^½` applied directly to a
/// density matrix on the chosen qubit.
pub fn channel_oracle(rho: &CMatrix4, obs: &Observable, side: Side) -> CMatrix4 {
    let (plus, minus) = obs.povm_elements();
    let id = CMatrix2::identity();
    let lift = |m: &CMatrix2| match side {
        Side::First => kron(m, &id),
        Side::Second => kron(&id, m),
    };
    let kp = lift(&sqrt_psd_2x2(&plus));
    let km = lift(&sqrt_psd_2x2(&minus));
    kp * rho * kp.adjoint() + km * rho * km.adjoint()
}
