//! CHSH values, the Horodecki criterion and the proxy quantities for the
//! three downstream observer pairings.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::linalg::singular_values_3x3;
use crate::observable::Observable;
use crate::state::{post_measurement_state, MeasurementPolicy, TwoQubitState};

/// An initial two-qubit state plus the measurement policies of the first
/// observer on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub state: TwoQubitState,
    pub policy_a: MeasurementPolicy,
    pub policy_b: MeasurementPolicy,
}

/// `|S(A₁,B₁)|` and the three maximized downstream CHSH values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub s11: f64,
    pub s12: f64,
    pub s21: f64,
    pub s22: f64,
}

impl ProxyReport {
    pub const CSV_HEADER: &'static str = "s11,s12,s21,s22";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            self.s11, self.s12, self.s21, self.s22
        )
    }
}

impl Scenario {
    pub fn new(state: TwoQubitState, policy_a: MeasurementPolicy, policy_b: MeasurementPolicy) -> Self {
        Scenario {
            state,
            policy_a,
            policy_b,
        }
    }

    /// Exchanges the roles of the two sides (`a ↔ b`, `T → Tᵀ`).
    pub fn swapped(&self) -> Self {
        let s = &self.state;
        Scenario {
            state: TwoQubitState::from_parts(s.bloch_b(), s.bloch_a(), s.corr().transpose()),
            policy_a: self.policy_b,
            policy_b: self.policy_a,
        }
    }

    /// The CHSH parameter of the first pair, `S(A₁,B₁)`.
    pub fn chsh_first_pair(&self) -> f64 {
        chsh_value(
            self.policy_a.primary(),
            self.policy_a.secondary(),
            self.policy_b.primary(),
            self.policy_b.secondary(),
            &self.state,
        )
    }

    pub fn proxy_22(&self) -> f64 {
        proxy_22(self)
    }

    pub fn proxy_12(&self) -> f64 {
        proxy_12(self)
    }

    pub fn proxy_21(&self) -> f64 {
        proxy_21(self)
    }

    pub fn report(&self) -> ProxyReport {
        proxy_report(self)
    }
}

/// `⟨X⊗Y⟩ = B_X B_Y + B_X S_Y (b·y) + B_Y S_X (a·x) + S_X S_Y xᵀTy`.
pub fn expectation(obs_a: &Observable, obs_b: &Observable, state: &TwoQubitState) -> f64 {
    let (ba, bb) = (obs_a.bias(), obs_b.bias());
    let xa = obs_a.weighted_direction();
    let yb = obs_b.weighted_direction();
    ba * bb + ba * state.bloch_b().dot(&yb) + bb * state.bloch_a().dot(&xa) + xa.dot(&(state.corr() * yb))
}

/// `⟨XY⟩ + ⟨XY′⟩ + ⟨X′Y⟩ − ⟨X′Y′⟩`.
pub fn chsh_value(
    x: &Observable,
    x2: &Observable,
    y: &Observable,
    y2: &Observable,
    state: &TwoQubitState,
) -> f64 {
    expectation(x, y, state) + expectation(x, y2, state) + expectation(x2, y, state)
        - expectation(x2, y2, state)
}

/// Maximum CHSH value over projective measurements: `2√(s₁² + s₂²)`.
pub fn horodecki_value(t: &Matrix3<f64>) -> f64 {
    let sv = singular_values_3x3(t);
    2.0 * (sv[0] * sv[0] + sv[1] * sv[1]).sqrt()
}

/// Horodecki value of `K T L` for the averaged maps of both policies.
pub fn proxy_22(scenario: &Scenario) -> f64 {
    let k = scenario.policy_a.averaged_map();
    let l = scenario.policy_b.averaged_map();
    horodecki_value(&(k.matrix() * scenario.state.corr() * l.matrix().transpose()))
}

/// The two vectors whose norms sum to `S*(A₁,B₂)`; their directions are the
/// optimal projective measurement directions of the second observer on side B.
pub fn proxy_12_vectors(scenario: &Scenario) -> (Vector3<f64>, Vector3<f64>) {
    let l = *scenario.policy_b.averaged_map().matrix();
    let x = scenario.policy_a.primary();
    let x2 = scenario.policy_a.secondary();
    let lb = l * scenario.state.bloch_b();
    let ltt = l * scenario.state.corr().transpose();
    let (xt, xt2) = (x.weighted_direction(), x2.weighted_direction());
    (
        lb * (x.bias() + x2.bias()) + ltt * (xt + xt2),
        lb * (x.bias() - x2.bias()) + ltt * (xt - xt2),
    )
}

/// Mirror of [`proxy_12_vectors`] for the pairing `(A₂, B₁)`.
pub fn proxy_21_vectors(scenario: &Scenario) -> (Vector3<f64>, Vector3<f64>) {
    let k = *scenario.policy_a.averaged_map().matrix();
    let y = scenario.policy_b.primary();
    let y2 = scenario.policy_b.secondary();
    let ka = k * scenario.state.bloch_a();
    let kt = k * scenario.state.corr();
    let (yt, yt2) = (y.weighted_direction(), y2.weighted_direction());
    (
        ka * (y.bias() + y2.bias()) + kt * (yt + yt2),
        ka * (y.bias() - y2.bias()) + kt * (yt - yt2),
    )
}

/// Optimal projective directions `(w, w′)` for a downstream observer, when the
/// corresponding vectors are nonzero.
pub fn optimal_directions(
    vectors: (Vector3<f64>, Vector3<f64>),
) -> (Option<Vector3<f64>>, Option<Vector3<f64>>) {
    let unit = |v: Vector3<f64>| (v.norm() > 0.0).then(|| v / v.norm());
    (unit(vectors.0), unit(vectors.1))
}

pub fn proxy_12(scenario: &Scenario) -> f64 {
    let (p, m) = proxy_12_vectors(scenario);
    p.norm() + m.norm()
}

pub fn proxy_21(scenario: &Scenario) -> f64 {
    let (p, m) = proxy_21_vectors(scenario);
    p.norm() + m.norm()
}

pub fn proxy_report(scenario: &Scenario) -> ProxyReport {
    ProxyReport {
        s11: scenario.chsh_first_pair().abs(),
        s12: proxy_12(scenario),
        s21: proxy_21(scenario),
        s22: proxy_22(scenario),
    }
}

/// `S*(A₂,B₂)` recomputed from the explicit post-measurement state.
pub fn proxy_22_via_state(scenario: &Scenario) -> f64 {
    horodecki_value(&post_measurement_state(&scenario.state, &scenario.policy_a, &scenario.policy_b).corr())
}

/// `| u + v − 6 | + | u − v | ≥ 2`: the point lies outside the forbidden
/// square where both values exceed 2.
pub fn monogamy_region(u: f64, v: f64) -> bool {
    (u + v - 6.0).abs() + (u - v).abs() >= 2.0
}
