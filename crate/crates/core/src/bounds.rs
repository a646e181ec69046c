//! Closed-form thresholds for biased measurement selection and the one-sided
//! monogamy relations, evaluated as residuals on concrete scenarios.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{proxy_12, proxy_21, proxy_22, Scenario};
use crate::observable::Observable;
use crate::state::{MeasurementPolicy, TwoQubitState};

const HYPOTHESIS_TOL: f64 = 1e-12;
const DOMAIN_TOL: f64 = 1e-12;

/// Threshold constants of the biased-selection analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// Smallest strength for which the first pair violates CHSH.
    pub s_min: f64,
    /// Largest strength for which the second pair can violate CHSH.
    pub s_max: f64,
    /// Reversibility threshold at ε = 0.
    pub r_minus_0: f64,
    /// Reversibility corresponding to `s_min`.
    pub r_plus: f64,
    /// Largest selection probability admitting violations by both pairs.
    pub eps_max: f64,
    /// Selection probability beyond which the second pair cannot violate CHSH.
    pub eps_limit: f64,
    pub r_0: f64,
    pub s_0: f64,
    /// Improved bound on `|S(A₁,B₁)| + S*(A₂,B₂)` for equal strengths and
    /// orthogonal directions.
    pub improved_bound: f64,
}

impl ThresholdTable {
    pub fn entries(&self) -> [(&'static str, f64); 9] {
        [
            ("s_min", self.s_min),
            ("s_max", self.s_max),
            ("r_minus_0", self.r_minus_0),
            ("r_plus", self.r_plus),
            ("eps_max", self.eps_max),
            ("eps_limit", self.eps_limit),
            ("r_0", self.r_0),
            ("s_0", self.s_0),
            ("improved_bound", self.improved_bound),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, value) in self.entries() {
            out.push_str(&format!("{name:<16}{value:>26.16e}\n"));
        }
        out
    }
}

/// `R₋(ε) = ([√2 − (1−ε)²]^½ − ε) / (1 − ε)`.
pub fn r_minus(epsilon: f64) -> Result<f64> {
    let limit = 1.0 - (SQRT_2 - 1.0).sqrt();
    if !(0.0..=limit + DOMAIN_TOL).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside [0, {limit}]")));
    }
    let one_m = 1.0 - epsilon;
    let r = ((SQRT_2 - one_m * one_m).sqrt() - epsilon) / one_m;
    if r > 1.0 + DOMAIN_TOL {
        return Err(Error::Domain(format!("R_-({epsilon}) = {r} exceeds 1")));
    }
    Ok(r.min(1.0))
}

/// Inverse of [`r_minus`]:
/// `ε₋(R) = (1 − R + R² − √(√2(2 − 2R + R²) − 1)) / (2 − 2R + R²)`.
pub fn epsilon_minus(r: f64) -> Result<f64> {
    let lo = (SQRT_2 - 1.0).sqrt();
    if !(lo - DOMAIN_TOL..=1.0).contains(&r) {
        return Err(Error::Domain(format!("R = {r} outside [{lo}, 1]")));
    }
    let q = 2.0 - 2.0 * r + r * r;
    let radicand = (SQRT_2 * q - 1.0).max(0.0);
    Ok(((1.0 - r + r * r - radicand.sqrt()) / q).max(0.0))
}

pub fn thresholds() -> ThresholdTable {
    let s_min = 8f64.powf(0.25) - 1.0;
    let r_minus_0 = (SQRT_2 - 1.0).sqrt();
    let r_plus = 2f64.powf(0.75) * (2f64.powf(0.25) - 1.0).sqrt();
    ThresholdTable {
        s_min,
        s_max: (2.0 - SQRT_2).sqrt(),
        r_minus_0,
        r_plus,
        eps_max: epsilon_minus(r_plus).expect("r_plus lies in the domain"),
        eps_limit: 1.0 - r_minus_0,
        r_0: (2.0 - 3f64.sqrt()).sqrt(),
        s_0: (3f64.sqrt() - 1.0).sqrt(),
        improved_bound: 16.0 / (3.0 * SQRT_2),
    }
}

/// `|S(A₁,B₁)| = (S + 1)²/√2` in the biased-selection geometry.
pub fn biased_s11(strength: f64) -> f64 {
    (strength + 1.0).powi(2) / SQRT_2
}

/// `S*(A₂,B₂) = √2[1 + R² − 2ε(1 − R + R²) + ε²(2 − 2R + R²)]`.
pub fn biased_s22(r: f64, epsilon: f64) -> f64 {
    SQRT_2
        * (1.0 + r * r - 2.0 * epsilon * (1.0 - r + r * r)
            + epsilon * epsilon * (2.0 - 2.0 * r + r * r))
}

/// Cross-pair proxy value in the ε → 0 limit.
pub fn biased_cross_limit(strength: f64, r: f64) -> f64 {
    let (sp, sm) = (1.0 + strength, 1.0 - strength);
    FRAC_1_SQRT_2 * (sp * sp + r * r * sm * sm).sqrt() + FRAC_1_SQRT_2 * (sm * sm + r * r * sp * sp).sqrt()
}

/// Singlet scenario with optimal CHSH directions: the first observers measure
/// an unbiased observable (strengths `strength_a`, `strength_b`) with
/// probability `1 − ε` and a projective one with probability `ε`.
pub fn biased_scenario(strength_a: f64, strength_b: f64, epsilon: f64) -> Result<Scenario> {
    let x = Vector3::x();
    let xp = Vector3::y();
    let y = (x + xp) * FRAC_1_SQRT_2;
    let yp = (x - xp) * FRAC_1_SQRT_2;
    let policy_a = MeasurementPolicy::new(
        Observable::unbiased(strength_a, x)?,
        Observable::projective(xp)?,
        epsilon,
    )?;
    let policy_b = MeasurementPolicy::new(
        Observable::unbiased(strength_b, y)?,
        Observable::projective(yp)?,
        epsilon,
    )?;
    Ok(Scenario::new(TwoQubitState::singlet(), policy_a, policy_b))
}

/// Which relation family a scenario satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    pub unbiased: bool,
    pub zero_bloch: bool,
    pub equal_strengths: bool,
    pub orthogonal: bool,
    pub equal_selection: bool,
}

pub fn hypothesis_flags(scenario: &Scenario) -> HypothesisFlags {
    let (pa, pb) = (&scenario.policy_a, &scenario.policy_b);
    let obs = [pa.primary(), pa.secondary(), pb.primary(), pb.secondary()];
    HypothesisFlags {
        unbiased: obs.iter().all(|o| o.bias().abs() <= HYPOTHESIS_TOL),
        zero_bloch: scenario.state.bloch_a().norm() <= HYPOTHESIS_TOL
            && scenario.state.bloch_b().norm() <= HYPOTHESIS_TOL,
        equal_strengths: (pa.primary().strength() - pa.secondary().strength()).abs() <= HYPOTHESIS_TOL
            && (pb.primary().strength() - pb.secondary().strength()).abs() <= HYPOTHESIS_TOL,
        orthogonal: pa.primary().direction().dot(&pa.secondary().direction()).abs() <= HYPOTHESIS_TOL
            && pb.primary().direction().dot(&pb.secondary().direction()).abs() <= HYPOTHESIS_TOL,
        equal_selection: (pa.secondary_prob() - 0.5).abs() <= HYPOTHESIS_TOL
            && (pb.secondary_prob() - 0.5).abs() <= HYPOTHESIS_TOL,
    }
}

/// `8 − [S*(A₁,B₂)² + S*(A₂,B₁)²]` without hypothesis checks.
pub fn eq13_residual_unchecked(scenario: &Scenario) -> f64 {
    8.0 - (proxy_12(scenario).powi(2) + proxy_21(scenario).powi(2))
}

pub fn check_eq13_hypotheses(scenario: &Scenario) -> Result<()> {
    let f = hypothesis_flags(scenario);
    if !f.equal_selection {
        return Err(Error::Hypothesis("selection probabilities must both be 1/2".into()));
    }
    if !(f.equal_strengths || f.orthogonal) {
        return Err(Error::Hypothesis(
            "needs equal strengths per side or orthogonal directions per side".into(),
        ));
    }
    if !(f.unbiased || f.zero_bloch) {
        return Err(Error::Hypothesis(
            "needs unbiased observables or vanishing Bloch vectors".into(),
        ));
    }
    Ok(())
}

/// Residual of `S*(A₁,B₂)² + S*(A₂,B₁)² ≤ 8`; refuses scenarios outside the
/// relation's hypotheses.
pub fn bound_eq13_residual(scenario: &Scenario) -> Result<f64> {
    check_eq13_hypotheses(scenario)?;
    Ok(eq13_residual_unchecked(scenario))
}

/// Bound on `|S(A₁,B₁)| + S*(A₂,B₂)`: 4 for unbiased equal-strength
/// observables, `16/(3√2)` when the directions are also orthogonal per side.
pub fn eq14_bound(scenario: &Scenario) -> Result<f64> {
    let f = hypothesis_flags(scenario);
    if !f.equal_selection {
        return Err(Error::Hypothesis("selection probabilities must both be 1/2".into()));
    }
    if !f.unbiased {
        return Err(Error::Hypothesis("needs unbiased observables".into()));
    }
    if !f.equal_strengths {
        return Err(Error::Hypothesis("needs equal strengths per side".into()));
    }
    Ok(if f.orthogonal { 16.0 / (3.0 * SQRT_2) } else { 4.0 })
}

pub fn eq14_value(scenario: &Scenario) -> f64 {
    scenario.chsh_first_pair().abs() + proxy_22(scenario)
}

pub fn bound_eq14_residual(scenario: &Scenario) -> Result<f64> {
    let bound = eq14_bound(scenario)?;
    Ok(bound - eq14_value(scenario))
}

/// One row of the biased-selection strength scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub strength: f64,
    pub reversibility: f64,
    pub s11: f64,
    pub s22: f64,
    pub cross_limit: f64,
    pub s12: f64,
    pub s21: f64,
    pub all_violate: bool,
}

/// Strength window in which both the first and second pair violate CHSH.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasedWindow {
    pub epsilon: f64,
    /// `(lower, upper)` strengths, `None` when the window is empty.
    pub window: Option<(f64, f64)>,
    pub rows: Vec<WindowRow>,
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) and f(hi) have opposite signs.
    let flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scans `strength_grid` at selection probability `epsilon` and locates the
/// window endpoints by bisection.
pub fn biased_window(epsilon: f64, strength_grid: &[f64]) -> Result<BiasedWindow> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside [0, 1)")));
    }
    let unbiased_rev = |s: f64| (1.0 - s * s).max(0.0).sqrt();
    let lower = bisect(|s| biased_s11(s) - 2.0, 0.0, 1.0);
    let s22_excess = |s: f64| biased_s22(unbiased_rev(s), epsilon) - 2.0;
    let upper = (s22_excess(0.0) > 0.0).then(|| bisect(s22_excess, 0.0, 1.0));
    let window = upper.filter(|u| *u > lower).map(|u| (lower, u));

    let rows = strength_grid
        .iter()
        .map(|&strength| {
            if !(0.0..=1.0).contains(&strength) {
                return Err(Error::Domain(format!("strength {strength} outside [0, 1]")));
            }
            let r = unbiased_rev(strength);
            let sc = biased_scenario(strength, strength, epsilon)?;
            let s11 = sc.chsh_first_pair().abs();
            let s22 = proxy_22(&sc);
            let s12 = proxy_12(&sc);
            let s21 = proxy_21(&sc);
            Ok(WindowRow {
                strength,
                reversibility: r,
                s11,
                s22,
                cross_limit: biased_cross_limit(strength, r),
                s12,
                s21,
                all_violate: s11 > 2.0 && s22 > 2.0 && s12 > 2.0 && s21 > 2.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BiasedWindow {
        epsilon,
        window,
        rows,
    })
}
