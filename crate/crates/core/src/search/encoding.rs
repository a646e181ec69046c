//! The 17-coordinate search space: four observables and a pure-state angle.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Scenario;
use crate::observable::Observable;
use crate::state::{MeasurementPolicy, TwoQubitState};

pub const DIM: usize = 17;

/// Order of the observables in the vector.
pub const OBSERVABLE_LABELS: [&str; 4] = ["X", "Xp", "Y", "Yp"];
const COORD_LABELS: [&str; 4] = ["u", "v", "theta", "phi"];

/// Coordinates `(u, v, θ, φ)` per observable in the order X, X′, Y, Y′,
/// then α. Strength is `u`, bias `v(1 − u)`, direction spherical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector(pub [f64; DIM]);

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let arr: [f64; DIM] = v
            .try_into()
            .map_err(|v: Vec<f64>| Error::Config(format!("parameter vector needs {DIM} entries, got {}", v.len())))?;
        Ok(Self(arr))
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(p: ParameterVector) -> Self {
        p.0.to_vec()
    }
}

pub fn lower_bounds() -> [f64; DIM] {
    let mut lo = [0.0; DIM];
    for k in 0..4 {
        lo[4 * k + 1] = -1.0;
    }
    lo
}

pub fn upper_bounds() -> [f64; DIM] {
    let mut hi = [0.0; DIM];
    for k in 0..4 {
        hi[4 * k] = 1.0;
        hi[4 * k + 1] = 1.0;
        hi[4 * k + 2] = PI;
        hi[4 * k + 3] = 2.0 * PI;
    }
    hi[16] = FRAC_PI_2;
    hi
}

/// Column names of the first sixteen coordinates, e.g. `X_u`, `Yp_phi`.
pub fn observable_param_names() -> Vec<String> {
    OBSERVABLE_LABELS
        .iter()
        .flat_map(|o| COORD_LABELS.iter().map(move |c| format!("{o}_{c}")))
        .collect()
}

fn decode_observable(c: &[f64]) -> Observable {
    let (u, v, theta, phi) = (c[0], c[1], c[2], c[3]);
    let dir = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    Observable::new(v * (1.0 - u), u, dir).expect("in-bounds coordinates give a valid observable")
}

fn encode_observable(o: &Observable) -> [f64; 4] {
    let u = o.strength().clamp(0.0, 1.0);
    let v = if u < 1.0 { (o.bias() / (1.0 - u)).clamp(-1.0, 1.0) } else { 0.0 };
    let d = o.direction();
    let theta = d[2].clamp(-1.0, 1.0).acos();
    let mut phi = d[1].atan2(d[0]);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if phi >= 2.0 * PI {
        phi = 0.0;
    }
    [u, v, theta, phi]
}

impl ParameterVector {
    pub fn alpha(&self) -> f64 {
        self.0[16]
    }

    /// Copy with every coordinate clamped into bounds; the flag reports
    /// whether anything moved.
    pub fn clamped(&self) -> (Self, bool) {
        let (lo, hi) = (lower_bounds(), upper_bounds());
        let mut out = self.0;
        let mut moved = false;
        for i in 0..DIM {
            let c = if out[i].is_nan() { lo[i] } else { out[i].clamp(lo[i], hi[i]) };
            moved |= c != out[i];
            out[i] = c;
        }
        (Self(out), moved)
    }

    pub fn observables(&self) -> [Observable; 4] {
        let (p, _) = self.clamped();
        std::array::from_fn(|k| decode_observable(&p.0[4 * k..4 * k + 4]))
    }

    /// Scenario on `cos α|00⟩ + sin α|11⟩` with both selection probabilities ½.
    /// Out-of-bounds coordinates are clamped and flagged.
    pub fn decode(&self) -> (Scenario, bool) {
        let (p, clamped) = self.clamped();
        let [x, xp, y, yp] = p.observables();
        let state = TwoQubitState::pure_state(p.alpha()).expect("alpha clamped into range");
        let scenario = Scenario::new(
            state,
            MeasurementPolicy::unbiased_selection(x, xp),
            MeasurementPolicy::unbiased_selection(y, yp),
        );
        (scenario, clamped)
    }

    pub fn encode(observables: &[Observable; 4], alpha: f64) -> Self {
        let mut out = [0.0; DIM];
        for (k, o) in observables.iter().enumerate() {
            out[4 * k..4 * k + 4].copy_from_slice(&encode_observable(o));
        }
        out[16] = alpha.clamp(0.0, FRAC_PI_2);
        Self(out)
    }

    /// Inverse of [`decode`](Self::decode) on scenarios it can produce.
    pub fn encode_scenario(scenario: &Scenario, alpha: f64) -> Self {
        let (pa, pb) = (&scenario.policy_a, &scenario.policy_b);
        Self::encode(&[*pa.primary(), *pa.secondary(), *pb.primary(), *pb.secondary()], alpha)
    }
}
