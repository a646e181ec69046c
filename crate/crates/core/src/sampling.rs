//! Random observables, states and rotations for Monte Carlo runs and tests.

use std::f64::consts::PI;

use nalgebra::{Matrix3, UnitQuaternion, Vector3, Vector4};
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::CMatrix4;
use crate::observable::Observable;
use crate::state::{MeasurementPolicy, TwoQubitState};

/// Uniform point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Unit vector orthogonal to `x`, uniform on the great circle.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, x: &Vector3<f64>) -> Vector3<f64> {
    let helper = if x[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = x.cross(&helper).normalize();
    let e2 = x.cross(&e1);
    let t: f64 = rng.random_range(0.0..2.0 * PI);
    e1 * t.cos() + e2 * t.sin()
}

/// Haar-random rotation matrix.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    let q = loop {
        let v = Vector4::from_fn(|_, _| gaussian(rng));
        if v.norm() > 1e-9 {
            break v;
        }
    };
    let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::from_vector(q));
    *q.to_rotation_matrix().matrix()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// `(bias, strength)` uniform over the triangle `|B| + S ≤ 1`.
pub fn random_bias_strength<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let b: f64 = rng.random_range(-1.0..=1.0);
        let s: f64 = rng.random_range(0.0..=1.0);
        if b.abs() + s <= 1.0 {
            return (b, s);
        }
    }
}

pub fn random_observable<R: Rng + ?Sized>(rng: &mut R) -> Observable {
    let (b, s) = random_bias_strength(rng);
    Observable::new(b, s, random_unit_vector(rng)).expect("sampled inside the valid region")
}

pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, epsilon: f64) -> MeasurementPolicy {
    MeasurementPolicy::new(random_observable(rng), random_observable(rng), epsilon)
        .expect("epsilon in range")
}

/// Haar-random two-qubit pure state.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let psi: Vec<Complex64> = (0..4)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    let n = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let rho = CMatrix4::from_fn(|i, j| psi[i] * psi[j].conj() / (n * n));
    TwoQubitState::from_density_matrix(&rho).expect("normalized projector")
}

/// Mixture of one to four random pure states.
pub fn random_physical_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let count = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..count).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = random_pure_state(rng);
    let mut mass = weights[0] / total;
    for w in &weights[1..] {
        let w = w / total;
        let next = random_pure_state(rng);
        mass += w;
        acc = acc.mix(&next, w / mass);
    }
    acc
}

/// Random state with vanishing Bloch vectors: a Bell-diagonal mixture under
/// random local rotations.
pub fn random_zero_bloch_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let corners = [
        Vector3::new(1.0, -1.0, 1.0),
        Vector3::new(-1.0, 1.0, 1.0),
        Vector3::new(1.0, 1.0, -1.0),
        Vector3::new(-1.0, -1.0, -1.0),
    ];
    let w: Vec<f64> = (0..4).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let diag = corners
        .iter()
        .zip(&w)
        .fold(Vector3::zeros(), |acc, (c, wi)| acc + c * (wi / total));
    let base = TwoQubitState::new(Vector3::zeros(), Vector3::zeros(), Matrix3::from_diagonal(&diag))
        .expect("inside the tetrahedron");
    base.rotated(&random_rotation(rng), &random_rotation(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PHYSICAL_TOL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_produce_valid_objects() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            assert!((random_unit_vector(&mut rng).norm() - 1.0).abs() < 1e-14);
            let r = random_rotation(&mut rng);
            assert!((r * r.transpose() - Matrix3::identity()).amax() < 1e-14);
            assert!((r.determinant() - 1.0).abs() < 1e-14);
            assert!(random_physical_state(&mut rng).is_physical(PHYSICAL_TOL));
            let z = random_zero_bloch_state(&mut rng);
            assert!(z.is_physical(PHYSICAL_TOL));
            assert!(z.bloch_a().norm() == 0.0 && z.bloch_b().norm() == 0.0);
            let x = random_unit_vector(&mut rng);
            assert!(random_orthogonal(&mut rng, &x).dot(&x).abs() < 1e-15);
        }
    }
}
