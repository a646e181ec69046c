//! Small dense linear algebra: 3×3 singular values, Pauli operators and
//! 2×2 / 4×4 complex helpers used by the density-matrix routes.

use nalgebra::{Matrix2, Matrix3, Matrix4, SMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix2 = Matrix2<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_REL_TOL: f64 = 1e-15;

/// Singular values of a 3×3 real matrix, sorted descending.
///
/// One-sided cyclic Jacobi: plane rotations are applied to the columns of `m`
/// until every pair is orthogonal, which diagonalizes `mᵀm` without forming it.
/// The singular values are then the column norms.
pub fn singular_values_3x3(m: &Matrix3<f64>) -> [f64; 3] {
    let mut a = *m;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let alpha = a.column(p).norm_squared();
            let beta = a.column(q).norm_squared();
            let gamma = a.column(p).dot(&a.column(q));
            if gamma == 0.0 || gamma.abs() <= JACOBI_REL_TOL * (alpha * beta).sqrt() {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = c * t;
            for r in 0..3 {
                let ap = a[(r, p)];
                let aq = a[(r, q)];
                a[(r, p)] = c * ap - s * aq;
                a[(r, q)] = s * ap + c * aq;
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [a.column(0).norm(), a.column(1).norm(), a.column(2).norm()];
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Identity followed by σ₁, σ₂, σ₃ in the standard representation.
pub fn pauli(index: usize) -> CMatrix2 {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match index {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, c(0.0, -1.0), c(0.0, 1.0), z),
        3 => Matrix2::new(o, z, z, -o),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// `σ·v` for a real 3-vector.
pub fn sigma_dot(v: &nalgebra::Vector3<f64>) -> CMatrix2 {
    pauli(1) * c(v[0], 0.0) + pauli(2) * c(v[1], 0.0) + pauli(3) * c(v[2], 0.0)
}

/// Kronecker product with the first factor acting on the leftmost qubit.
pub fn kron(a: &CMatrix2, b: &CMatrix2) -> CMatrix4 {
    let mut out = CMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Principal square root of a positive semidefinite 2×2 matrix.
///
/// Uses `√M = (M + √det·I) / √(tr M + 2√det)`, valid for any PSD 2×2 matrix.
pub fn sqrt_psd_2x2(m: &CMatrix2) -> CMatrix2 {
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    let sd = det.sqrt();
    let denom = (m.trace().re + 2.0 * sd).max(0.0).sqrt();
    if denom == 0.0 {
        return CMatrix2::zeros();
    }
    (m + CMatrix2::identity() * c(sd, 0.0)) / c(denom, 0.0)
}

/// Largest absolute deviation from Hermiticity.
pub fn hermitian_defect(m: &CMatrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
///
/// Diagonalizes the real symmetric 8×8 embedding `[[Re, −Im], [Im, Re]]`,
/// whose spectrum is that of the input with every eigenvalue doubled.
pub fn hermitian_eigenvalues_4x4(m: &CMatrix4) -> [f64; 4] {
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let h = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            big[(i, j)] = h.re;
            big[(i + 4, j + 4)] = h.re;
            big[(i + 4, j)] = h.im;
            big[(i, j + 4)] = -h.im;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    [ev[0], ev[2], ev[4], ev[6]]
}
