//! Small dense complex-matrix helpers shared by the oracle paths.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    m.iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let p = m.adjoint() * m;
    let id = identity(m.nrows());
    (p - id).iter().all(|z| z.norm() <= tol)
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `exp(i t H)` for Hermitian `H`, through its eigendecomposition.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let q = &eig.eigenvectors;
    let mut diag = CMatrix::zeros(n, n);
    for k in 0..n {
        diag[(k, k)] = C64::from_polar(1.0, t * eig.eigenvalues[k]);
    }
    q * diag * q.adjoint()
}

/// Hermitian `H` with `U = exp(i H)`, eigenphases on the principal branch
/// `(-pi, pi]`.
///
/// `U` is normal, so its complex Schur form is diagonal up to rounding and
/// the Schur vectors stay unitary even inside degenerate eigenvalue
/// clusters.
pub fn principal_log_unitary(u: &CMatrix) -> Result<CMatrix> {
    if !is_unitary(u, 1e-9) {
        return Err(Error::Validation("matrix is not unitary within 1e-9".into()));
    }
    let n = u.nrows();
    let (q, t) = u.clone().schur().unpack();
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(t[(i, j)].norm());
            }
        }
    }
    if off > 1e-8 {
        return Err(Error::Internal(format!(
            "Schur form of a unitary is not diagonal (off-diagonal {off:e})"
        )));
    }
    let mut diag = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut theta = t[(k, k)].arg();
        if theta <= -std::f64::consts::PI + 1e-15 {
            theta = std::f64::consts::PI;
        }
        diag[(k, k)] = C64::new(theta, 0.0);
    }
    let h = &q * diag * q.adjoint();
    Ok((&h + h.adjoint()).scale(0.5))
}

/// `|<a|b>|` over equal-length amplitude vectors.
pub fn overlap_abs(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<C64>()
        .norm()
}

/// Phase-insensitive distance `min_phi || A - e^{i phi} B ||_F`.
pub fn distance_up_to_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    let inner: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 {
        inner / inner.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    frobenius(&(a - b * phase))
}

/// `kron(a, b)` with `a` acting on the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()])
    }

    #[test]
    fn exp_of_pauli_x() {
        let u = expm_i_hermitian(&pauli_x(), 0.3);
        let expect = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.3f64.cos(), 0.0),
                C64::new(0.0, 0.3f64.sin()),
                C64::new(0.0, 0.3f64.sin()),
                C64::new(0.3f64.cos(), 0.0),
            ],
        );
        assert!(frobenius(&(u - expect)) < 1e-13);
    }

    #[test]
    fn log_inverts_exp() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(0.4, 0.0),
                C64::new(0.1, 0.2),
                C64::new(-0.3, 0.05),
                C64::new(0.1, -0.2),
                C64::new(-0.7, 0.0),
                C64::new(0.2, 0.1),
                C64::new(-0.3, -0.05),
                C64::new(0.2, -0.1),
                C64::new(0.9, 0.0),
            ],
        );
        let u = expm_i_hermitian(&h, 1.0);
        let back = principal_log_unitary(&u).unwrap();
        assert!(frobenius(&(back - h)) < 1e-10);
    }

    #[test]
    fn log_handles_degenerate_spectrum() {
        // -I has eigenphase pi with multiplicity 3.
        let u = -identity(3);
        let h = principal_log_unitary(&u).unwrap();
        assert!(frobenius(&(h - identity(3).scale(std::f64::consts::PI))) < 1e-12);
        let u2 = expm_i_hermitian(&pauli_x(), std::f64::consts::PI / 2.0);
        let h2 = principal_log_unitary(&u2).unwrap();
        assert!(frobenius(&(expm_i_hermitian(&h2, 1.0) - u2)) < 1e-12);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let x = pauli_x();
        let y = x.map(|z| z * C64::from_polar(1.0, 0.77));
        assert!(distance_up_to_phase(&x, &y) < 1e-7);
        assert!(distance_up_to_phase(&x, &identity(2)) > 1.0);
    }
}
