//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;

/// Eigen-decomposition of a general complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

/// Eigenvalues of a general complex matrix via the complex Schur form.
pub fn eigenvalues(a: &DMatrix<C64>) -> Option<Vec<C64>> {
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0)?;
    let (_, t) = schur.unpack();
    Some((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Eigenvalues and eigenvectors. Eigenvectors come from back substitution on
/// the triangular Schur factor, so they are only meaningful when the matrix
/// is not (numerically) defective; callers check the conditioning.
pub fn eigen(a: &DMatrix<C64>) -> Option<Eigen> {
    let n = a.nrows();
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 0)?;
    let (q, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lam = values[k];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < tiny {
                d = C64::new(tiny, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut vectors = q * y;
    for k in 0..n {
        let nrm = vectors.column(k).norm();
        if nrm > 0.0 && nrm.is_finite() {
            vectors.column_mut(k).unscale_mut(nrm);
        }
    }
    Some(Eigen { values, vectors })
}

pub fn singular_values(a: &DMatrix<C64>) -> Option<DVector<f64>> {
    SVD::try_new(a.clone(), false, false, f64::EPSILON, 0).map(|s| s.singular_values)
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<C64>) -> Option<f64> {
    singular_values(a).map(|s| s.max())
}

/// Largest singular value from the eigenvalues of `A^H A`; accurate for the
/// top singular value and cheaper than an SVD on small matrices.
pub fn spectral_norm_fast(a: &DMatrix<C64>) -> f64 {
    let h = a.ad_mul(a);
    h.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max).sqrt()
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(a: &DMatrix<C64>) -> Option<f64> {
    let s = singular_values(a)?;
    let min = s.min();
    Some(if min > 0.0 { s.max() / min } else { f64::INFINITY })
}

/// Hermitian part `(H + H^H)/2`.
pub fn hermitian_part(h: &DMatrix<C64>) -> DMatrix<C64> {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Ascending eigenvalues of the pencil `H x = mu diag(w) x` with `w > 0`.
pub fn generalized_hermitian_eigenvalues(h: &DMatrix<C64>, w: &[f64]) -> Vec<f64> {
    let n = h.nrows();
    let s: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| h[(i, j)] * (s[i] * s[j]));
    hermitian_eigenvalues(&scaled)
}

/// `U^H H U` for Hermitian `H`, returned as a real number.
pub fn quadratic_form(h: &DMatrix<C64>, u: &DVector<C64>) -> f64 {
    u.dotc(&(h * u)).re
}

/// `sum w_k |u_k|^2`.
pub fn weighted_norm_sq(w: &[f64], u: &DVector<C64>) -> f64 {
    w.iter().zip(u.iter()).map(|(wk, uk)| wk * uk.norm_sqr()).sum()
}

pub fn determinant(a: &DMatrix<C64>) -> C64 {
    a.clone().lu().determinant()
}

/// Matrix exponential by scaling and squaring (Pade).
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_of_triangular_and_rotation() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-4.0, 0.0), c(0.0, 0.0)]);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert_relative_eq!(ev[0].im, -2.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1].im, 2.0, epsilon = 1e-12);
        assert!(ev[0].re.abs() < 1e-12);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let a = DMatrix::from_fn(5, 5, |i, j| c((i * 3 + j) as f64 % 7.0 - 3.0, (i as f64 - j as f64) * 0.3));
        let e = eigen(&a).unwrap();
        for k in 0..5 {
            let v = e.vectors.column(k).into_owned();
            let r = &a * &v - &v * e.values[k];
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn generalized_eigenvalues_of_diagonal_pencil() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(9.0, 0.0)]));
        let mu = generalized_hermitian_eigenvalues(&h, &[4.0, 3.0]);
        assert_relative_eq!(mu[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(mu[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn expm_of_nilpotent() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 1)].re, 2.0, epsilon = 1e-14);
        assert_relative_eq!(e[(0, 1)].im, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e[(0, 0)].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn determinant_and_norms() {
        let a = DMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 4.0)]);
        assert_relative_eq!(determinant(&a).im, 12.0, epsilon = 1e-14);
        assert_relative_eq!(spectral_norm(&a).unwrap(), 4.0, epsilon = 1e-14);
        assert_relative_eq!(spectral_norm_fast(&a), 4.0, epsilon = 1e-14);
        assert_relative_eq!(condition_number(&a).unwrap(), 4.0 / 3.0, epsilon = 1e-14);
    }
}
