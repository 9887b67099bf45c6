//! Dense complex linear algebra for detection, beam construction and
//! condition numbers. Everything here is double precision and allocation
//! based; matrices stay small (at most a few hundred rows).

mod cholesky;
mod matrix;
mod svd;

pub use cholesky::{cholesky, cholesky_solve};
pub use matrix::ComplexMatrix;
pub use svd::{complete_basis, svd, Svd, MAX_SWEEPS};

use num_complex::Complex64;
use thiserror::Error;

/// Relative singular-value cutoff used when no explicit tolerance is given.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch between {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must have at least one row and column")]
    EmptyMatrix,
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("svd did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Moore-Penrose pseudoinverse. Singular values at or below `rank_tol`
/// are dropped; `None` selects `1e-12 * s_max`.
pub fn pseudoinverse(h: &ComplexMatrix, rank_tol: Option<f64>) -> Result<ComplexMatrix, LinalgError> {
    if let Some(t) = rank_tol {
        if !(t >= 0.0) {
            return Err(LinalgError::InvalidArgument("rank tolerance must be non-negative"));
        }
    }
    let dec = svd(h)?;
    let tol = rank_tol.unwrap_or(DEFAULT_RANK_RTOL * dec.s[0]);
    // V diag(1/s) U^H
    let mut v = dec.v.clone();
    for (j, &s) in dec.s.iter().enumerate() {
        let inv = if s > tol { 1.0 / s } else { 0.0 };
        for i in 0..v.rows() {
            v[(i, j)] *= inv;
        }
    }
    v.matmul(&dec.u.adjoint())
}

/// MMSE combining matrix `(H^H H + sigma2 I)^{-1} H^H`, solved by Cholesky.
pub fn mmse_weights(h: &ComplexMatrix, sigma2: f64) -> Result<ComplexMatrix, LinalgError> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(LinalgError::InvalidArgument("noise variance must be finite and non-negative"));
    }
    let mut gram = h.adjoint_matmul(h)?;
    for i in 0..gram.rows() {
        gram[(i, i)] += Complex64::new(sigma2, 0.0);
    }
    cholesky_solve(&gram, &h.adjoint())
}

/// Frobenius-norm condition number `||H^+||_F * ||H||_F`.
pub fn cond_frobenius(h: &ComplexMatrix) -> Result<f64, LinalgError> {
    let dec = svd(h)?;
    if dec.s[0] == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    let tol = DEFAULT_RANK_RTOL * dec.s[0];
    let (mut fro, mut inv) = (0.0, 0.0);
    for &s in &dec.s {
        fro += s * s;
        if s > tol {
            inv += 1.0 / (s * s);
        }
    }
    Ok((fro * inv).sqrt())
}

/// Spectral condition number `s_max / s_min` (infinite when rank deficient).
pub fn cond_spectral(h: &ComplexMatrix) -> Result<f64, LinalgError> {
    let dec = svd(h)?;
    let s_min = *dec.s.last().expect("at least one singular value");
    if dec.s[0] == 0.0 {
        return Err(LinalgError::ZeroMatrix);
    }
    Ok(if s_min == 0.0 { f64::INFINITY } else { dec.s[0] / s_min })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_times_a() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64));
        assert_eq!(ComplexMatrix::identity(2).matmul(&a).unwrap(), a);
    }

    #[test]
    fn diagonal_product() {
        let p = ComplexMatrix::from_diag(&[2.0, 3.0])
            .matmul(&ComplexMatrix::from_diag(&[1.0, 1.0]))
            .unwrap();
        assert_eq!(p, ComplexMatrix::from_diag(&[2.0, 3.0]));
    }

    #[test]
    fn matmul_shape_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn new_rejects_nan() {
        assert_eq!(
            ComplexMatrix::new(1, 1, vec![Complex64::new(f64::NAN, 0.0)]),
            Err(LinalgError::NonFinite)
        );
    }

    #[test]
    fn pinv_diagonal() {
        let p = pseudoinverse(&ComplexMatrix::from_diag(&[2.0, 4.0]), None).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::from_diag(&[0.5, 0.25])) < 1e-15);
    }

    #[test]
    fn pinv_column_vector() {
        let h = ComplexMatrix::new(3, 1, vec![Complex64::new(1.0, 2.0), c(-2.0), Complex64::new(0.0, 1.0)]).unwrap();
        let p = pseudoinverse(&h, None).unwrap();
        let expected = h.adjoint().scale(1.0 / h.frobenius_norm_sqr());
        assert!(p.max_abs_diff(&expected) < 1e-15);
        assert!((p.matmul(&h).unwrap()[(0, 0)] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn pinv_rejects_negative_tolerance() {
        assert!(pseudoinverse(&ComplexMatrix::identity(2), Some(-1.0)).is_err());
    }

    #[test]
    fn mmse_identity_unit_noise() {
        let w = mmse_weights(&ComplexMatrix::identity(2), 1.0).unwrap();
        assert!(w.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn mmse_zero_noise_inverts() {
        let w = mmse_weights(&ComplexMatrix::from_diag(&[1.0, 2.0]), 0.0).unwrap();
        assert!(w.max_abs_diff(&ComplexMatrix::from_diag(&[1.0, 0.5])) < 1e-15);
    }

    #[test]
    fn mmse_singular_without_noise_fails() {
        let h = ComplexMatrix::from_columns(&[vec![c(1.0), c(1.0)], vec![c(2.0), c(2.0)]]);
        assert!(matches!(mmse_weights(&h, 0.0), Err(LinalgError::NotPositiveDefinite { .. })));
        assert!(mmse_weights(&h, 0.1).is_ok());
    }

    #[test]
    fn cond_identity_is_dimension() {
        for n in 1..6 {
            assert!((cond_frobenius(&ComplexMatrix::identity(n)).unwrap() - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn cond_diag_one_two() {
        let k = cond_frobenius(&ComplexMatrix::from_diag(&[1.0, 2.0])).unwrap();
        assert!((k - 2.5).abs() < 1e-14);
    }

    #[test]
    fn cond_column_vector_is_one() {
        let h = ComplexMatrix::new(4, 1, vec![c(3.0), Complex64::new(0.0, -1.0), c(0.5), c(2.0)]).unwrap();
        assert!((cond_frobenius(&h).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cond_zero_matrix_errors() {
        assert_eq!(cond_frobenius(&ComplexMatrix::zeros(3, 2)), Err(LinalgError::ZeroMatrix));
    }
}
