use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

const HERMITIAN_TOL: f64 = 1e-10;

/// Lower-triangular factor `L` with `a = L L^H`.
pub fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    if a.cols() != n {
        return Err(LinalgError::NotSquare(a.shape()));
    }
    let scale = a.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(LinalgError::NotHermitian);
            }
        }
    }

    let max_diag = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
    // pivots at roundoff level mean the matrix is singular
    let pivot_floor = 4.0 * f64::EPSILON * n as f64 * max_diag;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        // NaN fails this comparison too.
        if !(pivot > pivot_floor) {
            return Err(LinalgError::NotPositiveDefinite { pivot: j });
        }
        let d = pivot.sqrt();
        l[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `a S = rhs` for Hermitian positive-definite `a`.
pub fn cholesky_solve(a: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if rhs.rows() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "cholesky_solve",
            left: a.shape(),
            right: rhs.shape(),
        });
    }
    let l = cholesky(a)?;
    let n = a.rows();
    let mut out = rhs.clone();
    for c in 0..rhs.cols() {
        // L z = b
        for i in 0..n {
            let mut s = out[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * out[(k, c)];
            }
            out[(i, c)] = s / l[(i, i)].re;
        }
        // L^H x = z
        for i in (0..n).rev() {
            let mut s = out[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * out[(k, c)];
            }
            out[(i, c)] = s / l[(i, i)].re;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_returns_rhs() {
        let v = ComplexMatrix::new(3, 1, vec![c(1.0), Complex64::new(2.0, -1.0), c(-3.0)]).unwrap();
        let s = cholesky_solve(&ComplexMatrix::identity(3), &v).unwrap();
        assert!(s.max_abs_diff(&v) < 1e-15);
    }

    #[test]
    fn scalar_system() {
        let a = ComplexMatrix::from_diag(&[4.0]);
        let rhs = ComplexMatrix::new(1, 1, vec![c(8.0)]).unwrap();
        let s = cholesky_solve(&a, &rhs).unwrap();
        assert!((s[(0, 0)] - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = ComplexMatrix::from_diag(&[1.0, -1.0]);
        let rhs = ComplexMatrix::identity(2);
        assert!(matches!(
            cholesky_solve(&a, &rhs),
            Err(LinalgError::NotPositiveDefinite { pivot: 1 })
        ));
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = ComplexMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(cholesky(&a), Err(LinalgError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut a = ComplexMatrix::identity(2);
        a[(0, 1)] = Complex64::new(0.0, 0.5);
        assert!(matches!(cholesky(&a), Err(LinalgError::NotHermitian)));
    }
}
