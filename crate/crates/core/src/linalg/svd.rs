use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 1000;

/// Pairs whose normalized inner product is below this are treated as
/// orthogonal.
const ORTHO_TOL: f64 = 1e-14;

/// Thin singular value decomposition `a = u * diag(s) * v^H`.
///
/// With `k = min(rows, cols)`, `u` is `rows x k`, `v` is `cols x k`, and
/// `s` holds `k` non-negative values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn rank(&self, tol: f64) -> usize {
        self.s.iter().filter(|&&s| s > tol).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for j in 0..us.cols() {
            for i in 0..us.rows() {
                us[(i, j)] *= self.s[j];
            }
        }
        us.matmul(&self.v.adjoint()).expect("svd factor shapes agree")
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Rotating column pairs of `a` until they are mutually orthogonal is the
/// same as diagonalizing `a^H a` with two-sided Jacobi rotations, but the
/// Gram matrix is never formed, so small singular values keep their
/// relative accuracy.
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= ORTHO_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate q by the phase of gamma so the 2x2 Gram block is real.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, phase, c, s);
                rotate(&mut vcols, p, q, phase, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let s_max = s[0];
    let negligible = s_max * f64::EPSILON * m as f64;

    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        if s[k] > negligible && s[k] > 0.0 {
            u_cols.push(cols[j].iter().map(|z| z / s[k]).collect());
        } else {
            pending.push(k);
            u_cols.push(Vec::new());
        }
    }
    if !pending.is_empty() {
        let known: Vec<Vec<Complex64>> = u_cols.iter().filter(|c| !c.is_empty()).cloned().collect();
        let extra = extend_orthonormal(&known, m, pending.len());
        for (slot, col) in pending.into_iter().zip(extra) {
            u_cols[slot] = col;
        }
    }
    let v_sorted: Vec<Vec<Complex64>> = order.iter().map(|&j| vcols[j].clone()).collect();

    Ok(Svd {
        u: ComplexMatrix::from_columns(&u_cols),
        s,
        v: ComplexMatrix::from_columns(&v_sorted),
    })
}

fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let new_p = *x * c - yq * s;
        let new_q = *x * s + yq * c;
        *x = new_p;
        *y = new_q;
    }
}

/// Adds `count` unit vectors of length `dim` orthogonal to `known` (assumed
/// orthonormal), drawn from the standard basis by Gram-Schmidt.
fn extend_orthonormal(known: &[Vec<Complex64>], dim: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = known.to_vec();
    let mut added = Vec::with_capacity(count);
    for e in 0..dim {
        if added.len() == count {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[e] = Complex64::new(1.0, 0.0);
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= proj * bi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            let unit: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
            basis.push(unit.clone());
            added.push(unit);
        }
    }
    added
}

/// Extends the orthonormal columns of `u` to a full `rows x rows` unitary
/// matrix, keeping the existing columns first.
pub fn complete_basis(u: &ComplexMatrix) -> ComplexMatrix {
    let m = u.rows();
    let mut cols: Vec<Vec<Complex64>> = (0..u.cols()).map(|j| u.column(j)).collect();
    if cols.len() < m {
        let extra = extend_orthonormal(&cols, m, m - cols.len());
        cols.extend(extra);
    }
    ComplexMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_values() {
        let out = svd(&ComplexMatrix::from_diag(&[3.0, 1.0])).unwrap();
        assert!((out.s[0] - 3.0).abs() < 1e-15);
        assert!((out.s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ascending_diagonal_is_sorted() {
        let out = svd(&ComplexMatrix::from_diag(&[1.0, 5.0, 2.0])).unwrap();
        assert_eq!(out.s, vec![5.0, 2.0, 1.0]);
        assert!(out.reconstruct().max_abs_diff(&ComplexMatrix::from_diag(&[1.0, 5.0, 2.0])) < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let z = ComplexMatrix::zeros(4, 2);
        let out = svd(&z).unwrap();
        assert!(out.s.iter().all(|&s| s == 0.0));
        assert!(out.u.orthonormality_error() < 1e-12);
        assert!(out.v.orthonormality_error() < 1e-12);
    }

    #[test]
    fn wide_matrix_goes_through_adjoint() {
        let a = ComplexMatrix::from_fn(2, 5, |i, j| Complex64::new((i + j) as f64, (i * j) as f64 - 1.0));
        let out = svd(&a).unwrap();
        assert_eq!(out.u.shape(), (2, 2));
        assert_eq!(out.v.shape(), (5, 2));
        assert!(out.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn rank_deficient_u_still_orthonormal() {
        let col = vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 0.0)];
        let a = ComplexMatrix::from_columns(&[col.clone(), col.iter().map(|z| z * 2.0).collect()]);
        let out = svd(&a).unwrap();
        assert!(out.s[1] < 1e-12 * out.s[0]);
        assert!(out.u.orthonormality_error() < 1e-10);
        assert!(out.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn completion_is_unitary() {
        let u = ComplexMatrix::from_columns(&[vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ]]);
        let full = complete_basis(&u);
        assert_eq!(full.shape(), (3, 3));
        assert!(full.orthonormality_error() < 1e-12);
        assert_eq!(full.column(0), u.column(0));
    }
}
