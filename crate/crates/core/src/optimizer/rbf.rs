//! Cubic radial-basis interpolant with a linear polynomial tail.
//!
//! The saddle system `[[0, P^T], [P, Phi]] [c; lambda] = [0; f]` is kept as an
//! explicit inverse so a new sample costs one bordered update instead of a
//! refactorization.

use super::OptimizerError;

/// Relative size below which a Schur complement is treated as breakdown.
const SCHUR_RTOL: f64 = 1e-13;

fn phi(r: f64) -> f64 {
    r * r * r
}

pub(crate) fn distance(a: &[i32], b: &[i32]) -> f64 {
    (sq_dist(a, b) as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct RbfInterpolant {
    dim: usize,
    points: Vec<Vec<i32>>,
    values: Vec<f64>,
    /// Inverse of the saddle matrix, unknowns ordered tail first.
    inverse: Vec<Vec<f64>>,
    tail: Vec<f64>,
    weights: Vec<f64>,
}

impl RbfInterpolant {
    /// Fits the initial design, which must contain `dim + 1` affinely
    /// independent points.
    pub fn fit(dim: usize, points: Vec<Vec<i32>>, values: Vec<f64>) -> Result<Self, OptimizerError> {
        let mut out = Self {
            dim,
            points,
            values,
            inverse: Vec::new(),
            tail: Vec::new(),
            weights: Vec::new(),
        };
        out.refit()?;
        Ok(out)
    }

    fn n_tail(&self) -> usize {
        self.dim + 1
    }

    fn tail_row(&self, x: &[i32]) -> Vec<f64> {
        std::iter::once(1.0).chain(x.iter().map(|&v| f64::from(v))).collect()
    }

    fn border(&self, x: &[i32]) -> Vec<f64> {
        let mut b = self.tail_row(x);
        b.extend(self.points.iter().map(|p| phi(distance(x, p))));
        b
    }

    fn refit(&mut self) -> Result<(), OptimizerError> {
        let t = self.n_tail();
        let n = t + self.points.len();
        let mut a = vec![vec![0.0; n]; n];
        for (i, p) in self.points.iter().enumerate() {
            let row = self.tail_row(p);
            for (k, v) in row.into_iter().enumerate() {
                a[t + i][k] = v;
                a[k][t + i] = v;
            }
            for (j, q) in self.points.iter().enumerate() {
                a[t + i][t + j] = phi(distance(p, q));
            }
        }
        self.inverse = invert(a).ok_or(OptimizerError::SingularSurrogate)?;
        self.solve_coefficients();
        Ok(())
    }

    fn solve_coefficients(&mut self) {
        let t = self.n_tail();
        let coef: Vec<f64> = self.inverse.iter().map(|row| dot(&row[t..], &self.values)).collect();
        self.tail = coef[..t].to_vec();
        self.weights = coef[t..].to_vec();
    }

    /// Adds one sample, falling back to a full refit if the bordered update
    /// loses precision.
    pub fn push(&mut self, x: Vec<i32>, value: f64) -> Result<(), OptimizerError> {
        let mut values = self.values.clone();
        values.push(value);
        self.push_point(x, values)
    }

    /// Adds a point and replaces all sample values at once (`values` covers
    /// the new point too). Used when earlier values are transformed as the
    /// sample set grows.
    pub fn push_point(&mut self, x: Vec<i32>, values: Vec<f64>) -> Result<(), OptimizerError> {
        assert_eq!(values.len(), self.points.len() + 1, "one value per sample");
        let b = self.border(&x);
        let u: Vec<f64> = self.inverse.iter().map(|row| dot(row, &b)).collect();
        let s = -dot(&b, &u);
        let scale = dot(&b, &b).max(1.0);
        self.points.push(x);
        self.values = values;
        if !s.is_finite() || s.abs() < SCHUR_RTOL * scale {
            return self.refit();
        }
        // rank-one update fused with the coefficient solve: one pass over the inverse
        let t = self.n_tail();
        let v_new = *self.values.last().expect("pushed above");
        let mut coef = Vec::with_capacity(u.len() + 1);
        for (row, &ui) in self.inverse.iter_mut().zip(&u) {
            let f = ui / s;
            for (g, &uj) in row.iter_mut().zip(&u) {
                *g += f * uj;
            }
            row.push(-f);
            coef.push(dot(&row[t..], &self.values[..row.len() - t - 1]) - f * v_new);
        }
        let mut last: Vec<f64> = u.iter().map(|v| -v / s).collect();
        last.push(1.0 / s);
        coef.push(dot(&last[t..], &self.values));
        self.inverse.push(last);
        self.weights = coef.split_off(t);
        self.tail = coef;
        Ok(())
    }

    /// Replaces the sample values, keeping the points.
    pub fn set_values(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.points.len(), "one value per sample");
        self.values = values;
        self.solve_coefficients();
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<i32>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Surrogate value and distance to the nearest sample.
    pub fn eval_with_distance(&self, x: &[i32]) -> (f64, f64) {
        let mut s = self.tail[0];
        for (c, &v) in self.tail[1..].iter().zip(x) {
            s += c * f64::from(v);
        }
        let mut nearest = f64::INFINITY;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let r = distance(x, p);
            nearest = nearest.min(r);
            s += w * phi(r);
        }
        (s, nearest)
    }

    pub fn eval(&self, x: &[i32]) -> f64 {
        self.eval_with_distance(x).0
    }

    /// Squared distances from `reference` to every sample.
    pub fn squared_distances(&self, reference: &[i32]) -> Vec<i64> {
        self.points.iter().map(|p| sq_dist(reference, p)).collect()
    }

    /// Like [`Self::eval_with_distance`] for a point that differs from
    /// `reference` only in `changed` coordinates; `ref_sq` comes from
    /// [`Self::squared_distances`].
    pub fn eval_near(&self, x: &[i32], reference: &[i32], ref_sq: &[i64], changed: &[usize]) -> (f64, f64) {
        let mut s = self.tail[0];
        for (c, &v) in self.tail[1..].iter().zip(x) {
            s += c * f64::from(v);
        }
        let mut nearest = i64::MAX;
        for ((p, w), &base) in self.points.iter().zip(&self.weights).zip(ref_sq) {
            let mut d2 = base;
            for &k in changed {
                let a = i64::from(x[k] - p[k]);
                let b = i64::from(reference[k] - p[k]);
                d2 += a * a - b * b;
            }
            nearest = nearest.min(d2);
            s += w * phi((d2 as f64).sqrt());
        }
        (s, (nearest as f64).sqrt())
    }
}

fn sq_dist(a: &[i32], b: &[i32]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = i64::from(x - y);
            d * d
        })
        .sum()
}

/// Four independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[pivot][col].abs() > 1e-14 * norm.max(1.0)) {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> (Vec<Vec<i32>>, Vec<f64>) {
        let pts = vec![vec![1, 1], vec![2, 1], vec![1, 2], vec![3, 3], vec![4, 1]];
        let vals = pts.iter().map(|p| f64::from(p[0] * p[0] - 2 * p[1])).collect();
        (pts, vals)
    }

    #[test]
    fn interpolates_samples() {
        let (pts, vals) = design();
        let rbf = RbfInterpolant::fit(2, pts.clone(), vals.clone()).unwrap();
        for (p, v) in pts.iter().zip(&vals) {
            assert!((rbf.eval(p) - v).abs() < 1e-8);
        }
    }

    #[test]
    fn bordered_update_matches_refit() {
        let (pts, vals) = design();
        let mut inc = RbfInterpolant::fit(2, pts[..3].to_vec(), vals[..3].to_vec()).unwrap();
        inc.push(pts[3].clone(), vals[3]).unwrap();
        inc.push(pts[4].clone(), vals[4]).unwrap();
        let full = RbfInterpolant::fit(2, pts, vals).unwrap();
        for x in [[2, 2], [4, 4], [3, 1], [0, 5]] {
            assert!((inc.eval(&x) - full.eval(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn reproduces_affine_functions() {
        let pts = vec![vec![1, 1], vec![2, 1], vec![1, 2], vec![5, 4], vec![3, 7]];
        let f = |p: &[i32]| 2.0 + 0.5 * f64::from(p[0]) - 3.0 * f64::from(p[1]);
        let vals = pts.iter().map(|p| f(p)).collect();
        let rbf = RbfInterpolant::fit(2, pts, vals).unwrap();
        assert!((rbf.eval(&[9, -2]) - f(&[9, -2])).abs() < 1e-8);
    }

    #[test]
    fn near_evaluation_matches_direct() {
        let (pts, vals) = design();
        let rbf = RbfInterpolant::fit(2, pts, vals).unwrap();
        let reference = [2, 3];
        let sq = rbf.squared_distances(&reference);
        for (x, changed) in [([2, 3], vec![]), ([5, 3], vec![0]), ([2, -1], vec![1]), ([0, 0], vec![0, 1])] {
            let (a, da) = rbf.eval_near(&x, &reference, &sq, &changed);
            let (b, db) = rbf.eval_with_distance(&x);
            assert!((a - b).abs() < 1e-9 && (da - db).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_design_is_singular() {
        let pts = vec![vec![1, 1], vec![2, 2], vec![3, 3]];
        assert!(RbfInterpolant::fit(2, pts, vec![0.0, 1.0, 2.0]).is_err());
    }
}
