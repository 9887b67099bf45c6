//! Lloyd-Max scalar quantizers for the unit Gaussian.

use std::sync::OnceLock;

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

/// Largest supported codebook size in bits.
pub const MAX_CODEBOOK_BITS: u32 = 12;

/// Iteration stops once no level is farther than this from its cell centroid.
/// Roundoff in the tail masses keeps the residual near 1e-13 at 10+ bits.
const LEVEL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Optimal reconstruction levels and decision thresholds, both ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerCodebook {
    pub bits: u32,
    pub levels: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl QuantizerCodebook {
    /// Index of the nearest level; a value exactly on a threshold maps to
    /// the lower index.
    pub fn quantize(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t < x)
    }

    /// Mean squared error for a unit-variance Gaussian input.
    pub fn distortion(&self) -> f64 {
        gaussian_distortion(&self.levels, &self.thresholds)
    }

    /// Largest distance from a point of `[-limit, limit]` to its reconstruction.
    pub fn max_cell_radius(&self, limit: f64) -> f64 {
        let n = self.levels.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(-limit);
        edges.extend(self.thresholds.iter().map(|t| t.clamp(-limit, limit)));
        edges.push(limit);
        (0..n)
            .map(|i| (self.levels[i] - edges[i]).abs().max((edges[i + 1] - self.levels[i]).abs()))
            .fold(0.0, f64::max)
    }
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        INV_SQRT_2PI * (-0.5 * x * x).exp()
    }
}

/// Upper tail `P(X > x)`.
fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `P(a < X <= b)` computed from whichever tail keeps precision.
fn mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        upper_tail(a) - upper_tail(b)
    } else if b <= 0.0 {
        upper_tail(-b) - upper_tail(-a)
    } else {
        1.0 - upper_tail(b) - upper_tail(-a)
    }
}

/// Conditional mean of the Gaussian on `(a, b]`.
fn centroid(a: f64, b: f64) -> f64 {
    let p = mass(a, b);
    if p > 0.0 {
        (pdf(a) - pdf(b)) / p
    } else {
        // cell beyond double precision; its midpoint is as good as any
        0.5 * (a.max(-40.0) + b.min(40.0))
    }
}

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// MSE of quantizing a unit Gaussian with the given levels and thresholds.
pub fn gaussian_distortion(levels: &[f64], thresholds: &[f64]) -> f64 {
    let n = levels.len();
    let mut d = 0.0;
    for (i, &y) in levels.iter().enumerate() {
        let a = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
        let b = if i == n - 1 { f64::INFINITY } else { thresholds[i] };
        let p = mass(a, b);
        let first = pdf(a) - pdf(b);
        let a_term = if a.is_infinite() { 0.0 } else { a * pdf(a) };
        let b_term = if b.is_infinite() { 0.0 } else { b * pdf(b) };
        let second = p + a_term - b_term;
        d += second - 2.0 * y * first + y * y * p;
    }
    d
}

/// Solves the Lloyd fixed point for the unit Gaussian.
///
/// Levels start from the high-resolution optimum (point density
/// proportional to the cube root of the density, i.e. quantiles of
/// N(0, 3)). Plain Lloyd steps (nearest-neighbour thresholds, then
/// conditional means) converge very slowly for large codebooks, so each
/// round first tries a Newton step on `levels - centroids(levels) = 0`,
/// whose Jacobian is tridiagonal, and falls back to a Lloyd step whenever
/// Newton does not reduce the residual. Symmetry about zero is enforced
/// throughout.
pub fn lloyd_max_codebook(bits: u32) -> QuantizerCodebook {
    assert!((1..=MAX_CODEBOOK_BITS).contains(&bits), "codebook bits must be in 1..={MAX_CODEBOOK_BITS}");
    let n = 1usize << bits;
    let wide = Normal::new(0.0, 3f64.sqrt()).expect("valid normal");
    let mut levels: Vec<f64> = (0..n).map(|i| wide.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
    symmetrize(&mut levels);

    let mut residual = lloyd_residual(&levels);
    for _ in 0..MAX_ITERATIONS {
        if residual < LEVEL_TOL {
            break;
        }
        let candidate = newton_step(&levels);
        let accepted = candidate
            .filter(|c| c.windows(2).all(|w| w[0] < w[1]))
            .map(|c| (lloyd_residual(&c), c))
            .filter(|(r, _)| *r < residual);
        match accepted {
            Some((r, c)) => {
                levels = c;
                residual = r;
            }
            None => {
                levels = lloyd_step(&levels);
                residual = lloyd_residual(&levels);
            }
        }
    }
    let thresholds = midpoints(&levels);
    QuantizerCodebook {
        bits,
        levels,
        thresholds,
    }
}

fn cell(thresholds: &[f64], i: usize) -> (f64, f64) {
    let n = thresholds.len() + 1;
    let a = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
    let b = if i == n - 1 { f64::INFINITY } else { thresholds[i] };
    (a, b)
}

fn lloyd_step(levels: &[f64]) -> Vec<f64> {
    let thresholds = midpoints(levels);
    let mut next: Vec<f64> = (0..levels.len())
        .map(|i| {
            let (a, b) = cell(&thresholds, i);
            centroid(a, b)
        })
        .collect();
    symmetrize(&mut next);
    next
}

/// Largest distance between a level and the centroid of its cell.
fn lloyd_residual(levels: &[f64]) -> f64 {
    levels
        .iter()
        .zip(lloyd_step(levels))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn newton_step(levels: &[f64]) -> Option<Vec<f64>> {
    let n = levels.len();
    let thresholds = midpoints(levels);
    // F_i = y_i - c_i(t_{i-1}, t_i), t_i = (y_i + y_{i+1}) / 2
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let (a, b) = cell(&thresholds, i);
        let p = mass(a, b);
        if !(p > 0.0) {
            return None;
        }
        let c = (pdf(a) - pdf(b)) / p;
        let dc_da = if a.is_finite() { pdf(a) * (c - a) / p } else { 0.0 };
        let dc_db = if b.is_finite() { pdf(b) * (b - c) / p } else { 0.0 };
        lower[i] = -0.5 * dc_da;
        diag[i] = 1.0 - 0.5 * (dc_da + dc_db);
        upper[i] = -0.5 * dc_db;
        rhs[i] = -(levels[i] - c);
    }
    // Thomas algorithm
    for i in 1..n {
        if diag[i - 1] == 0.0 {
            return None;
        }
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut step = vec![0.0; n];
    for i in (0..n).rev() {
        let carry = if i + 1 < n { upper[i] * step[i + 1] } else { 0.0 };
        if diag[i] == 0.0 {
            return None;
        }
        step[i] = (rhs[i] - carry) / diag[i];
    }
    let mut next: Vec<f64> = levels.iter().zip(&step).map(|(y, d)| y + d).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return None;
    }
    symmetrize(&mut next);
    Some(next)
}

fn symmetrize(levels: &mut [f64]) {
    let n = levels.len();
    for i in 0..n / 2 {
        let v = 0.5 * (levels[n - 1 - i] - levels[i]);
        levels[i] = -v;
        levels[n - 1 - i] = v;
    }
}

/// Shared, lazily built codebook for `bits`.
pub fn codebook(bits: u32) -> &'static QuantizerCodebook {
    static BOOKS: [OnceLock<QuantizerCodebook>; MAX_CODEBOOK_BITS as usize] = [const { OnceLock::new() }; 12];
    assert!((1..=MAX_CODEBOOK_BITS).contains(&bits), "codebook bits must be in 1..={MAX_CODEBOOK_BITS}");
    BOOKS[bits as usize - 1].get_or_init(|| lloyd_max_codebook(bits))
}
