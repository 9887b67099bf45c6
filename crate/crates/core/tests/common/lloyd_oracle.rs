//! Plain Lloyd iteration for the unit Gaussian. Cell masses come from
//! composite Simpson quadrature and first moments from the closed form
//! `pdf(a) - pdf(b)`, so nothing is shared with the library solver.

use statrs::distribution::{ContinuousCDF, Normal};

const TAIL: f64 = 12.0;

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn mass(a: f64, b: f64) -> f64 {
    let n = 2 * (((b - a) / 0.01).ceil() as usize).max(8);
    let h = (b - a) / n as f64;
    let mut s = pdf(a) + pdf(b);
    for k in 1..n {
        s += pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn cell(t: &[f64], i: usize) -> (f64, f64) {
    let a = if i == 0 { -TAIL } else { t[i - 1] };
    let b = if i == t.len() { TAIL } else { t[i] };
    (a, b)
}

/// Levels after iterating until no level moves by more than `1e-12`.
pub fn lloyd_oracle(bits: u32) -> Vec<f64> {
    let n = 1usize << bits;
    let wide = Normal::new(0.0, 3f64.sqrt()).unwrap();
    let mut y: Vec<f64> = (0..n).map(|i| wide.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
    for _ in 0..2_000_000 {
        let t: Vec<f64> = y.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut moved: f64 = 0.0;
        for (i, level) in y.iter_mut().enumerate() {
            let (a, b) = cell(&t, i);
            let c = (pdf(a) - pdf(b)) / mass(a, b);
            moved = moved.max((c - *level).abs());
            *level = c;
        }
        if moved < 1e-12 {
            break;
        }
    }
    y
}

/// Mean squared error of the given levels with midpoint thresholds,
/// by quadrature.
pub fn oracle_distortion(levels: &[f64]) -> f64 {
    let t: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut d = 0.0;
    for (i, &y) in levels.iter().enumerate() {
        let (a, b) = cell(&t, i);
        let n = 2 * (((b - a) / 0.001).ceil() as usize).max(8);
        let h = (b - a) / n as f64;
        let f = |x: f64| (x - y) * (x - y) * pdf(x);
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        d += s * h / 3.0;
    }
    d
}
