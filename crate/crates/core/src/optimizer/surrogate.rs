//! Integer surrogate search: fit a cubic RBF to all samples (values above
//! the median capped at the median), draw candidates around the incumbent
//! and uniformly, and evaluate the candidate with the best weighted mix of
//! predicted value and distance from existing samples.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use rand_distr::{Distribution, Normal};

use super::rbf::RbfInterpolant;
use super::{check_bounds, space_size, OptimizerError};
use crate::rng::{stream, Purpose};

/// Weight on the surrogate value; the remainder rewards distance.
const MERIT_WEIGHTS: [f64; 4] = [0.3, 0.5, 0.8, 0.95];
const MAX_PERTURBED_CANDIDATES: usize = 400;
/// Spaces this small are enumerated once the random candidates run dry.
const ENUMERATION_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateOptions {
    pub lo: i32,
    pub hi: i32,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Points evaluated first, in order.
    pub initial: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Vec<i32>,
    pub best_value: f64,
    /// Every evaluation in order.
    pub history: Vec<(Vec<i32>, f64)>,
}

impl SearchResult {
    pub fn evaluations(&self) -> usize {
        self.history.len()
    }
}

/// [`try_surrogate_optimize`] for an infallible objective.
pub fn surrogate_optimize<F>(mut objective: F, dim: usize, options: &SurrogateOptions) -> Result<SearchResult, OptimizerError>
where
    F: FnMut(&[i32]) -> f64,
{
    try_surrogate_optimize(|x: &[i32]| Ok::<_, OptimizerError>(objective(x)), dim, options)
}

pub fn try_surrogate_optimize<F, E>(mut objective: F, dim: usize, options: &SurrogateOptions) -> Result<SearchResult, E>
where
    F: FnMut(&[i32]) -> Result<f64, E>,
    E: From<OptimizerError>,
{
    let SurrogateOptions {
        lo,
        hi,
        budget,
        seed,
        ..
    } = *options;
    check_bounds(lo, hi)?;
    if dim == 0 {
        return Err(OptimizerError::InvalidArgument("dimension must be positive".into()).into());
    }
    if budget < dim + 2 {
        return Err(OptimizerError::BudgetTooSmall { budget, dim }.into());
    }
    if lo == hi {
        let x = vec![lo; dim];
        let v = finite(objective(&x)?, &x)?;
        return Ok(SearchResult {
            best: x.clone(),
            best_value: v,
            history: vec![(x, v)],
        });
    }
    for p in &options.initial {
        if p.len() != dim || p.iter().any(|&v| v < lo || v > hi) {
            return Err(OptimizerError::InvalidArgument(format!("initial point {p:?} outside the search box")).into());
        }
    }

    let mut rng = stream(seed, Purpose::Optimizer, 0);
    let size = space_size(dim, lo, hi);
    let budget = budget.min(usize::try_from(size).unwrap_or(usize::MAX));
    let mut search = Search {
        dim,
        lo,
        hi,
        seen: HashSet::new(),
        history: Vec::new(),
        best: None,
    };

    // initial design: given points, a simplex around the first, then random fill
    let first = options
        .initial
        .first()
        .cloned()
        .unwrap_or_else(|| (0..dim).map(|_| rng.random_range(lo..=hi)).collect());
    let mut design = options.initial.clone();
    design.push(first.clone());
    for k in 0..dim {
        let mut p = first.clone();
        p[k] = if p[k] < hi { p[k] + 1 } else { p[k] - 1 };
        design.push(p);
    }
    let n_init = (2 * (dim + 1)).max(options.initial.len() + dim + 1).min(budget);
    while design.len() < n_init + options.initial.len() {
        design.push((0..dim).map(|_| rng.random_range(lo..=hi)).collect());
    }
    for p in design {
        if search.history.len() >= n_init.min(budget) {
            break;
        }
        if search.seen.contains(&p) {
            continue;
        }
        let v = finite(objective(&p)?, &p)?;
        search.record(p, v);
    }

    let points = search.history.iter().map(|h| h.0.clone()).collect();
    let mut surrogate = RbfInterpolant::fit(dim, points, capped_values(&search.history))?;

    let mut sigma = (0.2 * f64::from(hi - lo)).max(1.0);
    let sigma_min = 1.0;
    let sigma_max = f64::from(hi - lo);
    let (mut successes, mut failures) = (0usize, 0usize);
    let fail_limit = dim.max(5);
    let n_perturbed = (20 * dim).clamp(50, MAX_PERTURBED_CANDIDATES);
    let n_uniform = (n_perturbed / 10).max(5);
    let start = search.history.len();
    let mut iteration = 0usize;

    while search.history.len() < budget {
        let w = MERIT_WEIGHTS[iteration % MERIT_WEIGHTS.len()];
        // perturb fewer coordinates as the search matures
        let used = (search.history.len() - start) as f64;
        let horizon = ((budget - start) as f64 + 1.0).ln().max(f64::MIN_POSITIVE);
        let p_select = (20.0 / dim as f64).min(1.0) * (1.0 - (used + 1.0).ln() / horizon);
        let p_select = p_select.max(1.0 / dim as f64);

        let incumbent = search.best.as_ref().expect("initial design evaluated").1.clone();
        let mut candidates = Vec::with_capacity(n_perturbed + n_uniform);
        let normal = Normal::new(0.0, sigma).expect("positive sigma");
        for _ in 0..n_perturbed {
            let mut x = incumbent.clone();
            let mut touched = false;
            for v in x.iter_mut() {
                if rng.random::<f64>() < p_select {
                    *v = perturb(*v, normal.sample(&mut rng), &mut rng, lo, hi);
                    touched = true;
                }
            }
            if !touched {
                let k = rng.random_range(0..dim);
                x[k] = perturb(x[k], normal.sample(&mut rng), &mut rng, lo, hi);
            }
            candidates.push(x);
        }
        for _ in 0..n_uniform {
            candidates.push((0..dim).map(|_| rng.random_range(lo..=hi)).collect());
        }
        candidates.retain(|c| !search.seen.contains(c));
        if candidates.is_empty() && size <= ENUMERATION_LIMIT {
            candidates = enumerate_unseen(dim, lo, hi, &search.seen);
        }
        if candidates.is_empty() {
            iteration += 1;
            if iteration > 1000 * budget {
                break;
            }
            continue;
        }

        let next = select(&surrogate, &candidates, &incumbent, w);
        let v = finite(objective(&next)?, &next)?;
        let improved = v < search.best.as_ref().expect("incumbent").0 - 1e-12;
        search.record(next.clone(), v);
        surrogate.push_point(next, capped_values(&search.history))?;

        if improved {
            successes += 1;
            failures = 0;
        } else {
            failures += 1;
            successes = 0;
        }
        if successes >= 3 {
            sigma = (2.0 * sigma).min(sigma_max);
            successes = 0;
        }
        if failures >= fail_limit {
            sigma = (0.5 * sigma).max(sigma_min);
            failures = 0;
        }
        iteration += 1;
    }

    let (best_value, best) = search.best.expect("at least one evaluation");
    Ok(SearchResult {
        best,
        best_value,
        history: search.history,
    })
}

struct Search {
    dim: usize,
    lo: i32,
    hi: i32,
    seen: HashSet<Vec<i32>>,
    history: Vec<(Vec<i32>, f64)>,
    best: Option<(f64, Vec<i32>)>,
}

impl Search {
    fn record(&mut self, x: Vec<i32>, v: f64) {
        debug_assert!(x.len() == self.dim && x.iter().all(|&c| c >= self.lo && c <= self.hi));
        let better = match &self.best {
            None => true,
            Some((b, bx)) => v < *b || (v == *b && x < *bx),
        };
        if better {
            self.best = Some((v, x.clone()));
        }
        self.seen.insert(x.clone());
        self.history.push((x, v));
    }
}

/// Sample values with everything above the median replaced by the median,
/// so a few very poor points do not dominate the fit near the optimum.
fn capped_values(history: &[(Vec<i32>, f64)]) -> Vec<f64> {
    let mut sorted: Vec<f64> = history.iter().map(|h| h.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    history.iter().map(|h| h.1.min(median)).collect()
}

fn finite(v: f64, x: &[i32]) -> Result<f64, OptimizerError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OptimizerError::NonFiniteObjective(x.to_vec()))
    }
}

fn perturb<R: Rng>(v: i32, step: f64, rng: &mut R, lo: i32, hi: i32) -> i32 {
    let mut d = step.round() as i32;
    if d == 0 {
        d = if rng.random::<bool>() { 1 } else { -1 };
    }
    let mut out = v + d;
    // reflect once so boundary incumbents still move inward
    if out > hi {
        out = (2 * hi - out).max(lo);
    } else if out < lo {
        out = (2 * lo - out).min(hi);
    }
    out
}

fn enumerate_unseen(dim: usize, lo: i32, hi: i32, seen: &HashSet<Vec<i32>>) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut x = vec![lo; dim];
    loop {
        if !seen.contains(&x) {
            out.push(x.clone());
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if x[k] < hi {
                x[k] += 1;
                break;
            }
            x[k] = lo;
        }
    }
}

/// Lowest `w * scaled value + (1 - w) * scaled closeness`; earlier
/// candidates win ties.
fn select(surrogate: &RbfInterpolant, candidates: &[Vec<i32>], incumbent: &[i32], w: f64) -> Vec<i32> {
    let ref_sq = surrogate.squared_distances(incumbent);
    let scored: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|c| {
            let changed: Vec<usize> = (0..c.len()).filter(|&k| c[k] != incumbent[k]).collect();
            if 2 * changed.len() < c.len() {
                surrogate.eval_near(c, incumbent, &ref_sq, &changed)
            } else {
                surrogate.eval_with_distance(c)
            }
        })
        .collect();
    let (s_min, s_max) = min_max(scored.iter().map(|s| s.0));
    let (d_min, d_max) = min_max(scored.iter().map(|s| s.1));
    let unit = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
    let mut best = 0;
    let mut best_merit = f64::INFINITY;
    for (i, &(s, d)) in scored.iter().enumerate() {
        let merit = w * unit(s, s_min, s_max) + (1.0 - w) * (1.0 - unit(d, d_min, d_max));
        if merit < best_merit {
            best_merit = merit;
            best = i;
        }
    }
    candidates[best].clone()
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(lo: i32, hi: i32, budget: usize, seed: u64) -> SurrogateOptions {
        SurrogateOptions {
            lo,
            hi,
            budget,
            seed,
            initial: Vec::new(),
        }
    }

    #[test]
    fn separable_quadratic() {
        let f = |x: &[i32]| x.iter().map(|&v| f64::from((v - 3) * (v - 3))).sum();
        let r = surrogate_optimize(f, 4, &opts(1, 10, 120, 11)).unwrap();
        assert_eq!(r.best, vec![3, 3, 3, 3]);
        assert!(r.evaluations() <= 120);
    }

    #[test]
    fn budget_too_small() {
        assert!(matches!(
            surrogate_optimize(|_| 0.0, 4, &opts(1, 10, 5, 0)),
            Err(OptimizerError::BudgetTooSmall { budget: 5, dim: 4 })
        ));
    }

    #[test]
    fn deterministic_in_seed() {
        let f = |x: &[i32]| (f64::from(x[0]) * 1.3).sin() + f64::from(x[1] * x[2]) * 0.1;
        let a = surrogate_optimize(f, 3, &opts(1, 10, 40, 5)).unwrap();
        let b = surrogate_optimize(f, 3, &opts(1, 10, 40, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_budget_covers_small_space() {
        let f = |x: &[i32]| f64::from((x[0] * 7 + x[1] * 3 + x[2]) % 5);
        let r = surrogate_optimize(f, 3, &opts(1, 4, 64, 2)).unwrap();
        assert_eq!(r.evaluations(), 64);
        let unique: HashSet<_> = r.history.iter().map(|h| h.0.clone()).collect();
        assert_eq!(unique.len(), 64);
    }

    #[test]
    fn initial_points_come_first() {
        let mut o = opts(1, 10, 20, 0);
        o.initial = vec![vec![6, 6]];
        let r = surrogate_optimize(|x: &[i32]| f64::from(x[0] + x[1]), 2, &o).unwrap();
        assert_eq!(r.history[0].0, vec![6, 6]);
        assert_eq!(r.best, vec![1, 1]);
    }
}
