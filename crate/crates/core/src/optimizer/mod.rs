//! Per-beam mantissa training: the loss, an RBF surrogate search over integer
//! profiles, and a brute-force reference for small instances.

mod rbf;
mod surrogate;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{MantissaProfile, MAX_MANTISSA_BITS, MIN_MANTISSA_BITS};

pub use rbf::RbfInterpolant;
pub use surrogate::{surrogate_optimize, try_surrogate_optimize, SearchResult, SurrogateOptions};

/// Largest search space [`exhaustive_oracle`] will enumerate.
pub const MAX_EXHAUSTIVE_POINTS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("invalid loss weights: {0}")]
    InvalidWeights(String),
    #[error("budget {budget} is below dim + 2 = {}", dim + 2)]
    BudgetTooSmall { budget: usize, dim: usize },
    #[error("invalid bounds [{lo}, {hi}]")]
    InvalidBounds { lo: i32, hi: i32 },
    #[error("search space of {0} points is too large to enumerate")]
    SpaceTooLarge(u64),
    #[error("invalid search setup: {0}")]
    InvalidArgument(String),
    #[error("objective returned a non-finite value at {0:?}")]
    NonFiniteObjective(Vec<i32>),
    #[error("surrogate system is singular")]
    SingularSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub evm_target_percent: f64,
}

impl LossWeights {
    pub const DEFAULT_ALPHA: f64 = 32.0;
    pub const DEFAULT_BETA: f64 = 0.5;

    pub fn new(alpha: f64, beta: f64, evm_target_percent: f64) -> Result<Self, OptimizerError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(alpha) || !ok(beta) {
            return Err(OptimizerError::InvalidWeights(format!("alpha {alpha} and beta {beta} must be positive")));
        }
        if !ok(evm_target_percent) {
            return Err(OptimizerError::InvalidWeights(format!(
                "EVM target {evm_target_percent} must be positive"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            evm_target_percent,
        })
    }

    /// Default `alpha` and `beta` with the given EVM target.
    pub fn with_target(evm_target_percent: f64) -> Result<Self, OptimizerError> {
        Self::new(Self::DEFAULT_ALPHA, Self::DEFAULT_BETA, evm_target_percent)
    }
}

/// `mean(B) + alpha max(evm / target - 1, 0) + beta sum max(B[i+1] - B[i], 0)`.
pub fn loss(profile: &MantissaProfile, evm_percent: f64, w: &LossWeights) -> f64 {
    loss_terms(profile.bits(), evm_percent, w)
}

fn loss_terms(bits: &[u8], evm_percent: f64, w: &LossWeights) -> f64 {
    let mean = bits.iter().map(|&b| f64::from(b)).sum::<f64>() / bits.len() as f64;
    let excess = (evm_percent / w.evm_target_percent - 1.0).max(0.0);
    let ascent: f64 = bits
        .windows(2)
        .map(|p| (f64::from(p[1]) - f64::from(p[0])).max(0.0))
        .sum();
    mean + w.alpha * excess + w.beta * ascent
}

fn check_bounds(lo: i32, hi: i32) -> Result<(), OptimizerError> {
    if lo > hi {
        Err(OptimizerError::InvalidBounds { lo, hi })
    } else {
        Ok(())
    }
}

/// Number of integer points in `[lo, hi]^dim`, saturating.
pub fn space_size(dim: usize, lo: i32, hi: i32) -> u64 {
    let side = (i64::from(hi) - i64::from(lo) + 1).max(0) as u64;
    (0..dim).fold(1u64, |acc, _| acc.saturating_mul(side))
}

/// Exact minimizer over `[lo, hi]^dim`, ties going to the lexicographically
/// smallest point.
pub fn exhaustive_oracle<F>(mut objective: F, dim: usize, lo: i32, hi: i32) -> Result<Vec<i32>, OptimizerError>
where
    F: FnMut(&[i32]) -> f64,
{
    check_bounds(lo, hi)?;
    if dim == 0 {
        return Err(OptimizerError::InvalidArgument("dimension must be positive".into()));
    }
    let size = space_size(dim, lo, hi);
    if size > MAX_EXHAUSTIVE_POINTS {
        return Err(OptimizerError::SpaceTooLarge(size));
    }
    let mut x = vec![lo; dim];
    let mut best: Option<(f64, Vec<i32>)> = None;
    loop {
        let v = objective(&x);
        if !v.is_finite() {
            return Err(OptimizerError::NonFiniteObjective(x));
        }
        // enumeration is lexicographic, so strict improvement keeps the first
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x.clone()));
        }
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(best.expect("non-empty space").1);
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

/// A scenario that can be replayed with any mantissa profile.
pub trait ProfileEvaluator: Sync {
    type Error: From<OptimizerError> + Send;

    fn n_beam(&self) -> usize;

    /// Compression-only EVM in percent when coding with `profile`.
    fn evm_percent(&self, profile: &MantissaProfile) -> Result<f64, Self::Error>;

    /// Per-scenario EVM target overriding the one in the loss weights.
    fn evm_target_percent(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    Online,
    Offline,
}

impl std::str::FromStr for TrainingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "online" => Ok(Self::Online),
            "offline" => Ok(Self::Offline),
            other => Err(format!("unknown training mode '{other}', expected online or offline")),
        }
    }
}

/// Mean loss of `profile` over `scenarios`, evaluated in parallel.
pub fn mean_loss<S: ProfileEvaluator>(scenarios: &[S], profile: &MantissaProfile, w: &LossWeights) -> Result<f64, S::Error> {
    let losses: Vec<f64> = scenarios
        .par_iter()
        .map(|s| {
            let evm = s.evm_percent(profile)?;
            let mut wi = *w;
            if let Some(t) = s.evm_target_percent() {
                wi.evm_target_percent = t;
            }
            Ok(loss(profile, evm, &wi))
        })
        .collect::<Result<_, S::Error>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Trains a monotone profile. Online mode takes exactly one scenario, offline
/// mode averages the loss over at least two.
///
/// The uniform 6-bit profile seeds the search.
pub fn train_profile<S: ProfileEvaluator>(
    mode: TrainingMode,
    scenarios: &[S],
    w: &LossWeights,
    budget: usize,
    seed: u64,
) -> Result<MantissaProfile, S::Error> {
    let needed = match mode {
        TrainingMode::Online => 1,
        TrainingMode::Offline => 2,
    };
    if scenarios.len() < needed || (mode == TrainingMode::Online && scenarios.len() != 1) {
        return Err(OptimizerError::InvalidArgument(format!(
            "{mode:?} training got {} scenarios",
            scenarios.len()
        ))
        .into());
    }
    let n_beam = scenarios[0].n_beam();
    if scenarios.iter().any(|s| s.n_beam() != n_beam) {
        return Err(OptimizerError::InvalidArgument("scenarios disagree on beam count".into()).into());
    }
    let to_profile = |x: &[i32]| -> Result<MantissaProfile, OptimizerError> {
        let bits = x.iter().map(|&v| v as u8).collect();
        MantissaProfile::new(bits).map_err(|e| OptimizerError::InvalidArgument(e.to_string()))
    };
    let options = SurrogateOptions {
        lo: i32::from(MIN_MANTISSA_BITS),
        hi: i32::from(MAX_MANTISSA_BITS),
        budget,
        seed,
        initial: vec![vec![6; n_beam]],
    };
    let result = try_surrogate_optimize(
        |x: &[i32]| -> Result<f64, S::Error> { mean_loss(scenarios, &to_profile(x)?, w) },
        n_beam,
        &options,
    )?;
    Ok(to_profile(&result.best)?.project_monotone())
}
