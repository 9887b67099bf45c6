//! Closed-form estimates of the detection error caused by fronthaul
//! quantization, and the measured counterpart.
//!
//! With `dY` the compression error and `H^+` the detector, a Gaussian
//! stand-in for `dY` gives `||H^+ dY|| ~ ||H^+||_F ||dY|| / sqrt(N_beam)`.
//! Combining that with `||Y|| ~ ||H||_F ||X|| / sqrt(N_user)` and unit-energy
//! symbols leaves the relative detection error
//! `delta_y * cond_F(H) / sqrt(N_beam N_user)`.
//!
//! When a block shares one exponent the mantissa precision applies to the
//! block maximum rather than to each sample, which costs the expected
//! peak-to-RMS ratio of `2 n12` Gaussian components, at most
//! `sqrt(2 ln(4 n12))`.

use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::linalg::{mmse_weights, ComplexMatrix, LinalgError};
use crate::rng::{complex_gaussian, stream, Purpose};
use crate::signal::ResourceGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("clean detector output has zero energy")]
    ZeroReference,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, PredictorError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(PredictorError::NonPositive { name, value })
    }
}

/// `sqrt(2 ln(4 n12))`, the common-exponent growth factor.
pub fn common_exponent_factor(n12: usize) -> f64 {
    (2.0 * (4.0 * n12 as f64).ln()).sqrt()
}

/// Per-sample error model: `delta_y * cond_f / sqrt(n_beam n_user)`.
pub fn predict_error(delta_y: f64, n_beam: usize, n_user: usize, cond_f: f64) -> Result<f64, PredictorError> {
    positive("delta_y", delta_y)?;
    positive("n_beam", n_beam as f64)?;
    positive("n_user", n_user as f64)?;
    positive("cond_f", cond_f)?;
    Ok(delta_y * cond_f / ((n_beam * n_user) as f64).sqrt())
}

/// Common-exponent model:
/// `delta_y * sqrt(2 ln(4 n12) / (n_beam n_user)) * cond_f`.
///
/// Here `delta_y` is the mantissa precision relative to the block peak
/// (see [`crate::codec::block_scaled_delta_y`]).
pub fn predict_error_common_exp(
    delta_y: f64,
    n_beam: usize,
    n_user: usize,
    n12: usize,
    cond_f: f64,
) -> Result<f64, PredictorError> {
    positive("n12", n12 as f64)?;
    Ok(predict_error(delta_y, n_beam, n_user, cond_f)? * common_exponent_factor(n12))
}

/// Inputs and output of one prediction, kept together for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPrediction {
    pub delta_y: f64,
    pub n_beam: usize,
    pub n_user: usize,
    pub n12: usize,
    pub cond_f: f64,
    pub predicted_error: f64,
}

impl ErrorPrediction {
    pub fn common_exp(delta_y: f64, n_beam: usize, n_user: usize, n12: usize, cond_f: f64) -> Result<Self, PredictorError> {
        Ok(Self {
            delta_y,
            n_beam,
            n_user,
            n12,
            cond_f,
            predicted_error: predict_error_common_exp(delta_y, n_beam, n_user, n12, cond_f)?,
        })
    }
}

/// Monte-Carlo check of `E ||A W B||_F^2 = ||A||_F^2 ||B||_F^2` for `W`
/// with independent unit-variance complex Gaussian entries. Returns
/// `(empirical mean, exact value)`.
pub fn gaussian_product_mc(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64), PredictorError> {
    if trials == 0 {
        return Err(PredictorError::NonPositive {
            name: "trials",
            value: 0.0,
        });
    }
    let (rows, cols) = (a.cols(), b.rows());
    let mut sum = 0.0;
    for t in 0..trials {
        let mut rng = stream(seed, Purpose::MonteCarlo, t as u64);
        let omega = ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng));
        sum += a.matmul(&omega)?.matmul(b)?.frobenius_norm_sqr();
    }
    Ok((sum / trials as f64, a.frobenius_norm_sqr() * b.frobenius_norm_sqr()))
}

/// Relative change of the MMSE output caused by replacing `y_clean` with
/// `y_decoded`: `||W dy|| / ||W y_clean||` aggregated over all subcarriers,
/// with `W` built per resource block from `h_beam`.
pub fn measure_detection_error(
    y_clean: &ResourceGrid,
    y_decoded: &ResourceGrid,
    h_beam: &ChannelRealization,
    sigma2: f64,
) -> Result<f64, PredictorError> {
    if !y_clean.same_shape(y_decoded) {
        return Err(PredictorError::DimensionMismatch("clean and decoded grids differ".into()));
    }
    if y_clean.n_streams() != h_beam.m_antennas() || y_clean.n_sc() % h_beam.n_rb() != 0 {
        return Err(PredictorError::DimensionMismatch(format!(
            "{} x {} grid for {} blocks of {} rows",
            y_clean.n_sc(),
            y_clean.n_streams(),
            h_beam.n_rb(),
            h_beam.m_antennas()
        )));
    }
    let n12 = y_clean.n_sc() / h_beam.n_rb();
    let (mut err, mut reference) = (0.0, 0.0);
    for (rb, h) in h_beam.blocks().iter().enumerate() {
        let w = mmse_weights(h, sigma2)?;
        for sc in rb * n12..(rb + 1) * n12 {
            let clean = y_clean.subcarrier(sc);
            let diff: Vec<_> = y_decoded.subcarrier(sc).iter().zip(clean).map(|(a, b)| a - b).collect();
            err += w.mul_vec(&diff)?.iter().map(|z| z.norm_sqr()).sum::<f64>();
            reference += w.mul_vec(clean)?.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    if reference == 0.0 {
        return Err(PredictorError::ZeroReference);
    }
    Ok((err / reference).sqrt())
}
