//! Synthetic uplink channels and the binary channel file format.

mod file;

pub use file::{load_channel, read_channel, save_channel, write_channel, CHANNEL_MAGIC, CHANNEL_VERSION};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::rng::{complex_gaussian, stream, Purpose};

/// Paths per cluster in the clustered model.
pub const SUBPATHS_PER_CLUSTER: usize = 8;

/// Cluster centers are drawn uniformly from this azimuth range (degrees).
pub const MAX_CLUSTER_AZIMUTH_DEG: f64 = 60.0;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid channel parameters: {0}")]
    InvalidParameters(String),
    #[error("channel file parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("channel file i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-resource-block channel matrices, all `m_antennas x n_layers`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    m_antennas: usize,
    n_layers: usize,
    per_rb: Vec<ComplexMatrix>,
}

impl ChannelRealization {
    pub fn new(per_rb: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let first = per_rb
            .first()
            .ok_or_else(|| ChannelError::InvalidParameters("channel needs at least one resource block".into()))?;
        let shape = first.shape();
        if per_rb.iter().any(|h| h.shape() != shape) {
            return Err(ChannelError::InvalidParameters(
                "all resource blocks must share one matrix shape".into(),
            ));
        }
        Ok(Self {
            m_antennas: shape.0,
            n_layers: shape.1,
            per_rb,
        })
    }

    pub fn n_rb(&self) -> usize {
        self.per_rb.len()
    }

    pub fn m_antennas(&self) -> usize {
        self.m_antennas
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn rb(&self, index: usize) -> &ComplexMatrix {
        &self.per_rb[index]
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.per_rb
    }

    /// `m x (n_layers * n_rb)` horizontal stack of all blocks.
    pub fn wideband_stack(&self) -> ComplexMatrix {
        let parts: Vec<&ComplexMatrix> = self.per_rb.iter().collect();
        ComplexMatrix::hstack(&parts).expect("blocks share row count")
    }

    /// Applies `f` to every block, e.g. to project onto a beam basis.
    pub fn map_blocks(
        &self,
        f: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    ) -> Result<ChannelRealization, ChannelError> {
        Self::new(self.per_rb.iter().map(f).collect())
    }
}

/// Uniform-linear-array response with half-wavelength spacing.
pub fn steering_vector(m: usize, azimuth_rad: f64) -> Vec<Complex64> {
    let phase = PI * azimuth_rad.sin();
    (0..m).map(|k| Complex64::from_polar(1.0, phase * k as f64)).collect()
}

/// Random matrix with prescribed spectral condition number.
///
/// Each block is `U diag(s) V^H` with Haar-distributed `U`, `V` and singular
/// values spaced log-uniformly between 1 and `1/cond_target`, then scaled to
/// `||H||_F^2 = m n`. Blocks are independent and each is drawn from its own
/// stream, so the result does not depend on generation order.
pub fn randsvd_channel(
    m: usize,
    n: usize,
    cond_target: f64,
    n_rb: usize,
    seed: u64,
) -> Result<ChannelRealization, ChannelError> {
    if n == 0 || n_rb == 0 {
        return Err(ChannelError::InvalidParameters("dimensions must be positive".into()));
    }
    if m < n {
        return Err(ChannelError::InvalidParameters(format!(
            "randsvd needs m >= n, got {m} x {n}"
        )));
    }
    if !(cond_target >= 1.0) || !cond_target.is_finite() {
        return Err(ChannelError::InvalidParameters(format!(
            "condition number target must be finite and >= 1, got {cond_target}"
        )));
    }
    let spectrum: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                1.0
            } else {
                cond_target.powf(-(k as f64) / (n - 1) as f64)
            }
        })
        .collect();

    let blocks = (0..n_rb)
        .map(|rb| {
            let mut rng = stream(seed, Purpose::ChannelBlock, rb as u64);
            let u = haar_columns(&mut rng, m, n);
            let v = haar_columns(&mut rng, n, n);
            let mut us = u;
            for j in 0..n {
                for i in 0..m {
                    us[(i, j)] *= spectrum[j];
                }
            }
            let h = us.matmul(&v.adjoint()).expect("shapes agree");
            normalize(h)
        })
        .collect();
    ChannelRealization::new(blocks)
}

/// Geometric multipath channel with a few dominant spatial clusters.
///
/// Cluster azimuths, intra-cluster path offsets and complex path gains are
/// drawn once per realization and shared by every resource block; each block
/// then re-draws only the path phases. All users see the same clusters, so
/// with zero angular spread the channel spans at most `n_clusters` spatial
/// directions.
pub fn clustered_channel(
    m: usize,
    n: usize,
    n_clusters: usize,
    angle_spread_deg: f64,
    n_rb: usize,
    seed: u64,
) -> Result<ChannelRealization, ChannelError> {
    if m == 0 || n == 0 || n_rb == 0 {
        return Err(ChannelError::InvalidParameters("dimensions must be positive".into()));
    }
    if n_clusters == 0 || n_clusters > m {
        return Err(ChannelError::InvalidParameters(format!(
            "cluster count must be in 1..={m}, got {n_clusters}"
        )));
    }
    if !(angle_spread_deg >= 0.0) || !angle_spread_deg.is_finite() {
        return Err(ChannelError::InvalidParameters(format!(
            "angle spread must be finite and non-negative, got {angle_spread_deg}"
        )));
    }

    let mut geo = stream(seed, Purpose::ChannelGeometry, 0);
    let mut paths: Vec<Vec<Complex64>> = Vec::with_capacity(n_clusters * SUBPATHS_PER_CLUSTER);
    for _ in 0..n_clusters {
        let center = geo.random_range(-MAX_CLUSTER_AZIMUTH_DEG..=MAX_CLUSTER_AZIMUTH_DEG);
        for _ in 0..SUBPATHS_PER_CLUSTER {
            let offset = if angle_spread_deg > 0.0 {
                geo.random_range(-0.5 * angle_spread_deg..=0.5 * angle_spread_deg)
            } else {
                0.0
            };
            paths.push(steering_vector(m, (center + offset).to_radians()));
        }
    }
    // gains[path][user]
    let gains: Vec<Vec<Complex64>> = (0..paths.len())
        .map(|_| (0..n).map(|_| complex_gaussian(&mut geo)).collect())
        .collect();

    let blocks = (0..n_rb)
        .map(|rb| {
            let mut rng = stream(seed, Purpose::ChannelBlock, rb as u64);
            let mut h = ComplexMatrix::zeros(m, n);
            for (path, gain) in paths.iter().zip(&gains) {
                for (j, g) in gain.iter().enumerate() {
                    let w = g * Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                    for (i, a) in path.iter().enumerate() {
                        h[(i, j)] += w * a;
                    }
                }
            }
            normalize(h)
        })
        .collect();
    ChannelRealization::new(blocks)
}

/// Scales `h` so that `||h||_F^2 = rows * cols`.
fn normalize(h: ComplexMatrix) -> ComplexMatrix {
    let target = (h.rows() * h.cols()) as f64;
    let energy = h.frobenius_norm_sqr();
    if energy == 0.0 {
        return h;
    }
    h.scale((target / energy).sqrt())
}

/// `rows x cols` matrix with Haar-distributed orthonormal columns, by
/// modified Gram-Schmidt on a complex Gaussian matrix (positive-diagonal R).
fn haar_columns<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    loop {
        let mut q: Vec<Vec<Complex64>> = (0..cols)
            .map(|_| (0..rows).map(|_| complex_gaussian(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..cols {
            for k in 0..j {
                let (done, rest) = q.split_at_mut(j);
                let proj: Complex64 = done[k].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= proj * y;
                }
            }
            let norm = q[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            q[j].iter_mut().for_each(|z| *z /= norm);
        }
        if ok {
            return ComplexMatrix::from_columns(&q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cond_frobenius, cond_spectral, svd};

    #[test]
    fn randsvd_unit_condition_gives_equal_singular_values() {
        let ch = randsvd_channel(8, 4, 1.0, 3, 11).unwrap();
        for h in ch.blocks() {
            let s = svd(h).unwrap().s;
            assert!(s.iter().all(|&v| (v - s[0]).abs() < 1e-12 * s[0]));
            assert!((cond_frobenius(h).unwrap() - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn randsvd_hits_target_condition() {
        let ch = randsvd_channel(64, 4, 100.0, 4, 5).unwrap();
        for h in ch.blocks() {
            let k = cond_spectral(h).unwrap();
            assert!((k - 100.0).abs() < 1e-9, "{k}");
            assert!((h.frobenius_norm_sqr() - 256.0).abs() < 1e-9);
        }
    }

    #[test]
    fn randsvd_is_deterministic() {
        assert_eq!(randsvd_channel(16, 4, 30.0, 2, 99).unwrap(), randsvd_channel(16, 4, 30.0, 2, 99).unwrap());
        assert_ne!(randsvd_channel(16, 4, 30.0, 2, 99).unwrap(), randsvd_channel(16, 4, 30.0, 2, 98).unwrap());
    }

    #[test]
    fn randsvd_rejects_wide() {
        assert!(randsvd_channel(2, 4, 10.0, 1, 0).is_err());
        assert!(randsvd_channel(4, 2, 0.5, 1, 0).is_err());
    }

    #[test]
    fn rb_draws_do_not_depend_on_block_count() {
        let short = randsvd_channel(8, 2, 10.0, 2, 3).unwrap();
        let long = randsvd_channel(8, 2, 10.0, 5, 3).unwrap();
        assert_eq!(short.rb(1), long.rb(1));
    }

    #[test]
    fn single_cluster_no_spread_is_one_direction() {
        let m = 16;
        let ch = clustered_channel(m, 3, 1, 0.0, 2, 4).unwrap();
        for h in ch.blocks() {
            // all columns are multiples of the first column
            let c0 = h.column(0);
            for j in 1..h.cols() {
                let cj = h.column(j);
                let ratio = cj[0] / c0[0];
                for i in 0..m {
                    assert!((cj[i] - ratio * c0[i]).norm() < 1e-10);
                }
            }
            // unit-modulus steering pattern: entries of equal magnitude
            let mag = c0[0].norm();
            assert!(c0.iter().all(|z| (z.norm() - mag).abs() < 1e-10));
        }
    }

    #[test]
    fn clustered_is_deterministic_and_normalized() {
        let a = clustered_channel(32, 2, 3, 5.0, 4, 8).unwrap();
        assert_eq!(a, clustered_channel(32, 2, 3, 5.0, 4, 8).unwrap());
        for h in a.blocks() {
            assert!((h.frobenius_norm_sqr() - 64.0).abs() < 1e-9);
        }
    }

    #[test]
    fn clustered_rejects_bad_cluster_count() {
        assert!(clustered_channel(4, 1, 0, 0.0, 1, 0).is_err());
        assert!(clustered_channel(4, 1, 5, 0.0, 1, 0).is_err());
    }
}
