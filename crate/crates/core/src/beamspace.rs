//! Beam bases and the antenna-to-beamspace transform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::linalg::{complete_basis, svd, ComplexMatrix, LinalgError};
use crate::signal::{ResourceGrid, SignalError};

#[derive(Debug, Error)]
pub enum BeamspaceError {
    #[error("requested {n_beam} beams from {m} antennas")]
    TooManyBeams { n_beam: usize, m: usize },
    #[error("beam count must be positive")]
    NoBeams,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Candidate beam family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamspaceKind {
    /// Identity basis: beams are the antennas themselves.
    Antenna,
    Dft,
    Svd,
}

impl fmt::Display for BeamspaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Antenna => "antenna",
            Self::Dft => "dft",
            Self::Svd => "svd",
        })
    }
}

impl FromStr for BeamspaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "antenna" => Ok(Self::Antenna),
            "dft" => Ok(Self::Dft),
            "svd" => Ok(Self::Svd),
            other => Err(format!("unknown beamspace kind `{other}` (antenna|dft|svd)")),
        }
    }
}

/// Selected beams, strongest first.
#[derive(Debug, Clone)]
pub struct BeamspaceBasis {
    pub kind: BeamspaceKind,
    /// `m x n_beam`, orthonormal columns.
    pub matrix: ComplexMatrix,
    /// Received power per selected beam, descending.
    pub power_per_beam: Vec<f64>,
    /// Column of the full candidate basis each selected beam came from.
    pub source_index: Vec<usize>,
}

impl BeamspaceBasis {
    pub fn n_beam(&self) -> usize {
        self.matrix.cols()
    }

    /// `basis^H H_rb` for every resource block.
    pub fn effective_channel(&self, ch: &ChannelRealization) -> Result<ChannelRealization, BeamspaceError> {
        if ch.m_antennas() != self.matrix.rows() {
            return Err(BeamspaceError::DimensionMismatch(format!(
                "basis has {} rows, channel has {} antennas",
                self.matrix.rows(),
                ch.m_antennas()
            )));
        }
        let blocks = ch
            .blocks()
            .iter()
            .map(|h| self.matrix.adjoint_matmul(h))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChannelRealization::new(blocks).expect("uniform shapes"))
    }
}

/// Unitary DFT matrix, entry `(j, k) = exp(-2 pi i j k / m) / sqrt(m)`.
pub fn dft_basis(m: usize) -> ComplexMatrix {
    let norm = 1.0 / (m as f64).sqrt();
    ComplexMatrix::from_fn(m, m, |j, k| {
        // reduce j*k mod m first to keep the angle small
        let jk = (j * k) % m;
        Complex64::from_polar(norm, -2.0 * PI * jk as f64 / m as f64)
    })
}

/// Left singular vectors of the wideband stacked channel, completed to a
/// full `m x m` unitary matrix, strongest singular value first.
pub fn svd_beams(ch: &ChannelRealization) -> Result<ComplexMatrix, BeamspaceError> {
    let dec = svd(&ch.wideband_stack())?;
    Ok(complete_basis(&dec.u))
}

/// Full `m x m` candidate basis of the given family.
pub fn candidate_basis(kind: BeamspaceKind, ch: &ChannelRealization) -> Result<ComplexMatrix, BeamspaceError> {
    Ok(match kind {
        BeamspaceKind::Antenna => ComplexMatrix::identity(ch.m_antennas()),
        BeamspaceKind::Dft => dft_basis(ch.m_antennas()),
        BeamspaceKind::Svd => svd_beams(ch)?,
    })
}

/// Power of each candidate column measured on the received grid:
/// `sum_k |c^H y_k|^2`.
pub fn beam_powers(candidates: &ComplexMatrix, y: &ResourceGrid) -> Result<Vec<f64>, BeamspaceError> {
    if y.n_streams() != candidates.rows() {
        return Err(BeamspaceError::DimensionMismatch(format!(
            "grid has {} streams, basis has {} rows",
            y.n_streams(),
            candidates.rows()
        )));
    }
    let adj = candidates.adjoint();
    let mut power = vec![0.0; candidates.cols()];
    for sc in 0..y.n_sc() {
        let proj = adj.mul_vec(y.subcarrier(sc))?;
        for (p, z) in power.iter_mut().zip(proj) {
            *p += z.norm_sqr();
        }
    }
    Ok(power)
}

/// Builds the candidate basis, ranks its columns by power received in `y`
/// (ties go to the lower column index) and keeps the strongest `n_beam`.
pub fn build_basis(
    kind: BeamspaceKind,
    ch: &ChannelRealization,
    y: &ResourceGrid,
    n_beam: usize,
) -> Result<BeamspaceBasis, BeamspaceError> {
    let m = ch.m_antennas();
    if n_beam == 0 {
        return Err(BeamspaceError::NoBeams);
    }
    if n_beam > m {
        return Err(BeamspaceError::TooManyBeams { n_beam, m });
    }
    let candidates = candidate_basis(kind, ch)?;
    let power = beam_powers(&candidates, y)?;
    let order = rank_descending(&power);
    let keep = &order[..n_beam];
    Ok(BeamspaceBasis {
        kind,
        matrix: candidates.select_columns(keep),
        power_per_beam: keep.iter().map(|&j| power[j]).collect(),
        source_index: keep.to_vec(),
    })
}

/// Column indices sorted by descending value, stable on ties.
pub fn rank_descending(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Per-subcarrier `y_b = basis^H y`.
pub fn to_beamspace(y: &ResourceGrid, basis: &BeamspaceBasis) -> Result<ResourceGrid, BeamspaceError> {
    if y.n_streams() != basis.matrix.rows() {
        return Err(BeamspaceError::DimensionMismatch(format!(
            "grid has {} streams, basis has {} rows",
            y.n_streams(),
            basis.matrix.rows()
        )));
    }
    let adj = basis.matrix.adjoint();
    let mut out = Vec::with_capacity(y.n_sc() * basis.n_beam());
    for sc in 0..y.n_sc() {
        out.extend(adj.mul_vec(y.subcarrier(sc))?);
    }
    Ok(ResourceGrid::new(y.n_sc(), basis.n_beam(), out)?)
}

/// Fraction of channel energy `sum_rb ||C^H H_rb||_F^2 / sum_rb ||H_rb||_F^2`
/// captured by the `k` candidate columns that individually capture the most.
pub fn channel_energy_capture(
    candidates: &ComplexMatrix,
    ch: &ChannelRealization,
    k: usize,
) -> Result<f64, BeamspaceError> {
    let total: f64 = ch.blocks().iter().map(|h| h.frobenius_norm_sqr()).sum();
    if total == 0.0 {
        return Err(BeamspaceError::Linalg(LinalgError::ZeroMatrix));
    }
    let mut per_beam = vec![0.0; candidates.cols()];
    for h in ch.blocks() {
        let proj = candidates.adjoint_matmul(h)?;
        for (j, e) in per_beam.iter_mut().enumerate() {
            *e += proj.row(j).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    let order = rank_descending(&per_beam);
    Ok(order.iter().take(k).map(|&j| per_beam[j]).sum::<f64>() / total)
}
