//! Common-exponent block floating-point codec for beamspace grids.
//!
//! A block is the `n12` subcarriers of one resource block on one beam. Each
//! block stores one `b_exp`-bit biased power-of-two exponent followed by the
//! Lloyd-Max indices of its `2 n12` real components (I then Q per
//! subcarrier). Blocks are written beam by beam, resource blocks inner.
//!
//! Mantissas `x / 2^e` lie in `[-1, 1]`; they are divided by
//! `gamma = 1/sqrt(2 ln(4 n12))` before hitting the unit-Gaussian codebook,
//! since the block maximum that fixes `e` sits near `sqrt(2 ln(4 n12))`
//! standard deviations.
//!
//! The lowest exponent code is reserved for all-zero blocks, which decode
//! to exact zeros. Nonzero blocks use exponents `e_min + 1 ..= e_max`;
//! blocks above `e_max` are clamped and counted as saturated.

mod bits;
mod frame;
mod lloyd;
mod profile;

pub use bits::{BitReader, BitWriter};
pub use frame::{FRAME_MAGIC, FRAME_VERSION};
pub use lloyd::{codebook, gaussian_distortion, lloyd_max_codebook, QuantizerCodebook, MAX_CODEBOOK_BITS};
pub use profile::{compressed_bits, compression_ratio, MantissaProfile, MAX_MANTISSA_BITS, MIN_MANTISSA_BITS};

use num_complex::Complex64;
use thiserror::Error;

use crate::signal::ResourceGrid;

pub const MAX_EXPONENT_BITS: u8 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("invalid mantissa profile: {0}")]
    InvalidProfile(String),
    #[error("invalid codec parameters: {0}")]
    InvalidParameters(String),
    #[error("frame parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("payload truncated at bit {bit_offset}")]
    Truncated { bit_offset: usize },
    #[error("grids differ in shape")]
    ShapeMismatch,
    #[error("reference grid has zero energy")]
    ZeroReference,
}

/// Encoded grid plus its header fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedFrame {
    pub n_rb: u16,
    pub n_beam: u16,
    pub n12: u8,
    pub b_exp: u8,
    pub profile: MantissaProfile,
    /// Blocks whose exponent exceeded the representable range.
    pub saturation_count: u32,
    /// MSB-first payload, zero-padded to whole bytes.
    pub payload: Vec<u8>,
}

impl CompressedFrame {
    /// Exact payload size in bits, `b_exp N_beam N_rb + 2 N_sc sum B_i`.
    pub fn payload_bits(&self) -> usize {
        let bits: Vec<u32> = self.profile.bits().iter().map(|&b| u32::from(b)).collect();
        let n12 = usize::from(self.n12);
        compressed_bits(usize::from(self.n_rb) * n12, n12, u32::from(self.b_exp), &bits) as usize
    }

    pub fn n_sc(&self) -> usize {
        usize::from(self.n_rb) * usize::from(self.n12)
    }
}

/// Exponent range `(e_min, e_max)` of a `b_exp`-bit field with bias
/// `2^(b_exp-1)`.
pub fn exponent_range(b_exp: u8) -> (i32, i32) {
    let bias = 1i32 << (b_exp - 1);
    (-bias, bias - 1)
}

/// Smallest `e` with `max(|re|, |im|) <= 2^e` over the block, or `e_min`
/// for an all-zero block. Not clamped to the representable range.
pub fn block_exponent(values: &[Complex64], b_exp: u8) -> i32 {
    let peak = values.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if peak == 0.0 {
        return exponent_range(b_exp).0;
    }
    let mut e = peak.log2().ceil() as i32;
    while pow2(e) < peak {
        e += 1;
    }
    while pow2(e - 1) >= peak {
        e -= 1;
    }
    e
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Codebook rescaling `gamma = 1/sqrt(2 ln(4 n12))`.
pub fn mantissa_scale(n12: usize) -> f64 {
    1.0 / (2.0 * (4.0 * n12 as f64).ln()).sqrt()
}

fn check_params(n_sc: usize, n_streams: usize, profile: &MantissaProfile, b_exp: u8, n12: usize) -> Result<(), CodecError> {
    if !(1..=MAX_EXPONENT_BITS).contains(&b_exp) {
        return Err(CodecError::InvalidParameters(format!(
            "exponent width {b_exp} outside 1..={MAX_EXPONENT_BITS}"
        )));
    }
    if n12 == 0 || n12 > usize::from(u8::MAX) {
        return Err(CodecError::InvalidParameters(format!("block size {n12} outside 1..=255")));
    }
    if n_sc % n12 != 0 {
        return Err(CodecError::InvalidParameters(format!(
            "{n_sc} subcarriers do not split into blocks of {n12}"
        )));
    }
    if n_sc / n12 > usize::from(u16::MAX) || n_streams > usize::from(u16::MAX) {
        return Err(CodecError::InvalidParameters("grid too large for the frame header".into()));
    }
    if profile.n_beam() != n_streams {
        return Err(CodecError::InvalidProfile(format!(
            "profile covers {} beams, grid has {n_streams}",
            profile.n_beam()
        )));
    }
    Ok(())
}

/// Compresses a beamspace grid (`n_sc x n_beam`).
pub fn encode(grid: &ResourceGrid, profile: &MantissaProfile, b_exp: u8, n12: usize) -> Result<CompressedFrame, CodecError> {
    check_params(grid.n_sc(), grid.n_streams(), profile, b_exp, n12)?;
    let n_rb = grid.n_sc() / n12;
    let (e_min, e_max) = exponent_range(b_exp);
    let bias = -e_min;
    let gamma = mantissa_scale(n12);

    let frame_bits = {
        let bits: Vec<u32> = profile.bits().iter().map(|&b| u32::from(b)).collect();
        compressed_bits(grid.n_sc(), n12, u32::from(b_exp), &bits) as usize
    };
    let mut writer = BitWriter::with_capacity(frame_bits);
    let mut saturation_count = 0u32;
    let mut block = Vec::with_capacity(n12);

    for (beam, &b) in profile.bits().iter().enumerate() {
        let cb = codebook(u32::from(b));
        let width = u32::from(b);
        for rb in 0..n_rb {
            block.clear();
            block.extend((rb * n12..(rb + 1) * n12).map(|sc| grid.get(sc, beam)));
            let raw = block_exponent(&block, b_exp);
            let all_zero = block.iter().all(|z| z.re == 0.0 && z.im == 0.0);
            if all_zero {
                writer.write(0, u32::from(b_exp));
                let idx = cb.quantize(0.0) as u32;
                for _ in 0..2 * n12 {
                    writer.write(idx, width);
                }
                continue;
            }
            if raw > e_max {
                saturation_count += 1;
            }
            let e = raw.clamp(e_min + 1, e_max);
            writer.write((e + bias) as u32, u32::from(b_exp));
            let inv = 1.0 / (pow2(e) * gamma);
            for z in &block {
                writer.write(cb.quantize(z.re * inv) as u32, width);
                writer.write(cb.quantize(z.im * inv) as u32, width);
            }
        }
    }
    assert_eq!(writer.bit_len(), frame_bits, "payload length must equal the frame formula");

    Ok(CompressedFrame {
        n_rb: n_rb as u16,
        n_beam: grid.n_streams() as u16,
        n12: n12 as u8,
        b_exp,
        profile: profile.clone(),
        saturation_count,
        payload: writer.finish(),
    })
}

/// Reconstructs the grid: `level * gamma * 2^e` per component.
pub fn decode(frame: &CompressedFrame) -> Result<ResourceGrid, CodecError> {
    let n12 = usize::from(frame.n12);
    let n_rb = usize::from(frame.n_rb);
    let n_beam = usize::from(frame.n_beam);
    check_params(n_rb * n12, n_beam, &frame.profile, frame.b_exp, n12)?;
    let needed = frame.payload_bits();
    if frame.payload.len() * 8 < needed {
        return Err(CodecError::Truncated {
            bit_offset: frame.payload.len() * 8,
        });
    }
    let (e_min, _) = exponent_range(frame.b_exp);
    let gamma = mantissa_scale(n12);
    let mut reader = BitReader::new(&frame.payload);
    let mut grid = ResourceGrid::zeros(n_rb * n12, n_beam);
    let truncated = |bit_offset| CodecError::Truncated { bit_offset };

    for (beam, &b) in frame.profile.bits().iter().enumerate() {
        let cb = codebook(u32::from(b));
        let width = u32::from(b);
        for rb in 0..n_rb {
            let code = reader.read(u32::from(frame.b_exp)).map_err(truncated)?;
            let zero_block = code == 0;
            let scale = pow2(code as i32 + e_min) * gamma;
            for sc in rb * n12..(rb + 1) * n12 {
                let i = reader.read(width).map_err(truncated)? as usize;
                let q = reader.read(width).map_err(truncated)? as usize;
                let value = if zero_block {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(cb.levels[i] * scale, cb.levels[q] * scale)
                };
                grid.set(sc, beam, value);
            }
        }
    }
    Ok(grid)
}

/// `||decoded - original||_F / ||original||_F` over the whole grid.
pub fn measured_delta_y(original: &ResourceGrid, decoded: &ResourceGrid) -> Result<f64, CodecError> {
    if !original.same_shape(decoded) {
        return Err(CodecError::ShapeMismatch);
    }
    let reference = original.energy();
    if reference == 0.0 {
        return Err(CodecError::ZeroReference);
    }
    let err: f64 = original
        .as_slice()
        .iter()
        .zip(decoded.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((err / reference).sqrt())
}

/// Compression error measured against block full scale instead of the
/// signal itself: every complex sample is compared with a sample whose
/// components both equal the largest component of its block,
/// `sqrt(sum |dy|^2 / sum_blocks 2 n12 peak^2)`.
///
/// This is the per-mantissa precision; the ordinary relative error
/// [`measured_delta_y`] is larger by the block's peak-to-RMS ratio.
pub fn block_scaled_delta_y(original: &ResourceGrid, decoded: &ResourceGrid, n12: usize) -> Result<f64, CodecError> {
    if !original.same_shape(decoded) {
        return Err(CodecError::ShapeMismatch);
    }
    if n12 == 0 || original.n_sc() % n12 != 0 {
        return Err(CodecError::InvalidParameters(format!("block size {n12} does not divide the grid")));
    }
    let mut full_scale = 0.0;
    for beam in 0..original.n_streams() {
        for rb in 0..original.n_sc() / n12 {
            let peak = (rb * n12..(rb + 1) * n12)
                .map(|sc| {
                    let z = original.get(sc, beam);
                    z.re.abs().max(z.im.abs())
                })
                .fold(0.0, f64::max);
            full_scale += 2.0 * n12 as f64 * peak * peak;
        }
    }
    if full_scale == 0.0 {
        return Err(CodecError::ZeroReference);
    }
    let err: f64 = original
        .as_slice()
        .iter()
        .zip(decoded.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((err / full_scale).sqrt())
}
