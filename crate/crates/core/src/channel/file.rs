//! Channel file layout (all integers little-endian):
//!
//! | bytes | field                                   |
//! |-------|-----------------------------------------|
//! | 4     | magic `FHCH`                            |
//! | 1     | version `0x01`                          |
//! | 2     | `n_rb` (u16)                            |
//! | 2     | `m` antennas (u16)                      |
//! | 2     | `n` layers (u16)                        |
//! | ...   | per RB, row-major `(re, im)` f64 pairs  |

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{ChannelError, ChannelRealization};
use crate::linalg::ComplexMatrix;

pub const CHANNEL_MAGIC: &[u8; 4] = b"FHCH";
pub const CHANNEL_VERSION: u8 = 0x01;
const HEADER_LEN: usize = 11;

pub fn write_channel(ch: &ChannelRealization) -> Result<Vec<u8>, ChannelError> {
    let dims = [ch.n_rb(), ch.m_antennas(), ch.n_layers()];
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * dims.iter().product::<usize>());
    out.extend_from_slice(CHANNEL_MAGIC);
    out.push(CHANNEL_VERSION);
    for d in dims {
        let d = u16::try_from(d)
            .map_err(|_| ChannelError::InvalidParameters(format!("dimension {d} does not fit in 16 bits")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for h in ch.blocks() {
        for z in h.as_slice() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_channel(bytes: &[u8]) -> Result<ChannelRealization, ChannelError> {
    let err = |offset: usize, reason: &str| ChannelError::Parse {
        offset,
        reason: reason.to_string(),
    };
    if bytes.len() < 4 {
        return Err(err(bytes.len(), "truncated magic"));
    }
    if &bytes[..4] != CHANNEL_MAGIC {
        return Err(err(0, "bad magic, expected FHCH"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(err(bytes.len(), "truncated header"));
    }
    if bytes[4] != CHANNEL_VERSION {
        return Err(err(4, &format!("unsupported version {:#04x}", bytes[4])));
    }
    let u16_at = |pos: usize| u16::from_le_bytes([bytes[pos], bytes[pos + 1]]) as usize;
    let (n_rb, m, n) = (u16_at(5), u16_at(7), u16_at(9));
    for (pos, d) in [(5, n_rb), (7, m), (9, n)] {
        if d == 0 {
            return Err(err(pos, "zero dimension"));
        }
    }
    let entries = n_rb
        .checked_mul(m)
        .and_then(|x| x.checked_mul(n))
        .ok_or_else(|| err(5, "dimension overflow"))?;
    let expected = entries
        .checked_mul(16)
        .and_then(|x| x.checked_add(HEADER_LEN))
        .ok_or_else(|| err(5, "dimension overflow"))?;
    if bytes.len() < expected {
        return Err(err(bytes.len(), &format!("truncated payload, expected {expected} bytes")));
    }
    if bytes.len() > expected {
        return Err(err(expected, "trailing bytes after payload"));
    }

    let f64_at = |pos: usize| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&bytes[pos..pos + 8]);
        f64::from_le_bytes(b)
    };
    let mut pos = HEADER_LEN;
    let mut blocks = Vec::with_capacity(n_rb);
    for _ in 0..n_rb {
        let start = pos;
        let mut data = Vec::with_capacity(m * n);
        for _ in 0..m * n {
            data.push(Complex64::new(f64_at(pos), f64_at(pos + 8)));
            pos += 16;
        }
        blocks.push(ComplexMatrix::new(m, n, data).map_err(|e| err(start, &e.to_string()))?);
    }
    ChannelRealization::new(blocks)
}

pub fn save_channel(ch: &ChannelRealization, path: impl AsRef<Path>) -> Result<(), ChannelError> {
    fs::write(path, write_channel(ch)?)?;
    Ok(())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<ChannelRealization, ChannelError> {
    read_channel(&fs::read(path)?)
}
