//! Binary resource-grid files used by the command-line codec:
//! magic `FHGR`, version `0x01`, u32 `n_sc`, u32 `n_streams` (little-endian),
//! then `n_sc * n_streams` pairs of f64 (re, im), subcarrier-major.

use num_complex::Complex64;

use super::HarnessError;
use crate::signal::ResourceGrid;

pub const GRID_MAGIC: &[u8; 4] = b"FHGR";
pub const GRID_VERSION: u8 = 0x01;
const HEADER: usize = 13;

pub fn write_grid(grid: &ResourceGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + 16 * grid.as_slice().len());
    out.extend_from_slice(GRID_MAGIC);
    out.push(GRID_VERSION);
    out.extend_from_slice(&(grid.n_sc() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n_streams() as u32).to_le_bytes());
    for z in grid.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn read_grid(bytes: &[u8]) -> Result<ResourceGrid, HarnessError> {
    let err = |offset: usize, reason: &str| HarnessError::Parse {
        offset,
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER {
        return Err(err(bytes.len(), "truncated grid header"));
    }
    if &bytes[..4] != GRID_MAGIC {
        return Err(err(0, "bad magic, expected FHGR"));
    }
    if bytes[4] != GRID_VERSION {
        return Err(err(4, "unsupported grid version"));
    }
    let n_sc = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let n_streams = u32::from_le_bytes(bytes[9..13].try_into().expect("4 bytes")) as usize;
    if n_sc == 0 {
        return Err(err(5, "zero subcarriers"));
    }
    if n_streams == 0 {
        return Err(err(9, "zero streams"));
    }
    let expected = n_sc
        .checked_mul(n_streams)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(HEADER))
        .ok_or_else(|| err(5, "grid dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(err(bytes.len(), "truncated grid samples"));
    }
    if bytes.len() > expected {
        return Err(err(expected, "trailing bytes after grid"));
    }
    let mut data = Vec::with_capacity(n_sc * n_streams);
    for (k, chunk) in bytes[HEADER..].chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
        if !re.is_finite() || !im.is_finite() {
            return Err(err(HEADER + 16 * k, "non-finite sample"));
        }
        data.push(Complex64::new(re, im));
    }
    Ok(ResourceGrid::new(n_sc, n_streams, data).expect("validated dimensions"))
}
