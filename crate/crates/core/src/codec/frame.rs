//! Frame wire format (multi-byte integers little-endian):
//!
//! | bytes    | field                               |
//! |----------|-------------------------------------|
//! | 4        | magic `FHC1`                        |
//! | 1        | version `0x01`                      |
//! | 2        | `n_rb` (u16)                        |
//! | 2        | `n_beam` (u16)                      |
//! | 1        | `n12` (u8)                          |
//! | 1        | `b_exp` (u8)                        |
//! | `n_beam` | mantissa bits per beam (u8 each)    |
//! | 4        | saturation count (u32)              |
//! | ...      | payload, MSB-first, zero-padded     |

use super::{CodecError, CompressedFrame, MantissaProfile, MAX_EXPONENT_BITS};

pub const FRAME_MAGIC: &[u8; 4] = b"FHC1";
pub const FRAME_VERSION: u8 = 0x01;
const FIXED_HEADER: usize = 11;

impl CompressedFrame {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FIXED_HEADER + self.profile.n_beam() + 4 + self.payload.len());
        out.extend_from_slice(FRAME_MAGIC);
        out.push(FRAME_VERSION);
        out.extend_from_slice(&self.n_rb.to_le_bytes());
        out.extend_from_slice(&self.n_beam.to_le_bytes());
        out.push(self.n12);
        out.push(self.b_exp);
        out.extend_from_slice(self.profile.bits());
        out.extend_from_slice(&self.saturation_count.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let err = |offset: usize, reason: String| CodecError::Parse { offset, reason };
        if bytes.len() < 4 {
            return Err(err(bytes.len(), "truncated magic".into()));
        }
        if &bytes[..4] != FRAME_MAGIC {
            return Err(err(0, "bad magic, expected FHC1".into()));
        }
        if bytes.len() < FIXED_HEADER {
            return Err(err(bytes.len(), "truncated header".into()));
        }
        if bytes[4] != FRAME_VERSION {
            return Err(err(4, format!("unsupported version {:#04x}", bytes[4])));
        }
        let n_rb = u16::from_le_bytes([bytes[5], bytes[6]]);
        let n_beam = u16::from_le_bytes([bytes[7], bytes[8]]);
        let n12 = bytes[9];
        let b_exp = bytes[10];
        if n_rb == 0 {
            return Err(err(5, "zero resource blocks".into()));
        }
        if n_beam == 0 {
            return Err(err(7, "zero beams".into()));
        }
        if n12 == 0 {
            return Err(err(9, "zero block size".into()));
        }
        if !(1..=MAX_EXPONENT_BITS).contains(&b_exp) {
            return Err(err(10, format!("exponent width {b_exp} outside 1..={MAX_EXPONENT_BITS}")));
        }
        let profile_end = FIXED_HEADER + usize::from(n_beam);
        if bytes.len() < profile_end + 4 {
            return Err(err(bytes.len(), "truncated header".into()));
        }
        let profile = MantissaProfile::new(bytes[FIXED_HEADER..profile_end].to_vec())
            .map_err(|e| err(FIXED_HEADER, e.to_string()))?;
        let saturation_count = u32::from_le_bytes([
            bytes[profile_end],
            bytes[profile_end + 1],
            bytes[profile_end + 2],
            bytes[profile_end + 3],
        ]);
        let payload_start = profile_end + 4;
        let mut frame = Self {
            n_rb,
            n_beam,
            n12,
            b_exp,
            profile,
            saturation_count,
            payload: Vec::new(),
        };
        let payload_len = frame.payload_bits().div_ceil(8);
        let available = bytes.len() - payload_start;
        if available < payload_len {
            return Err(CodecError::Truncated {
                bit_offset: available * 8,
            });
        }
        if available > payload_len {
            return Err(err(payload_start + payload_len, "trailing bytes after payload".into()));
        }
        frame.payload = bytes[payload_start..].to_vec();
        Ok(frame)
    }
}
