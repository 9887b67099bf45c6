use std::fmt;

use super::CodecError;

pub const MIN_MANTISSA_BITS: u8 = 1;
pub const MAX_MANTISSA_BITS: u8 = 10;

/// Mantissa bitwidth per beam, beams ordered strongest first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MantissaProfile(Vec<u8>);

impl MantissaProfile {
    pub fn new(bits: Vec<u8>) -> Result<Self, CodecError> {
        if bits.is_empty() {
            return Err(CodecError::InvalidProfile("profile needs at least one beam".into()));
        }
        if let Some((i, b)) = bits
            .iter()
            .enumerate()
            .find(|(_, b)| !(MIN_MANTISSA_BITS..=MAX_MANTISSA_BITS).contains(*b))
        {
            return Err(CodecError::InvalidProfile(format!(
                "beam {i} has {b} bits, allowed {MIN_MANTISSA_BITS}..={MAX_MANTISSA_BITS}"
            )));
        }
        Ok(Self(bits))
    }

    pub fn uniform(n_beam: usize, bits: u8) -> Result<Self, CodecError> {
        Self::new(vec![bits; n_beam])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn n_beam(&self) -> usize {
        self.0.len()
    }

    pub fn total_bits(&self) -> u32 {
        self.0.iter().map(|&b| u32::from(b)).sum()
    }

    pub fn mean_bits(&self) -> f64 {
        self.total_bits() as f64 / self.0.len() as f64
    }

    /// True when no beam has more bits than the beam before it.
    pub fn is_monotone(&self) -> bool {
        self.0.windows(2).all(|w| w[1] <= w[0])
    }

    /// Caps every beam at its predecessor's width: `B[i+1] <- min(B[i+1], B[i])`.
    pub fn project_monotone(&self) -> Self {
        let mut out = self.0.clone();
        for i in 1..out.len() {
            out[i] = out[i].min(out[i - 1]);
        }
        Self(out)
    }

    /// `beam_index,bits` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("beam_index,bits\n");
        for (i, b) in self.0.iter().enumerate() {
            s.push_str(&format!("{i},{b}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, CodecError> {
        let mut bits = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let idx: usize = parts
                .next()
                .and_then(|p| p.trim().parse().ok())
                .ok_or_else(|| CodecError::InvalidProfile(format!("line {}: bad beam index", line_no + 1)))?;
            let b: u8 = parts
                .next()
                .and_then(|p| p.trim().parse().ok())
                .ok_or_else(|| CodecError::InvalidProfile(format!("line {}: bad bit count", line_no + 1)))?;
            if idx != bits.len() {
                return Err(CodecError::InvalidProfile(format!(
                    "line {}: beam index {idx} out of order",
                    line_no + 1
                )));
            }
            bits.push(b);
        }
        Self::new(bits)
    }
}

impl fmt::Display for MantissaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Fixed-point antenna-domain bits over compressed beamspace bits:
///
/// `CR = 2 N_sc B_fp N_rx / (B_exp N_beam N_rb + 2 N_sc sum B_i)`
///
/// where `N_rb = n_sc / n12` and `N_beam = bits.len()`.
pub fn compression_ratio(n_sc: usize, n12: usize, b_fp: u32, n_rx: usize, b_exp: u32, bits: &[u32]) -> f64 {
    let numerator = 2 * n_sc as u64 * u64::from(b_fp) * n_rx as u64;
    numerator as f64 / compressed_bits(n_sc, n12, b_exp, bits) as f64
}

/// `B_exp N_beam N_rb + 2 N_sc sum B_i`, the payload size of one frame.
pub fn compressed_bits(n_sc: usize, n12: usize, b_exp: u32, bits: &[u32]) -> u64 {
    let n_rb = (n_sc / n12) as u64;
    let mantissa: u64 = bits.iter().map(|&b| u64::from(b)).sum();
    u64::from(b_exp) * bits.len() as u64 * n_rb + 2 * n_sc as u64 * mantissa
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(MantissaProfile::new(vec![0]).is_err());
        assert!(MantissaProfile::new(vec![11]).is_err());
        assert!(MantissaProfile::new(vec![]).is_err());
        assert!(MantissaProfile::new(vec![1, 10]).is_ok());
    }

    #[test]
    fn projection() {
        let p = MantissaProfile::new(vec![5, 7, 3, 4, 4]).unwrap();
        assert!(!p.is_monotone());
        let q = p.project_monotone();
        assert_eq!(q.bits(), &[5, 5, 3, 3, 3]);
        assert!(q.is_monotone());
    }

    #[test]
    fn csv_round_trip() {
        let p = MantissaProfile::new(vec![6, 5, 2, 1]).unwrap();
        assert_eq!(MantissaProfile::from_csv(&p.to_csv()).unwrap(), p);
        assert!(MantissaProfile::from_csv("beam_index,bits\n1,4\n").is_err());
    }

    #[test]
    fn table_fixed_length_ratios() {
        let cr16 = compression_ratio(192, 12, 16, 64, 4, &[6; 16]);
        let cr32 = compression_ratio(192, 12, 16, 64, 4, &[6; 32]);
        assert!((cr16 - 393216.0 / 37888.0).abs() < 1e-12);
        assert!((cr16 - 10.378).abs() < 5e-4);
        assert!((cr32 - 5.189).abs() < 5e-4);
    }

    #[test]
    fn no_compression_limit() {
        let cr = compression_ratio(192, 12, 16, 64, 0, &[16; 64]);
        assert!((cr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn payload_bits_small_case() {
        assert_eq!(compressed_bits(24, 12, 4, &[3, 2]), 256);
    }
}
