//! Frequency-domain resource grids, QAM mapping, the uplink propagation
//! model and EVM.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::rng::{complex_gaussian, stream, Purpose};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bit count {bits} is not a multiple of {per_symbol}")]
    BitCount { bits: usize, per_symbol: usize },
    #[error("unsupported modulation order {0}")]
    UnsupportedOrder(u32),
    #[error("reference grid has zero energy")]
    ZeroReference,
    #[error("grid contains NaN or infinite entries")]
    NonFinite,
}

/// `n_sc x n_streams` complex samples, stored subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    n_sc: usize,
    n_streams: usize,
    data: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn new(n_sc: usize, n_streams: usize, data: Vec<Complex64>) -> Result<Self, SignalError> {
        if n_sc == 0 || n_streams == 0 || data.len() != n_sc * n_streams {
            return Err(SignalError::DimensionMismatch(format!(
                "{} samples for a {n_sc} x {n_streams} grid",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SignalError::NonFinite);
        }
        Ok(Self { n_sc, n_streams, data })
    }

    pub fn zeros(n_sc: usize, n_streams: usize) -> Self {
        Self {
            n_sc,
            n_streams,
            data: vec![Complex64::new(0.0, 0.0); n_sc * n_streams],
        }
    }

    pub fn n_sc(&self) -> usize {
        self.n_sc
    }

    pub fn n_streams(&self) -> usize {
        self.n_streams
    }

    pub fn get(&self, sc: usize, stream: usize) -> Complex64 {
        self.data[sc * self.n_streams + stream]
    }

    pub fn set(&mut self, sc: usize, stream: usize, value: Complex64) {
        self.data[sc * self.n_streams + stream] = value;
    }

    /// All streams of one subcarrier.
    pub fn subcarrier(&self, sc: usize) -> &[Complex64] {
        &self.data[sc * self.n_streams..(sc + 1) * self.n_streams]
    }

    pub fn subcarrier_mut(&mut self, sc: usize) -> &mut [Complex64] {
        &mut self.data[sc * self.n_streams..(sc + 1) * self.n_streams]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn rms(&self) -> f64 {
        (self.energy() / self.data.len() as f64).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            n_sc: self.n_sc,
            n_streams: self.n_streams,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_sc == other.n_sc && self.n_streams == other.n_streams
    }
}

/// Square Gray-coded QAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub fn from_order(order: u32) -> Result<Self, SignalError> {
        match order {
            4 => Ok(Self::Qpsk),
            16 => Ok(Self::Qam16),
            64 => Ok(Self::Qam64),
            256 => Ok(Self::Qam256),
            other => Err(SignalError::UnsupportedOrder(other)),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Self::Qpsk => 4,
            Self::Qam16 => 16,
            Self::Qam64 => 64,
            Self::Qam256 => 256,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        self.order().trailing_zeros() as usize
    }

    /// `1/sqrt(2(order-1)/3)`, giving unit average symbol energy.
    pub fn scale(self) -> f64 {
        1.0 / (2.0 * (self.order() as f64 - 1.0) / 3.0).sqrt()
    }

    fn axis_bits(self) -> usize {
        self.bits_per_symbol() / 2
    }
}

impl TryFrom<u32> for Modulation {
    type Error = SignalError;

    fn try_from(order: u32) -> Result<Self, SignalError> {
        Self::from_order(order)
    }
}

impl From<Modulation> for u32 {
    fn from(m: Modulation) -> u32 {
        m.order()
    }
}

/// Unscaled odd amplitude for one axis; the first bit is the sign and each
/// following bit folds the magnitude, which makes neighbours differ in one bit.
fn axis_amplitude(bits: impl Iterator<Item = u8>, axis_bits: usize) -> f64 {
    let bits: Vec<f64> = bits.map(|b| 1.0 - 2.0 * f64::from(b & 1)).collect();
    let mut mag = 1.0;
    for k in (1..axis_bits).rev() {
        mag = (1u32 << (axis_bits - k)) as f64 - bits[k] * mag;
    }
    bits[0] * mag
}

/// Maps bits (one per byte, 0 or 1) to unit-energy symbols. Even bit
/// positions of a symbol drive the in-phase axis, odd positions quadrature.
pub fn qam_modulate(bits: &[u8], modulation: Modulation) -> Result<Vec<Complex64>, SignalError> {
    let per_symbol = modulation.bits_per_symbol();
    if bits.len() % per_symbol != 0 {
        return Err(SignalError::BitCount {
            bits: bits.len(),
            per_symbol,
        });
    }
    let scale = modulation.scale();
    let axis = modulation.axis_bits();
    Ok(bits
        .chunks(per_symbol)
        .map(|sym| {
            let i = axis_amplitude(sym.iter().step_by(2).copied(), axis);
            let q = axis_amplitude(sym.iter().skip(1).step_by(2).copied(), axis);
            Complex64::new(i, q) * scale
        })
        .collect())
}

/// Hard-decision inverse of [`qam_modulate`].
pub fn qam_demodulate(symbols: &[Complex64], modulation: Modulation) -> Vec<u8> {
    let axis = modulation.axis_bits();
    let levels = 1usize << axis;
    // amplitude index (0 = most negative) -> axis bit pattern
    let mut table = vec![Vec::new(); levels];
    for pattern in 0..levels {
        let bits: Vec<u8> = (0..axis).map(|k| ((pattern >> (axis - 1 - k)) & 1) as u8).collect();
        let amp = axis_amplitude(bits.iter().copied(), axis);
        table[((amp + (levels as f64 - 1.0)) / 2.0).round() as usize] = bits;
    }
    let slice = |v: f64| -> &Vec<u8> {
        let idx = ((v / modulation.scale() + (levels as f64 - 1.0)) / 2.0).round();
        &table[idx.clamp(0.0, (levels - 1) as f64) as usize]
    };
    let mut out = Vec::with_capacity(symbols.len() * modulation.bits_per_symbol());
    for s in symbols {
        let (bi, bq) = (slice(s.re), slice(s.im));
        for k in 0..axis {
            out.push(bi[k]);
            out.push(bq[k]);
        }
    }
    out
}

/// Uniformly random QAM symbols for every (subcarrier, stream).
pub fn random_symbols(n_sc: usize, n_streams: usize, modulation: Modulation, seed: u64) -> ResourceGrid {
    let mut rng = stream(seed, Purpose::Symbols, 0);
    let bits: Vec<u8> = (0..n_sc * n_streams * modulation.bits_per_symbol())
        .map(|_| rng.random_range(0..=1u8))
        .collect();
    let symbols = qam_modulate(&bits, modulation).expect("bit count is a whole number of symbols");
    ResourceGrid::new(n_sc, n_streams, symbols).expect("shape matches")
}

/// Result of passing a transmit grid through the channel.
#[derive(Debug, Clone)]
pub struct Received {
    /// Antenna-domain samples, `n_sc x m_antennas`.
    pub grid: ResourceGrid,
    /// Per-antenna noise variance actually applied (0 when noise-free).
    pub sigma2: f64,
}

/// `Y = H_rb X + E` per subcarrier, with `E` white complex Gaussian.
///
/// The noise variance is set from the average received signal power per
/// antenna, `sigma2 = P_rx / 10^(snr_db/10)`. An infinite `snr_db` disables
/// noise. Noise for subcarrier `k` comes from its own stream of `seed`.
pub fn transmit(
    x: &ResourceGrid,
    ch: &ChannelRealization,
    n12: usize,
    snr_db: f64,
    seed: u64,
) -> Result<Received, SignalError> {
    if x.n_streams() != ch.n_layers() {
        return Err(SignalError::DimensionMismatch(format!(
            "{} transmit streams for {} channel layers",
            x.n_streams(),
            ch.n_layers()
        )));
    }
    if n12 == 0 || x.n_sc() != ch.n_rb() * n12 {
        return Err(SignalError::DimensionMismatch(format!(
            "{} subcarriers for {} resource blocks of {n12}",
            x.n_sc(),
            ch.n_rb()
        )));
    }
    if snr_db.is_nan() {
        return Err(SignalError::NonFinite);
    }
    let m = ch.m_antennas();
    let mut y = ResourceGrid::zeros(x.n_sc(), m);
    for sc in 0..x.n_sc() {
        let hy = ch.rb(sc / n12).mul_vec(x.subcarrier(sc)).expect("dimensions checked");
        y.subcarrier_mut(sc).copy_from_slice(&hy);
    }
    if snr_db == f64::INFINITY {
        return Ok(Received { grid: y, sigma2: 0.0 });
    }
    let signal_power = y.energy() / (x.n_sc() * m) as f64;
    let sigma2 = signal_power / 10f64.powf(snr_db / 10.0);
    let sigma = sigma2.sqrt();
    for sc in 0..x.n_sc() {
        let mut rng = stream(seed, Purpose::Noise, sc as u64);
        for v in y.subcarrier_mut(sc) {
            *v += complex_gaussian(&mut rng) * sigma;
        }
    }
    Ok(Received { grid: y, sigma2 })
}

/// Aggregate error vector magnitude in percent:
/// `100 sqrt(sum |x_hat - x|^2 / sum |x|^2)`.
pub fn evm_percent(x_hat: &ResourceGrid, x_ref: &ResourceGrid) -> Result<f64, SignalError> {
    if !x_hat.same_shape(x_ref) {
        return Err(SignalError::DimensionMismatch("EVM grids differ in shape".into()));
    }
    let reference = x_ref.energy();
    if reference == 0.0 {
        return Err(SignalError::ZeroReference);
    }
    let err: f64 = x_hat
        .as_slice()
        .iter()
        .zip(x_ref.as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(100.0 * (err / reference).sqrt())
}
