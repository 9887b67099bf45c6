//! One simulated uplink snapshot and its replay under different profiles.

use serde::{Deserialize, Serialize};

use super::config::{ChannelModel, ScenarioConfig};
use super::HarnessError;
use crate::beamspace::{build_basis, to_beamspace, BeamspaceKind};
use crate::channel::{clustered_channel, randsvd_channel, ChannelRealization};
use crate::codec::{block_scaled_delta_y, decode, encode, measured_delta_y, MantissaProfile};
use crate::linalg::{cond_frobenius, mmse_weights, ComplexMatrix};
use crate::optimizer::{OptimizerError, ProfileEvaluator};
use crate::predictor::{predict_error, predict_error_common_exp};
use crate::rng::{child_seed, Purpose};
use crate::signal::{evm_percent, random_symbols, transmit, ResourceGrid};

/// Seeds of one scenario, all derived from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSeeds {
    pub channel: u64,
    pub symbols: u64,
    pub noise: u64,
}

impl ScenarioSeeds {
    /// Channel realization `scenario` observed with noise draw `noise_index`.
    pub fn derive(master: u64, scenario: u64, noise_index: u64) -> Self {
        let base = child_seed(master, Purpose::Scenario, scenario);
        Self {
            channel: child_seed(base, Purpose::ChannelBlock, 0),
            symbols: child_seed(base, Purpose::Symbols, noise_index),
            noise: child_seed(base, Purpose::Noise, noise_index),
        }
    }
}

/// Channel, symbols, received beamspace grid and detector of one snapshot.
///
/// The beamspace grid is scaled to unit RMS before coding; detection undoes
/// the scale so all errors refer to the physical signal.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub scenario: u64,
    pub noise_index: u64,
    pub seeds: ScenarioSeeds,
    pub kind: BeamspaceKind,
    pub n_user: usize,
    pub n12: usize,
    pub b_exp: u8,
    pub symbols: ResourceGrid,
    /// Received grid in beamspace, before normalization.
    pub y_beam: ResourceGrid,
    /// Factor that brings `y_beam` to unit RMS.
    pub scale: f64,
    /// Effective channel `basis^H H` per resource block.
    pub h_beam: ChannelRealization,
    pub sigma2: f64,
    /// Root mean square over resource blocks of the Frobenius condition number.
    pub cond_f: f64,
    /// Received power per selected beam, strongest first.
    pub beam_power: Vec<f64>,
    /// Received power summed over all antennas.
    pub total_power: f64,
    pub evm_target_percent: Option<f64>,
    weights: Vec<ComplexMatrix>,
    detected_clean: ResourceGrid,
}

/// Everything measured when coding a scenario with one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMetrics {
    pub delta_y: f64,
    /// Error relative to block full scale, the precision of one mantissa.
    pub delta_block: f64,
    /// `||W dY|| / ||W Y||`, the detection error due to compression alone.
    pub measured_error: f64,
    /// Common-exponent prediction from `delta_block`.
    pub predicted_error: f64,
    /// Per-sample prediction from `delta_y`.
    pub predicted_error_plain: f64,
    /// EVM of the detected symbols against the transmitted ones.
    pub evm_percent: f64,
    pub saturated_blocks: u32,
}

impl ScenarioMetrics {
    pub fn compression_evm_percent(&self) -> f64 {
        100.0 * self.measured_error
    }
}

fn stage<E: std::fmt::Display>(name: &'static str) -> impl Fn(E) -> HarnessError {
    move |e| HarnessError::Stage {
        stage: name,
        message: e.to_string(),
    }
}

/// Draws the channel for `cfg`.
pub fn make_channel(cfg: &ScenarioConfig, seed: u64) -> Result<ChannelRealization, HarnessError> {
    let s = &cfg.system;
    match cfg.channel {
        ChannelModel::Randsvd { cond } => randsvd_channel(s.m_antennas, s.n_user, cond, s.n_rb, seed),
        ChannelModel::Clustered { clusters, spread_deg } => {
            clustered_channel(s.m_antennas, s.n_user, clusters, spread_deg, s.n_rb, seed)
        }
    }
    .map_err(stage("channel"))
}

impl PreparedScenario {
    pub fn prepare(cfg: &ScenarioConfig, scenario: u64, noise_index: u64) -> Result<Self, HarnessError> {
        let seeds = ScenarioSeeds::derive(cfg.seed, scenario, noise_index);
        let ch = make_channel(cfg, seeds.channel)?;
        Self::from_channel(cfg, &ch, scenario, noise_index, seeds)
    }

    /// Runs everything after channel generation on a given channel.
    pub fn from_channel(
        cfg: &ScenarioConfig,
        ch: &ChannelRealization,
        scenario: u64,
        noise_index: u64,
        seeds: ScenarioSeeds,
    ) -> Result<Self, HarnessError> {
        let s = &cfg.system;
        if ch.m_antennas() != s.m_antennas || ch.n_layers() != s.n_user || ch.n_rb() != s.n_rb {
            return Err(HarnessError::Config(format!(
                "channel is {} x {} over {} blocks, config expects {} x {} over {}",
                ch.m_antennas(),
                ch.n_layers(),
                ch.n_rb(),
                s.m_antennas,
                s.n_user,
                s.n_rb
            )));
        }
        let symbols = random_symbols(cfg.n_sc(), s.n_user, s.modulation, seeds.symbols);
        let rx = transmit(&symbols, ch, s.n12, s.snr_db, seeds.noise).map_err(stage("transmit"))?;
        let basis = build_basis(cfg.beamspace.kind, ch, &rx.grid, cfg.beamspace.n_beam).map_err(stage("beamspace"))?;
        let y_beam = to_beamspace(&rx.grid, &basis).map_err(stage("beamspace"))?;
        let h_beam = basis.effective_channel(ch).map_err(stage("beamspace"))?;
        let rms = y_beam.rms();
        if rms == 0.0 {
            return Err(HarnessError::Stage {
                stage: "normalize",
                message: "beamspace grid is identically zero".into(),
            });
        }

        let weights = h_beam
            .blocks()
            .iter()
            .map(|h| mmse_weights(h, rx.sigma2))
            .collect::<Result<Vec<_>, _>>()
            .map_err(stage("detect"))?;
        let mut cond_sq = 0.0;
        for h in h_beam.blocks() {
            cond_sq += cond_frobenius(h).map_err(stage("detect"))?.powi(2);
        }
        let cond_f = (cond_sq / h_beam.n_rb() as f64).sqrt();

        let mut out = Self {
            scenario,
            noise_index,
            seeds,
            kind: cfg.beamspace.kind,
            n_user: s.n_user,
            n12: s.n12,
            b_exp: cfg.codec.b_exp,
            symbols,
            y_beam,
            scale: 1.0 / rms,
            h_beam,
            sigma2: rx.sigma2,
            cond_f,
            beam_power: basis.power_per_beam,
            total_power: rx.grid.energy(),
            evm_target_percent: cfg.training.evm_target_percent,
            weights,
            detected_clean: ResourceGrid::zeros(1, 1),
        };
        out.detected_clean = out.detect(&out.y_beam);
        Ok(out)
    }

    pub fn n_beam(&self) -> usize {
        self.y_beam.n_streams()
    }

    /// MMSE estimate per subcarrier.
    pub fn detect(&self, y: &ResourceGrid) -> ResourceGrid {
        let mut out = ResourceGrid::zeros(y.n_sc(), self.n_user);
        for sc in 0..y.n_sc() {
            let x = self.weights[sc / self.n12].mul_vec(y.subcarrier(sc)).expect("shapes fixed at preparation");
            out.subcarrier_mut(sc).copy_from_slice(&x);
        }
        out
    }

    /// Normalizes, encodes, decodes and rescales the beamspace grid.
    pub fn compress(&self, profile: &MantissaProfile) -> Result<(ResourceGrid, u32), HarnessError> {
        let normalized = self.y_beam.scale(self.scale);
        let frame = encode(&normalized, profile, self.b_exp, self.n12).map_err(stage("encode"))?;
        let decoded = decode(&frame).map_err(stage("decode"))?;
        Ok((decoded.scale(1.0 / self.scale), frame.saturation_count))
    }

    /// Compression-only detection error for `decoded`.
    pub fn detection_error(&self, decoded: &ResourceGrid) -> f64 {
        let x = self.detect(decoded);
        let err: f64 = x
            .as_slice()
            .iter()
            .zip(self.detected_clean.as_slice())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (err / self.detected_clean.energy()).sqrt()
    }

    pub fn evaluate(&self, profile: &MantissaProfile) -> Result<ScenarioMetrics, HarnessError> {
        let (decoded, saturated_blocks) = self.compress(profile)?;
        let delta_y = measured_delta_y(&self.y_beam, &decoded).map_err(stage("metrics"))?;
        let delta_block = block_scaled_delta_y(&self.y_beam, &decoded, self.n12).map_err(stage("metrics"))?;
        let measured_error = self.detection_error(&decoded);
        let (predicted_error, predicted_error_plain) = if delta_y > 0.0 {
            (
                predict_error_common_exp(delta_block, self.n_beam(), self.n_user, self.n12, self.cond_f)
                    .map_err(stage("predict"))?,
                predict_error(delta_y, self.n_beam(), self.n_user, self.cond_f).map_err(stage("predict"))?,
            )
        } else {
            (0.0, 0.0)
        };
        let evm = evm_percent(&self.detect(&decoded), &self.symbols).map_err(stage("metrics"))?;
        Ok(ScenarioMetrics {
            delta_y,
            delta_block,
            measured_error,
            predicted_error,
            predicted_error_plain,
            evm_percent: evm,
            saturated_blocks,
        })
    }

    /// Compression-only EVM with `profile`, in percent.
    pub fn compression_evm_percent(&self, profile: &MantissaProfile) -> Result<f64, HarnessError> {
        let (decoded, _) = self.compress(profile)?;
        Ok(100.0 * self.detection_error(&decoded))
    }
}

impl ProfileEvaluator for PreparedScenario {
    type Error = HarnessError;

    fn n_beam(&self) -> usize {
        PreparedScenario::n_beam(self)
    }

    fn evm_percent(&self, profile: &MantissaProfile) -> Result<f64, HarnessError> {
        self.compression_evm_percent(profile)
    }

    fn evm_target_percent(&self) -> Option<f64> {
        self.evm_target_percent
    }
}

impl From<OptimizerError> for HarnessError {
    fn from(e: OptimizerError) -> Self {
        HarnessError::Stage {
            stage: "optimize",
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::BitsSpec;
    use crate::predictor::measure_detection_error;

    fn small_cfg() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.system.n_rb = 2;
        cfg.system.m_antennas = 16;
        cfg.system.n_user = 2;
        cfg.beamspace.n_beam = 8;
        cfg
    }

    #[test]
    fn cached_detector_matches_predictor_measurement() {
        let cfg = small_cfg();
        let sc = PreparedScenario::prepare(&cfg, 0, 0).unwrap();
        let (decoded, _) = sc.compress(&cfg.profile().unwrap()).unwrap();
        let direct = measure_detection_error(&sc.y_beam, &decoded, &sc.h_beam, sc.sigma2).unwrap();
        assert!((sc.detection_error(&decoded) - direct).abs() < 1e-12);
    }

    #[test]
    fn near_lossless_pipeline() {
        let mut cfg = small_cfg();
        cfg.system.snr_db = f64::INFINITY;
        cfg.channel = ChannelModel::Randsvd { cond: 3.0 };
        cfg.beamspace.kind = BeamspaceKind::Antenna;
        cfg.beamspace.n_beam = 16;
        cfg.codec.bits = BitsSpec::Uniform(10);
        cfg.codec.b_exp = 8;
        let m = PreparedScenario::prepare(&cfg, 1, 0).unwrap().evaluate(&cfg.profile().unwrap()).unwrap();
        assert!(m.evm_percent < 0.1, "{m:?}");
        assert_eq!(m.saturated_blocks, 0);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = ScenarioSeeds::derive(5, 0, 0);
        let b = ScenarioSeeds::derive(5, 0, 1);
        assert_eq!(a.channel, b.channel);
        assert_ne!(a.noise, b.noise);
        assert_ne!(a.symbols, b.symbols);
        assert_eq!(a, ScenarioSeeds::derive(5, 0, 0));
        assert_ne!(a.channel, ScenarioSeeds::derive(5, 1, 0).channel);
    }
}
