//! TOML scenario configuration. Every table rejects unknown keys.
//!
//! ```toml
//! seed = 7
//!
//! [system]
//! m_antennas = 64
//! n_user = 4
//! n_rb = 16
//! n12 = 12
//! snr_db = 20.0        # `inf` disables noise
//! modulation = 256     # QAM order: 4, 16, 64 or 256
//!
//! [codec]
//! b_exp = 4
//! b_fp = 16
//! bits = 6             # or one entry per beam: [8, 7, 6, ...]
//!
//! [beamspace]
//! kind = "dft"         # antenna | dft | svd
//! n_beam = 16
//!
//! [channel]
//! model = "clustered"  # or "randsvd" with `cond = 100.0`
//! clusters = 3
//! spread_deg = 10.0
//!
//! [training]
//! alpha = 32.0
//! beta = 0.5
//! budget_per_beam = 60
//! # evm_target_percent = 1.6   (default: each scenario's 6-bit EVM)
//!
//! [experiment]
//! n_scenarios = 50
//! n_noise_seeds = 4
//! ```

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::beamspace::BeamspaceKind;
use crate::codec::{compression_ratio, MantissaProfile, MAX_EXPONENT_BITS};
use crate::signal::Modulation;

/// Block sizes allowed for the common exponent.
pub const ALLOWED_N12: [usize; 3] = [12, 24, 48];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub codec: CodecConfig,
    #[serde(default)]
    pub beamspace: BeamspaceConfig,
    #[serde(default)]
    pub channel: ChannelModel,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub m_antennas: usize,
    pub n_user: usize,
    pub n_rb: usize,
    pub n12: usize,
    pub snr_db: f64,
    pub modulation: Modulation,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m_antennas: 64,
            n_user: 4,
            n_rb: 16,
            n12: 12,
            snr_db: 20.0,
            modulation: Modulation::Qam256,
        }
    }
}

/// Uniform width or one width per beam.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BitsSpec {
    Uniform(u8),
    PerBeam(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodecConfig {
    pub b_exp: u8,
    pub b_fp: u32,
    pub bits: BitsSpec,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            b_exp: 4,
            b_fp: 16,
            bits: BitsSpec::Uniform(6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamspaceConfig {
    pub kind: BeamspaceKind,
    pub n_beam: usize,
}

impl Default for BeamspaceConfig {
    fn default() -> Self {
        Self {
            kind: BeamspaceKind::Dft,
            n_beam: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelModel {
    Randsvd { cond: f64 },
    Clustered { clusters: usize, spread_deg: f64 },
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::Clustered {
            clusters: 3,
            spread_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Objective evaluations per beam.
    pub budget_per_beam: usize,
    /// Fixed EVM target; when absent each scenario's 6-bit EVM is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evm_target_percent: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            alpha: 32.0,
            beta: 0.5,
            budget_per_beam: 60,
            evm_target_percent: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_scenarios: usize,
    pub n_noise_seeds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_scenarios: 50,
            n_noise_seeds: 4,
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            system: SystemConfig::default(),
            codec: CodecConfig::default(),
            beamspace: BeamspaceConfig::default(),
            channel: ChannelModel::default(),
            training: TrainingConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The resolved configuration, defaults included, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn n_sc(&self) -> usize {
        self.system.n_rb * self.system.n12
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let s = &self.system;
        if s.m_antennas == 0 || s.n_user == 0 || s.n_rb == 0 {
            return bad("m_antennas, n_user and n_rb must be positive".into());
        }
        if s.n_user > s.m_antennas {
            return bad(format!("{} users exceed {} antennas", s.n_user, s.m_antennas));
        }
        if s.n_rb > usize::from(u16::MAX) || s.m_antennas > usize::from(u16::MAX) {
            return bad("n_rb and m_antennas must fit in 16 bits".into());
        }
        if !ALLOWED_N12.contains(&s.n12) {
            return bad(format!("n12 must be one of {ALLOWED_N12:?}, got {}", s.n12));
        }
        if s.snr_db.is_nan() || s.snr_db == f64::NEG_INFINITY {
            return bad(format!("snr_db must be a number or inf, got {}", s.snr_db));
        }
        let c = &self.codec;
        if !(1..=MAX_EXPONENT_BITS).contains(&c.b_exp) {
            return bad(format!("b_exp must be in 1..={MAX_EXPONENT_BITS}, got {}", c.b_exp));
        }
        if c.b_fp == 0 {
            return bad("b_fp must be positive".into());
        }
        let b = &self.beamspace;
        if b.n_beam == 0 || b.n_beam > s.m_antennas {
            return bad(format!("n_beam must be in 1..={}, got {}", s.m_antennas, b.n_beam));
        }
        self.profile()?;
        match self.channel {
            ChannelModel::Randsvd { cond } => {
                if !(cond >= 1.0 && cond.is_finite()) {
                    return bad(format!("randsvd cond must be finite and >= 1, got {cond}"));
                }
            }
            ChannelModel::Clustered { clusters, spread_deg } => {
                if clusters == 0 || clusters > s.m_antennas {
                    return bad(format!("clusters must be in 1..={}, got {clusters}", s.m_antennas));
                }
                if !(spread_deg >= 0.0 && spread_deg.is_finite()) {
                    return bad(format!("spread_deg must be finite and >= 0, got {spread_deg}"));
                }
            }
        }
        let t = &self.training;
        if !(t.alpha > 0.0 && t.beta > 0.0 && t.alpha.is_finite() && t.beta.is_finite()) {
            return bad("training alpha and beta must be positive".into());
        }
        if t.budget_per_beam == 0 {
            return bad("budget_per_beam must be positive".into());
        }
        if let Some(e) = t.evm_target_percent {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("evm_target_percent must be positive, got {e}"));
            }
        }
        if self.experiment.n_scenarios == 0 || self.experiment.n_noise_seeds == 0 {
            return bad("n_scenarios and n_noise_seeds must be positive".into());
        }
        Ok(())
    }

    /// Mantissa profile from `codec.bits`, expanded to `n_beam` beams.
    pub fn profile(&self) -> Result<MantissaProfile, HarnessError> {
        let n_beam = self.beamspace.n_beam;
        let bits = match &self.codec.bits {
            BitsSpec::Uniform(b) => vec![*b; n_beam],
            BitsSpec::PerBeam(v) if v.len() == n_beam => v.clone(),
            BitsSpec::PerBeam(v) => {
                return Err(HarnessError::Config(format!(
                    "codec.bits lists {} beams, n_beam is {n_beam}",
                    v.len()
                )))
            }
        };
        MantissaProfile::new(bits).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Budget for training a profile over `n_beam` beams.
    pub fn training_budget(&self) -> usize {
        self.training.budget_per_beam * self.beamspace.n_beam
    }

    /// Compression ratio of `profile` in this configuration.
    pub fn compression_ratio(&self, profile: &MantissaProfile) -> f64 {
        let bits: Vec<u32> = profile.bits().iter().map(|&b| u32::from(b)).collect();
        compression_ratio(
            self.n_sc(),
            self.system.n12,
            self.codec.b_fp,
            self.system.m_antennas,
            u32::from(self.codec.b_exp),
            &bits,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.n_sc(), 192);
        assert!((cfg.compression_ratio(&cfg.profile().unwrap()) - 10.378).abs() < 5e-4);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.system.snr_db = f64::INFINITY;
        cfg.channel = ChannelModel::Randsvd { cond: 30.0 };
        cfg.codec.bits = BitsSpec::PerBeam((0..16).map(|i| 8 - (i / 4) as u8).collect());
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_toml("sead = 3").is_err());
        assert!(ScenarioConfig::from_toml("[system]\nantennas = 3").is_err());
        assert!(ScenarioConfig::from_toml("[channel]\nmodel = \"randsvd\"\ncond = 10.0\nclusters = 2").is_err());
    }

    #[test]
    fn invariants_checked() {
        assert!(ScenarioConfig::from_toml("[system]\nn12 = 16").is_err());
        assert!(ScenarioConfig::from_toml("[codec]\nb_exp = 0").is_err());
        assert!(ScenarioConfig::from_toml("[beamspace]\nn_beam = 65").is_err());
        assert!(ScenarioConfig::from_toml("[codec]\nbits = [6, 6]").is_err());
        assert!(ScenarioConfig::from_toml("[system]\nmodulation = 32").is_err());
        assert!(ScenarioConfig::from_toml("[system]\nsnr_db = inf").is_ok());
    }
}
