//! Beamspace block floating-point fronthaul compression for massive-MIMO
//! uplink simulation.

pub mod beamspace;
pub mod channel;
pub mod codec;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod predictor;
pub mod rng;
pub mod signal;

pub use beamspace::{BeamspaceBasis, BeamspaceKind};
pub use channel::ChannelRealization;
pub use codec::{CompressedFrame, MantissaProfile, QuantizerCodebook};
pub use harness::{HarnessError, ScenarioConfig};
pub use linalg::ComplexMatrix;
pub use optimizer::{LossWeights, TrainingMode};
pub use predictor::ErrorPrediction;
pub use signal::{Modulation, ResourceGrid};
