//! Masked-token training examples and iterative parallel decoding.
//!
//! Decoding starts from an all-MASK grid. At each of `T` steps the
//! predictor is queried on every masked cell, conditional and unconditional
//! logits are combined with classifier-free guidance, a token and a
//! confidence are drawn per cell, and the most confident cells are
//! committed so that exactly `cosine_masked_count(N, t, T)` stay masked.

mod decode;
mod guidance;
mod mask;
mod predictor;
mod schedule;

pub use decode::{decode_iterative, decode_with_trace, DecodeConfig, DecodeTrace, StepRecord};
pub use guidance::cfg_combine;
pub use mask::{masked_training_example, masked_training_example_with_mask, sample_mask, Mask, TrainingExample};
pub use predictor::{
    plant_scene, Corruption, PlantedPredictor, PlantedPredictorConfig, PlantedScene, PlantedSession, Predictor,
    PredictorOutput, PredictorSession,
};
pub use schedule::{cosine_masked_count, gamma, ScheduleState};

use crate::microworld::WorldError;

/// Default number of decoding steps.
pub const DEFAULT_STEPS: usize = 50;
/// Default classifier-free guidance scale.
pub const DEFAULT_CFG_SCALE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("masking ratio {0} outside [0, 1]")]
    BadEta(f64),
    #[error("step {t} beyond schedule length {total}")]
    BadStep { t: usize, total: usize },
    #[error("logit length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite logits at position {0}")]
    NonFinite(usize),
    #[error("invalid generator config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    World(#[from] WorldError),
}
