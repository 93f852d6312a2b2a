//! Micro-MLP ROI predictor: networks, training, and the weights file.

pub mod mlp;
pub mod predictor;
pub mod train;
pub mod weights;

pub use mlp::{Gradients, Mlp};
pub use predictor::{featurize, AngleMode, FeatureVector, RoiPredictor, FEATURE_DIM, FEATURE_SPEC};
pub use train::{train_predictor, EpochLog, Optimizer, RoiExample, TrainConfig, TrainLog};
pub use weights::{load_weights, save_weights};

use crate::error::Result;
use crate::geometry::RotRect;
use crate::heuristic::PoseHand;

pub fn predict_roi(p: &RoiPredictor, f: &FeatureVector) -> RotRect {
    p.predict(f)
}

/// Network center and size combined with the heuristic rotation.
pub fn hybrid_predict(p: &RoiPredictor, hand: &PoseHand, rho: f64) -> Result<RotRect> {
    p.predict_hybrid(hand, rho)
}
