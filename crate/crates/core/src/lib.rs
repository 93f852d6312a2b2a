//! Hand region-of-interest estimation from sparse body keypoints.
//!
//! - [`geometry`]: oriented square ROIs, polygon clipping and rotated IoU.
//! - [`heuristic`]: the wrist/index/pinky ROI rule and gold ROIs from 21
//!   hand landmarks.
//! - [`model`]: a from-scratch micro-MLP and the three-headed ROI predictor.
//! - [`dataset`]: Panoptic label ingestion, pose sidecars, synthetic hands.
//! - [`metrics`]: center, scale, rotation and IoU metrics; win rate.
//! - [`report`]: comparison reports and SVG output.
//! - [`cli`]: the `hand-roi` command line.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod heuristic;
pub mod metrics;
pub mod model;
pub mod report;

pub use error::{Error, Result, WeightsError};
pub use geometry::{RotRect, Vec2, Vec3};
pub use heuristic::{calc_hand_roi, closed_form_size, gold_roi, Hand21, Landmark, PoseHand};
pub use model::{RoiPredictor, TrainConfig};
