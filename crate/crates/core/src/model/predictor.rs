use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_aspect, normalize_deg, RotRect, Vec2};
use crate::heuristic::PoseHand;
use crate::model::mlp::Mlp;

pub const FEATURE_DIM: usize = 19;
pub const HIDDEN: [usize; 2] = [10, 10];
/// Version tag of the feature layout, stored in weights files.
pub const FEATURE_SPEC: &str = "pose6-xyz+rho/v1";

/// Shoulder, elbow, wrist, thumb, index, pinky as `(x, y, z)` triples,
/// followed by the aspect ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn rho(&self) -> f64 {
        self.0[FEATURE_DIM - 1]
    }
}

/// Builds the network input. Left hands must already be mirrored.
pub fn featurize(hand: &PoseHand, rho: f64) -> Result<FeatureVector> {
    check_aspect(rho)?;
    if !hand.is_finite() {
        return Err(Error::InvalidSample("non-finite pose keypoint".into()));
    }
    let mut v = [0.0; FEATURE_DIM];
    for (chunk, k) in v.chunks_exact_mut(3).zip(hand.keypoints()) {
        chunk.copy_from_slice(&[k.x, k.y, k.z]);
    }
    v[FEATURE_DIM - 1] = rho;
    Ok(FeatureVector(v))
}

/// How the angle head encodes rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleMode {
    /// Two outputs `(sin, cos)` decoded with `atan2`.
    #[default]
    SinCos,
    /// One output: rotation in turns (`degrees / 360`), no wrap-around.
    Scalar,
}

impl AngleMode {
    pub fn outputs(self) -> usize {
        match self {
            AngleMode::SinCos => 2,
            AngleMode::Scalar => 1,
        }
    }

    pub(crate) fn encode(self, rotation_deg: f64) -> Vec<f64> {
        match self {
            AngleMode::SinCos => {
                let (s, c) = rotation_deg.to_radians().sin_cos();
                vec![s, c]
            }
            AngleMode::Scalar => vec![rotation_deg / 360.0],
        }
    }

    fn decode(self, out: &[f64]) -> f64 {
        let deg = match self {
            AngleMode::SinCos => out[0].atan2(out[1]).to_degrees(),
            AngleMode::Scalar => out[0] * 360.0,
        };
        if deg.is_finite() {
            normalize_deg(deg)
        } else {
            0.0
        }
    }
}

pub fn head_sizes(outputs: usize) -> Vec<usize> {
    let mut v = vec![FEATURE_DIM];
    v.extend(HIDDEN);
    v.push(outputs);
    v
}

/// Three independent regression heads for ROI center, size and rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiPredictor {
    pub center_head: Mlp,
    pub size_head: Mlp,
    pub angle_head: Mlp,
    pub angle_mode: AngleMode,
    pub feature_spec: String,
}

impl RoiPredictor {
    /// Checks that every head has the expected shape.
    pub fn new(
        center_head: Mlp,
        size_head: Mlp,
        angle_head: Mlp,
        angle_mode: AngleMode,
    ) -> Result<Self> {
        let p = RoiPredictor {
            center_head,
            size_head,
            angle_head,
            angle_mode,
            feature_spec: FEATURE_SPEC.to_string(),
        };
        for (name, head, want) in p.heads_with_shapes() {
            if head.layer_sizes() != want.as_slice() {
                return Err(Error::InvalidDataset(format!(
                    "{name} head has shape {:?}, expected {want:?}",
                    head.layer_sizes()
                )));
            }
        }
        Ok(p)
    }

    pub fn zeros(angle_mode: AngleMode) -> Self {
        RoiPredictor {
            center_head: Mlp::zeros(&head_sizes(2)).unwrap(),
            size_head: Mlp::zeros(&head_sizes(1)).unwrap(),
            angle_head: Mlp::zeros(&head_sizes(angle_mode.outputs())).unwrap(),
            angle_mode,
            feature_spec: FEATURE_SPEC.to_string(),
        }
    }

    pub(crate) fn heads_with_shapes(&self) -> [(&'static str, &Mlp, Vec<usize>); 3] {
        [
            ("center", &self.center_head, head_sizes(2)),
            ("size", &self.size_head, head_sizes(1)),
            (
                "angle",
                &self.angle_head,
                head_sizes(self.angle_mode.outputs()),
            ),
        ]
    }

    fn center_and_size(&self, f: &FeatureVector) -> (Vec2, f64) {
        let c = self.center_head.forward(f.as_slice()).unwrap();
        let s = self.size_head.forward(f.as_slice()).unwrap()[0];
        (Vec2::new(c[0], c[1]), s.max(0.0))
    }

    /// Pure network prediction of all three ROI parameters.
    pub fn predict(&self, f: &FeatureVector) -> RotRect {
        let (center, size) = self.center_and_size(f);
        let a = self.angle_head.forward(f.as_slice()).unwrap();
        RotRect {
            center,
            size,
            rotation: self.angle_mode.decode(&a),
        }
    }

    /// Network center and size with the heuristic's rotation.
    pub fn predict_hybrid(&self, hand: &PoseHand, rho: f64) -> Result<RotRect> {
        let rotation = hand.heuristic_roi(rho)?.rotation;
        let (center, size) = self.center_and_size(&featurize(hand, rho)?);
        Ok(RotRect {
            center,
            size,
            rotation,
        })
    }
}
