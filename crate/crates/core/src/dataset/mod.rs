//! Evaluation samples: ingestion, mirroring, synthetic generation and
//! line-delimited storage.

mod panoptic;
mod sidecar;
mod synth;

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::{gold_roi, Hand21, PoseHand};

pub use panoptic::{parse_panoptic, PanopticLabels, PanopticRecord};
pub use sidecar::{merge_pose_sidecar, MergeOutcome, SidecarLine};
pub use synth::{synth_generate, SynthConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// One evaluation unit. `pose` and `hand` are stored right-handed: left hands
/// are mirrored at ingestion and flagged with `was_left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub split: Split,
    pub was_left: bool,
    pub hand: Hand21,
    pub pose: PoseHand,
}

impl Sample {
    pub fn rho(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    pub fn dims(&self) -> (f64, f64) {
        (self.width as f64, self.height as f64)
    }
}

/// Reflects a left hand into a right hand: `x -> 1 - x` for normalized pose
/// keypoints and `x -> width - x` for pixel landmarks.
pub fn mirror_left(pose: &PoseHand, hand: &Hand21, width: f64) -> (PoseHand, Hand21) {
    let mut pose = *pose;
    for k in pose.keypoints_mut() {
        k.x = 1.0 - k.x;
    }
    let mut hand = *hand;
    for p in hand.points.iter_mut() {
        p.x = width - p.x;
    }
    (pose, hand)
}

/// Splits samples into those with a valid gold ROI and a count of the rest.
pub fn filter_degenerate(samples: Vec<Sample>, gold_scale: f64) -> (Vec<Sample>, usize) {
    let before = samples.len();
    let kept: Vec<Sample> = samples
        .into_iter()
        .filter(|s| {
            let (w, h) = s.dims();
            gold_roi(&s.hand, w, h, gold_scale).is_ok()
        })
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DatasetStats {
    pub total: usize,
    pub train: usize,
    pub test: usize,
    pub left: usize,
    pub right: usize,
    /// Samples whose gold ROI cannot be built.
    pub degenerate: usize,
}

impl DatasetStats {
    pub fn mirrored_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.left as f64 / self.total as f64
        }
    }
}

pub fn dataset_stats(samples: &[Sample], gold_scale: f64) -> DatasetStats {
    let mut st = DatasetStats {
        total: samples.len(),
        ..DatasetStats::default()
    };
    for s in samples {
        match s.split {
            Split::Train => st.train += 1,
            Split::Test => st.test += 1,
        }
        if s.was_left {
            st.left += 1;
        } else {
            st.right += 1;
        }
        let (w, h) = s.dims();
        if gold_roi(&s.hand, w, h, gold_scale).is_err() {
            st.degenerate += 1;
        }
    }
    st
}

/// Writes one JSON object per line.
pub fn write_samples(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s).expect("samples serialize");
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Sample = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        if s.width == 0 || s.height == 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "zero image dimension".into(),
            });
        }
        s.hand.validate().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        if !seen.insert(s.id.clone()) {
            return Err(Error::DuplicateId(s.id));
        }
        out.push(s);
    }
    Ok(out)
}
