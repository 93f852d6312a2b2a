//! Pose-keypoint sidecar files.
//!
//! One JSON object per line:
//!
//! ```text
//! {"id": "...", "width": 1920, "height": 1080, "handedness": "left",
//!  "shoulder": [x, y, z], "elbow": [...], "wrist": [...],
//!  "thumb": [...], "index": [...], "pinky": [...]}
//! ```
//!
//! Coordinates are normalized by the image size, `z` uses the unit of `x`.
//! Unknown fields are rejected; blank lines are ignored.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{mirror_left, PanopticRecord, Sample};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::heuristic::PoseHand;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarLine {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub handedness: Handedness,
    pub shoulder: Vec3,
    pub elbow: Vec3,
    pub wrist: Vec3,
    pub thumb: Vec3,
    pub index: Vec3,
    pub pinky: Vec3,
}

impl SidecarLine {
    pub fn pose(&self) -> PoseHand {
        PoseHand {
            shoulder: self.shoulder,
            elbow: self.elbow,
            wrist: self.wrist,
            thumb: self.thumb,
            index: self.index,
            pinky: self.pinky,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MergeOutcome {
    pub samples: Vec<Sample>,
    /// Records without a sidecar line.
    pub dropped_no_pose: usize,
    /// Sidecar lines without a matching record.
    pub unmatched_pose: usize,
}

fn read_sidecar(path: &Path) -> Result<HashMap<String, SidecarLine>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = HashMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let rec: SidecarLine = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.width == 0 || rec.height == 0 {
            return Err(parse_err("zero image dimension".into()));
        }
        if !rec.pose().is_finite() {
            return Err(parse_err("non-finite keypoint".into()));
        }
        if lines.contains_key(&rec.id) {
            return Err(Error::DuplicateId(rec.id));
        }
        lines.insert(rec.id.clone(), rec);
    }
    Ok(lines)
}

/// Inner join of gold records with sidecar pose lines on `id`.
///
/// Handedness comes from the sidecar; left hands are mirrored before storage.
/// Output order follows `records`.
pub fn merge_pose_sidecar(records: &[PanopticRecord], sidecar: &Path) -> Result<MergeOutcome> {
    let mut lines = read_sidecar(sidecar)?;
    let mut out = MergeOutcome::default();
    let mut seen = std::collections::HashSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
        let Some(line) = lines.remove(&r.id) else {
            out.dropped_no_pose += 1;
            continue;
        };
        let was_left = line.handedness == Handedness::Left;
        let (pose, hand) = if was_left {
            mirror_left(&line.pose(), &r.hand, line.width as f64)
        } else {
            (line.pose(), r.hand)
        };
        out.samples.push(Sample {
            id: r.id.clone(),
            width: line.width,
            height: line.height,
            split: r.split,
            was_left,
            hand,
            pose,
        });
    }
    out.unmatched_pose = lines.len();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Split;
    use crate::heuristic::{Hand21, Landmark};

    fn record(id: &str) -> PanopticRecord {
        let mut pts = [Landmark::default(); 21];
        for (i, p) in pts.iter_mut().enumerate() {
            *p = Landmark {
                x: 10.0 + i as f64,
                y: 50.0,
                confidence: 1.0,
            };
        }
        PanopticRecord {
            id: id.into(),
            split: Split::Train,
            hand: Hand21 { points: pts },
            is_left: false,
        }
    }

    fn line(id: &str, hand: &str) -> String {
        format!(
            "{{\"id\":\"{id}\",\"width\":100,\"height\":50,\"handedness\":\"{hand}\",\
             \"shoulder\":[0.1,0.2,0.0],\"elbow\":[0.2,0.3,0.0],\"wrist\":[0.3,0.4,-0.1],\
             \"thumb\":[0.3,0.3,0.0],\"index\":[0.35,0.3,0.0],\"pinky\":[0.4,0.35,0.0]}}"
        )
    }

    fn write(lines: &[String]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pose.jsonl");
        std::fs::write(&path, lines.join("\n")).unwrap();
        (dir, path)
    }

    #[test]
    fn join_counts_and_mirroring() {
        let (_d, path) = write(&[line("a", "right"), line("b", "left"), line("z", "right")]);
        let out = merge_pose_sidecar(&[record("a"), record("b"), record("c")], &path).unwrap();
        assert_eq!(out.samples.len(), 2);
        assert_eq!(out.dropped_no_pose, 1);
        assert_eq!(out.unmatched_pose, 1);

        let a = &out.samples[0];
        assert!(!a.was_left);
        assert_eq!(a.pose.wrist.x, 0.3);
        let b = &out.samples[1];
        assert!(b.was_left);
        assert!((b.pose.wrist.x - 0.7).abs() < 1e-12);
        assert_eq!(b.hand.points[0].x, 90.0);
        assert_eq!((b.width, b.height), (100, 50));
    }

    #[test]
    fn full_join() {
        let ids: Vec<String> = (0..5).map(|i| format!("s{i}")).collect();
        let (_d, path) = write(&ids.iter().map(|i| line(i, "right")).collect::<Vec<_>>());
        let recs: Vec<_> = ids.iter().map(|i| record(i)).collect();
        let out = merge_pose_sidecar(&recs, &path).unwrap();
        assert_eq!(out.samples.len(), 5);
        assert_eq!(out.dropped_no_pose, 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let (_d, path) = write(&[line("a", "right"), "{not json".into()]);
        match merge_pose_sidecar(&[record("a")], &path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let (_d, path) = write(&[line("a", "right"), line("a", "left")]);
        assert!(matches!(
            merge_pose_sidecar(&[record("a")], &path),
            Err(Error::DuplicateId(_))
        ));
        let (_d, path) = write(&[line("a", "sideways")]);
        assert!(matches!(
            merge_pose_sidecar(&[record("a")], &path),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
