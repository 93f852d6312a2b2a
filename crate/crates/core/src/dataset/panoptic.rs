//! Panoptic Hand DB label directories (`manual_train`, `manual_test`).
//!
//! Each `*.json` file holds one annotation:
//! `{"hand_pts": [[x, y, visible], ... 21 entries], "is_left": 0 | 1, ...}`.
//! Other keys (e.g. `img_paths`) are ignored.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dataset::Split;
use crate::error::{Error, Result};
use crate::heuristic::{Hand21, Landmark};

#[derive(Debug, Clone, PartialEq)]
pub struct PanopticRecord {
    /// File stem of the annotation file.
    pub id: String,
    pub split: Split,
    pub hand: Hand21,
    pub is_left: bool,
}

#[derive(Debug, Clone, Default)]
pub struct PanopticLabels {
    pub records: Vec<PanopticRecord>,
    /// Files that could not be parsed, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Flag {
    Bool(bool),
    Num(f64),
}

#[derive(Deserialize)]
struct RawLabel {
    hand_pts: Vec<[f64; 3]>,
    is_left: Flag,
}

fn parse_file(path: &Path) -> std::result::Result<(Hand21, bool), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let raw: RawLabel = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    if raw.hand_pts.len() != 21 {
        return Err(format!(
            "expected 21 landmarks, found {}",
            raw.hand_pts.len()
        ));
    }
    let mut points = [Landmark::default(); 21];
    for (p, [x, y, c]) in points.iter_mut().zip(raw.hand_pts) {
        *p = Landmark {
            x,
            y,
            confidence: c.clamp(0.0, 1.0),
        };
    }
    let hand = Hand21::new(points).map_err(|e| e.to_string())?;
    let is_left = match raw.is_left {
        Flag::Bool(b) => b,
        Flag::Num(n) => n != 0.0,
    };
    Ok((hand, is_left))
}

/// Reads every `*.json` annotation in `dir`, in lexicographic filename order.
pub fn parse_panoptic(dir: &Path, split: Split) -> Result<PanopticLabels> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let mut out = PanopticLabels::default();
    for path in files {
        match parse_file(&path) {
            Ok((hand, is_left)) => out.records.push(PanopticRecord {
                id: path.file_stem().unwrap().to_string_lossy().into_owned(),
                split,
                hand,
                is_left,
            }),
            Err(msg) => out.skipped.push((path, msg)),
        }
    }
    if out.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(is_left: &str) -> String {
        let pts: Vec<String> = (0..21)
            .map(|i| format!("[{}, {}, 1]", 100 + i, 200 - 3 * i))
            .collect();
        format!(
            "{{\"hand_pts\": [{}], \"is_left\": {is_left}, \"img_paths\": \"x.jpg\"}}",
            pts.join(", ")
        )
    }

    #[test]
    fn parses_sorted_and_skips_malformed() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.json"), label("1")).unwrap();
        std::fs::write(dir.path().join("a.json"), label("false")).unwrap();
        std::fs::write(dir.path().join("c.json"), "{\"hand_pts\": []}").unwrap();
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();

        let l = parse_panoptic(dir.path(), Split::Test).unwrap();
        let ids: Vec<_> = l.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(!l.records[0].is_left);
        assert!(l.records[1].is_left);
        assert_eq!(l.records[0].split, Split::Test);
        assert_eq!(l.records[1].hand.points[20].x, 120.0);
        assert_eq!(l.skipped.len(), 1);
    }

    #[test]
    fn empty_and_missing_directories() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            parse_panoptic(dir.path(), Split::Train),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            parse_panoptic(&dir.path().join("nope"), Split::Train),
            Err(Error::Io { .. })
        ));
    }
}
