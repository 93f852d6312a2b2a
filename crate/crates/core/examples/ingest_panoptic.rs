//! Joins a Panoptic-style label directory with a pose sidecar.
//!
//! ```text
//! cargo run --example ingest_panoptic -- <labels_dir> <sidecar.jsonl>
//! ```
//!
//! Without arguments a three-file demo layout is written to a temporary
//! directory and ingested.

use std::fs;
use std::path::{Path, PathBuf};

use hand_roi::dataset::{
    dataset_stats, filter_degenerate, merge_pose_sidecar, parse_panoptic, Split,
};
use hand_roi::heuristic::DEFAULT_GOLD_SCALE;
use serde_json::json;

fn demo(dir: &Path) -> (PathBuf, PathBuf) {
    let labels = dir.join("manual_train");
    fs::create_dir_all(&labels).unwrap();
    for (i, (id, left)) in [("000_a", false), ("001_b", true), ("002_c", false)]
        .into_iter()
        .enumerate()
    {
        let pts: Vec<[f64; 3]> = (0..21)
            .map(|k| {
                let (f, j) = (
                    (k as f64 - 1.0).max(0.0) / 4.0,
                    (k as f64 - 1.0).max(0.0) % 4.0,
                );
                let (x, y) = if k == 0 {
                    (0.0, 0.0)
                } else {
                    (f.floor() * 12.0 - 24.0, -30.0 - j * 10.0)
                };
                [300.0 + 40.0 * i as f64 + x, 400.0 + y, 1.0]
            })
            .collect();
        let v = json!({ "hand_pts": pts, "is_left": left });
        fs::write(labels.join(format!("{id}.json")), v.to_string()).unwrap();
    }
    let pose = |id: &str, hand: &str| {
        json!({
            "id": id, "width": 1280, "height": 720, "handedness": hand,
            "shoulder": [0.2, 0.3, -0.1], "elbow": [0.22, 0.5, -0.05], "wrist": [0.24, 0.58, 0.0],
            "thumb": [0.22, 0.54, 0.01], "index": [0.245, 0.5, 0.01], "pinky": [0.26, 0.52, 0.01]
        })
        .to_string()
    };
    let sidecar = dir.join("pose.jsonl");
    fs::write(
        &sidecar,
        format!("{}\n{}\n", pose("000_a", "right"), pose("001_b", "left")),
    )
    .unwrap();
    (labels, sidecar)
}

fn main() -> hand_roi::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tmp = tempfile::tempdir().unwrap();
    let (labels, sidecar) = match args.as_slice() {
        [l, s] => (PathBuf::from(l), PathBuf::from(s)),
        _ => demo(tmp.path()),
    };

    let parsed = parse_panoptic(&labels, Split::Train)?;
    println!(
        "{} annotations, {} malformed",
        parsed.records.len(),
        parsed.skipped.len()
    );
    let merged = merge_pose_sidecar(&parsed.records, &sidecar)?;
    println!(
        "{} joined, {} without pose, {} unmatched pose lines",
        merged.samples.len(),
        merged.dropped_no_pose,
        merged.unmatched_pose
    );
    let (samples, degenerate) = filter_degenerate(merged.samples, DEFAULT_GOLD_SCALE);
    let stats = dataset_stats(&samples, DEFAULT_GOLD_SCALE);
    println!("{degenerate} degenerate gold boxes dropped; {stats:?}");
    for s in samples.iter().take(5) {
        println!("  {} left={} wrist {:?}", s.id, s.was_left, s.pose.wrist);
    }
    Ok(())
}
