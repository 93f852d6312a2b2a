//! Pose keypoints to a hand ROI, with the matching gold box.
//!
//! ```text
//! cargo run --example heuristic_roi
//! ```

use hand_roi::dataset::{synth_generate, SynthConfig};
use hand_roi::geometry::rotated_iou;
use hand_roi::heuristic::DEFAULT_GOLD_SCALE;
use hand_roi::{calc_hand_roi, closed_form_size, gold_roi, Vec2};

fn main() -> hand_roi::Result<()> {
    // An upright hand in a square image.
    let wrist = Vec2::new(0.5, 0.8);
    let index = Vec2::new(0.5, 0.5);
    let pinky = Vec2::new(0.5, 0.5);
    let roi = calc_hand_roi(wrist, index, pinky, 1.0)?;
    println!("upright hand: {roi:?}");
    println!(
        "closed-form size: {}",
        closed_form_size(wrist, index, pinky, 1.0)?
    );

    // The same keypoints in a 16:9 frame.
    let rho = 16.0 / 9.0;
    println!("16:9 frame: {:?}", calc_hand_roi(wrist, index, pinky, rho)?);

    let samples = synth_generate(&SynthConfig {
        n: 5,
        ..SynthConfig::default()
    })?;
    for s in &samples {
        let (w, h) = s.dims();
        let gold = gold_roi(&s.hand, w, h, DEFAULT_GOLD_SCALE)?;
        let pred = s.pose.heuristic_roi(s.rho())?;
        println!(
            "{}  {}x{}  gold size {:.3} rot {:6.1}  heuristic size {:.3} rot {:6.1}  IoU {:.3}",
            s.id,
            s.width,
            s.height,
            gold.size,
            gold.rotation,
            pred.size,
            pred.rotation,
            rotated_iou(&pred, &gold, w, h)?
        );
    }
    Ok(())
}
