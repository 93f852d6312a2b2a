//! Writes a schematic SVG with the gold box and the heuristic prediction.
//!
//! ```text
//! cargo run --example render_overlay -- [out.svg]
//! ```

use hand_roi::dataset::{synth_generate, SynthConfig};
use hand_roi::gold_roi;
use hand_roi::heuristic::DEFAULT_GOLD_SCALE;
use hand_roi::report::render_svg;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "overlay.svg".into());
    let samples = synth_generate(&SynthConfig {
        n: 20,
        ..SynthConfig::default()
    })?;
    let s = &samples[12];
    let (w, h) = s.dims();
    let gold = gold_roi(&s.hand, w, h, DEFAULT_GOLD_SCALE)?;
    let pred = s.pose.heuristic_roi(s.rho())?;
    let (svg, skipped) = render_svg(
        s.width,
        s.height,
        &s.hand,
        &gold,
        &[("heuristic".into(), pred)],
    )?;
    assert!(skipped.is_empty());
    std::fs::write(&out, svg)?;
    println!("{} -> {out}", s.id);
    Ok(())
}
