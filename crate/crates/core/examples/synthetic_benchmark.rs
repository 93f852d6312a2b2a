//! Heuristic vs. MLP vs. hybrid on the synthetic test split, with a
//! comparison report.
//!
//! ```text
//! cargo run --release --example synthetic_benchmark
//! ```

use hand_roi::cli::{predict_with, training_examples, Method};
use hand_roi::dataset::{synth_generate, Sample, Split, SynthConfig};
use hand_roi::metrics::{evaluate, EvalOptions};
use hand_roi::model::{train_predictor, TrainConfig};
use hand_roi::report::compare;

fn main() -> hand_roi::Result<()> {
    let samples = synth_generate(&SynthConfig::default())?;
    let opts = EvalOptions::default();
    let examples = training_examples(&samples, Split::Train, opts.gold_scale)?;
    let (predictor, _) = train_predictor(&examples, &TrainConfig::default())?;

    let test: Vec<Sample> = samples
        .into_iter()
        .filter(|s| s.split == Split::Test)
        .collect();
    let mut rows = Vec::new();
    println!("method      mean IoU  min IoU  center%  scale%  rot deg");
    for m in [Method::Heuristic, Method::Mlp, Method::Hybrid] {
        let (r, s) = evaluate(
            m.name(),
            |x| predict_with(m, Some(&predictor), x),
            &test,
            &opts,
        )?;
        println!(
            "{:<10} {:>9.4} {:>8.4} {:>8.2} {:>7.2} {:>8.2}",
            m.name(),
            s.mean_iou,
            s.min_iou,
            s.mean_center_err,
            s.mean_scale_err,
            s.mean_rot_err
        );
        rows.push(r);
    }
    println!();
    print!("{}", compare(&rows[2], &rows[0], 20)?.to_text());
    Ok(())
}
