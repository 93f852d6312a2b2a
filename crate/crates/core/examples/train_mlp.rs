//! Trains the three predictor heads on a synthetic train split and prints
//! the best validation loss of each.
//!
//! ```text
//! cargo run --release --example train_mlp [epochs]
//! ```

use hand_roi::cli::training_examples;
use hand_roi::dataset::{synth_generate, Split, SynthConfig};
use hand_roi::heuristic::DEFAULT_GOLD_SCALE;
use hand_roi::model::{train_predictor, AngleMode, TrainConfig};

fn main() -> hand_roi::Result<()> {
    let epochs = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let samples = synth_generate(&SynthConfig::default())?;
    let examples = training_examples(&samples, Split::Train, DEFAULT_GOLD_SCALE)?;

    for mode in [AngleMode::SinCos, AngleMode::Scalar] {
        let cfg = TrainConfig {
            epochs,
            angle_mode: mode,
            ..TrainConfig::default()
        };
        let (predictor, log) = train_predictor(&examples, &cfg)?;
        println!(
            "{mode:?}: {} train / {} validation samples",
            log.train_count, log.val_count
        );
        for (head, epoch, loss) in &log.best {
            println!("  {head:<6} best epoch {epoch:>4}  val mse {loss:.3e}");
        }
        println!(
            "  parameters: center {} size {} angle {}",
            predictor.center_head.param_count(),
            predictor.size_head.param_count(),
            predictor.angle_head.param_count()
        );
    }
    Ok(())
}
