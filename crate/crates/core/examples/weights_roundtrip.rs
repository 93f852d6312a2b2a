//! Saves a trained predictor, reloads it and shows the file layout.
//!
//! ```text
//! cargo run --example weights_roundtrip
//! ```

use hand_roi::cli::training_examples;
use hand_roi::dataset::{synth_generate, Split, SynthConfig};
use hand_roi::heuristic::DEFAULT_GOLD_SCALE;
use hand_roi::model::weights::{decode, encode};
use hand_roi::model::{featurize, train_predictor, TrainConfig};

fn main() -> hand_roi::Result<()> {
    let samples = synth_generate(&SynthConfig {
        n: 300,
        ..SynthConfig::default()
    })?;
    let examples = training_examples(&samples, Split::Train, DEFAULT_GOLD_SCALE)?;
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let (predictor, _) = train_predictor(&examples, &cfg)?;

    let bytes = encode(&predictor);
    println!("{} bytes", bytes.len());
    println!("magic   {:?}", std::str::from_utf8(&bytes[..4]).unwrap());
    println!("version {}", u16::from_le_bytes([bytes[4], bytes[5]]));
    println!("angle   {}", bytes[6]);

    let back = decode(&bytes)?;
    assert_eq!(encode(&back), bytes);
    let s = &samples[samples.len() - 1];
    let f = featurize(&s.pose, s.rho())?;
    println!("original {:?}", predictor.predict(&f));
    println!("reloaded {:?}", back.predict(&f));

    let mut broken = bytes.clone();
    broken.truncate(bytes.len() - 5);
    println!("truncated file: {}", decode(&broken).unwrap_err());
    Ok(())
}
