//! Deterministic mini-batch training of the three predictor heads.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RotRect;
use crate::model::mlp::{Gradients, Mlp};
use crate::model::predictor::{head_sizes, AngleMode, FeatureVector, RoiPredictor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    #[default]
    Adam,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub optimizer: Optimizer,
    pub angle_mode: AngleMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 500,
            seed: 0,
            validation_fraction: 0.1,
            optimizer: Optimizer::Adam,
            angle_mode: AngleMode::SinCos,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDataset(format!("train config: {m}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must be in [0, 1)");
        }
        Ok(())
    }
}

/// One training example: network input and the gold ROI it should predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiExample {
    pub features: FeatureVector,
    pub target: RotRect,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub head: &'static str,
    pub epoch: usize,
    pub train_loss: f64,
    /// Loss used for checkpoint selection: validation loss, or training loss
    /// when the validation split is empty.
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    /// `(head, best epoch, best validation loss)`
    pub best: Vec<(&'static str, usize, f64)>,
    pub train_count: usize,
    pub val_count: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Mlp, grads: &Gradients, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        let g = grads
            .weights
            .iter()
            .zip(&grads.biases)
            .flat_map(|(w, b)| w.iter().chain(b));
        for (((p, g), m), v) in net
            .params_mut()
            .zip(g)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        }
    }
}

fn sgd_step(net: &mut Mlp, grads: &Gradients, lr: f64) {
    let g = grads
        .weights
        .iter()
        .zip(&grads.biases)
        .flat_map(|(w, b)| w.iter().chain(b));
    for (p, g) in net.params_mut().zip(g) {
        *p -= lr * g;
    }
}

/// Deterministic train/validation partition of `n` indices.
pub fn split_indices(n: usize, cfg: &TrainConfig) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    idx.shuffle(&mut rng);
    let n_val = ((n as f64 * cfg.validation_fraction).floor() as usize).min(n.saturating_sub(1));
    let train = idx.split_off(n_val);
    (train, idx)
}

/// Trains one network on `(inputs, targets)` and returns the parameters of
/// the epoch with the lowest selection loss.
pub fn train_head(
    head: &'static str,
    stream: u64,
    layer_sizes: &[usize],
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    cfg: &TrainConfig,
    log: &mut Vec<EpochLog>,
) -> Result<(Mlp, usize, f64)> {
    cfg.validate()?;
    if inputs.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 training samples, got {}",
            inputs.len()
        )));
    }
    let (mut train, val) = split_indices(inputs.len(), cfg);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream + 1);
    let mut net = Mlp::glorot(layer_sizes, &mut rng)?;
    let mut adam = Adam::new(net.param_count());
    let mut grads = net.zero_gradients();
    let mut scratch = net.scratch();

    let subset = |ix: &[usize]| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        (
            ix.iter().map(|&i| inputs[i].clone()).collect(),
            ix.iter().map(|&i| targets[i].clone()).collect(),
        )
    };
    let (val_x, val_t) = subset(&val);

    let mut best: Option<(Mlp, usize, f64)> = None;
    for epoch in 0..cfg.epochs {
        train.shuffle(&mut rng);
        let mut sse = 0.0;
        for batch in train.chunks(cfg.batch_size) {
            let loss = net.gradient_indexed(inputs, targets, batch, &mut grads, &mut scratch);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { head, epoch });
            }
            sse += loss * batch.len() as f64;
            match cfg.optimizer {
                Optimizer::Adam => adam.step(&mut net, &grads, cfg.learning_rate),
                Optimizer::Sgd => sgd_step(&mut net, &grads, cfg.learning_rate),
            }
        }
        let train_loss = sse / train.len() as f64;
        let val_loss = if val.is_empty() {
            let (x, t) = subset(&train);
            net.mse(&x, &t)?
        } else {
            net.mse(&val_x, &val_t)?
        };
        if !val_loss.is_finite() || !train_loss.is_finite() {
            return Err(Error::TrainingDiverged { head, epoch });
        }
        log.push(EpochLog {
            head,
            epoch,
            train_loss,
            val_loss,
        });
        if best.as_ref().is_none_or(|(_, _, b)| val_loss < *b) {
            best = Some((net.clone(), epoch, val_loss));
        }
    }
    Ok(best.expect("at least one epoch"))
}

/// Trains the center, size and angle heads independently with the same
/// configuration.
pub fn train_predictor(
    examples: &[RoiExample],
    cfg: &TrainConfig,
) -> Result<(RoiPredictor, TrainLog)> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::InvalidDataset("no training samples".into()));
    }
    let inputs: Vec<Vec<f64>> = examples.iter().map(|e| e.features.0.to_vec()).collect();
    let center_t: Vec<Vec<f64>> = examples
        .iter()
        .map(|e| vec![e.target.center.x, e.target.center.y])
        .collect();
    let size_t: Vec<Vec<f64>> = examples.iter().map(|e| vec![e.target.size]).collect();
    let angle_t: Vec<Vec<f64>> = examples
        .iter()
        .map(|e| cfg.angle_mode.encode(e.target.rotation))
        .collect();

    let mut log = TrainLog::default();
    let (train, val) = split_indices(examples.len(), cfg);
    log.train_count = train.len();
    log.val_count = val.len();

    let mut heads = Vec::with_capacity(3);
    for (stream, (name, targets, outputs)) in [
        ("center", &center_t, 2),
        ("size", &size_t, 1),
        ("angle", &angle_t, cfg.angle_mode.outputs()),
    ]
    .into_iter()
    .enumerate()
    {
        let (net, epoch, loss) = train_head(
            name,
            stream as u64,
            &head_sizes(outputs),
            &inputs,
            targets,
            cfg,
            &mut log.epochs,
        )?;
        log.best.push((name, epoch, loss));
        heads.push(net);
    }
    let angle = heads.pop().unwrap();
    let size = heads.pop().unwrap();
    let center = heads.pop().unwrap();
    let predictor = RoiPredictor::new(center, size, angle, cfg.angle_mode)?;
    Ok((predictor, log))
}
