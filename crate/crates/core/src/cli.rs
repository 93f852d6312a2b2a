//! The `hand-roi` command line: `synth`, `ingest`, `train`, `eval`,
//! `compare` and `render`.
//!
//! Every command writes a `<output>.manifest` file next to its main output
//! with the full effective configuration as `key=value` lines.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or missing input,
//! 3 data mismatch, 4 sample not found.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{
    dataset_stats, filter_degenerate, merge_pose_sidecar, parse_panoptic, read_samples,
    synth_generate, write_samples, Sample, Split, SynthConfig,
};
use crate::error::{Error, Result};
use crate::geometry::RotRect;
use crate::heuristic::{gold_roi, DEFAULT_GOLD_SCALE};
use crate::metrics::{evaluate, read_rows_csv, write_rows_csv, EvalOptions, RotationMetric};
use crate::model::{
    featurize, load_weights, save_weights, train_predictor, AngleMode, Optimizer, RoiExample,
    RoiPredictor, TrainConfig,
};
use crate::report::{compare, render_svg};

pub const DATA_DIR_ENV: &str = "HAND_ROI_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hand-roi",
    version,
    about = "Hand ROI estimation and evaluation"
)]
pub struct Cli {
    /// Base directory for relative paths
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset
    Synth(SynthArgs),
    /// Join Panoptic hand labels with a pose sidecar into a dataset
    Ingest(IngestArgs),
    /// Train the three predictor heads on the train split
    Train(TrainArgs),
    /// Evaluate one method on the test split
    Eval(EvalArgs),
    /// Compare two row files
    Compare(CompareArgs),
    /// Draw gold and predicted boxes for one sample
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub noise_px: f64,
    #[arg(long, default_value_t = 75.0)]
    pub max_tilt_deg: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 16.0 / 9.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = DEFAULT_GOLD_SCALE)]
    pub gold_scale: f64,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Directory of training annotations (e.g. manual_train)
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    /// Directory of test annotations (e.g. manual_test)
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub sidecar: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GOLD_SCALE)]
    pub gold_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AngleModeArg {
    Sincos,
    Scalar,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub weights_out: PathBuf,
    /// Per-epoch loss log (defaults to `<weights-out>.log.csv`)
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    #[arg(long, value_enum, default_value_t = AngleModeArg::Sincos)]
    pub angle_mode: AngleModeArg,
    #[arg(long, default_value_t = DEFAULT_GOLD_SCALE)]
    pub gold_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Heuristic,
    Mlp,
    Hybrid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Mlp => "mlp",
            Method::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotationMetricArg {
    Circular,
    Square,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub rows_out: PathBuf,
    /// Summary file (defaults to `<rows-out>.summary`)
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GOLD_SCALE)]
    pub gold_scale: f64,
    #[arg(long, value_enum, default_value_t = RotationMetricArg::Circular)]
    pub rotation_metric: RotationMetricArg,
    /// Debug: score the gold ROI against itself
    #[arg(long)]
    pub gold_as_predictor: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub rows_a: PathBuf,
    #[arg(long)]
    pub rows_b: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Histogram output (defaults to `<report>.svg`)
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub sample_id: String,
    /// Methods to draw; may be repeated
    #[arg(long = "method", value_enum, default_values_t = [Method::Heuristic])]
    pub methods: Vec<Method>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GOLD_SCALE)]
    pub gold_scale: f64,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::EmptyDataset | Error::InvalidAspect(_) | Error::InvalidImage { .. } => 2,
            Error::Join(_)
            | Error::DuplicateId(_)
            | Error::Parse { .. }
            | Error::Weights(_)
            | Error::InvalidDataset(_)
            | Error::InvalidSample(_) => 3,
            Error::NotFound(_) => 4,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: msg.into(),
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult {
    let base = cli.data_dir.as_deref();
    match &cli.command {
        Command::Synth(a) => cmd_synth(base, a),
        Command::Ingest(a) => cmd_ingest(base, a),
        Command::Train(a) => cmd_train(base, a),
        Command::Eval(a) => cmd_eval(base, a),
        Command::Compare(a) => cmd_compare(base, a),
        Command::Render(a) => cmd_render(base, a),
    }
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

struct Manifest(String);

impl Manifest {
    fn new(command: &str) -> Self {
        let mut m = Manifest(String::new());
        m.set("command", command);
        m.set("version", env!("CARGO_PKG_VERSION"));
        m
    }

    fn set(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        writeln!(self.0, "{key}={value}").unwrap();
        self
    }

    fn path(&mut self, key: &str, value: &Path) -> &mut Self {
        self.set(key, value.display())
    }

    fn write_beside(&self, output: &Path) -> Result<()> {
        write_file(&with_suffix(output, ".manifest"), &self.0)
    }
}

fn record_stats(m: &mut Manifest, samples: &[Sample], gold_scale: f64) {
    let st = dataset_stats(samples, gold_scale);
    m.set("count.total", st.total)
        .set("count.train", st.train)
        .set("count.test", st.test)
        .set("count.left", st.left)
        .set("count.right", st.right);
}

pub fn cmd_synth(base: Option<&Path>, a: &SynthArgs) -> CliResult {
    let cfg = SynthConfig {
        n: a.n,
        seed: a.seed,
        noise_px: a.noise_px,
        max_tilt_deg: a.max_tilt_deg,
        rho_range: (a.rho_min, a.rho_max),
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let out = resolve(base, &a.out);
    let samples = synth_generate(&cfg)?;
    let (samples, degenerate) = filter_degenerate(samples, a.gold_scale);
    write_samples(&out, &samples)?;

    let mut m = Manifest::new("synth");
    m.path("out", &a.out)
        .set("n", cfg.n)
        .set("seed", cfg.seed)
        .set("noise_px", cfg.noise_px)
        .set("max_tilt_deg", cfg.max_tilt_deg)
        .set("rho_min", cfg.rho_range.0)
        .set("rho_max", cfg.rho_range.1)
        .set("gold_scale", a.gold_scale)
        .set("dropped.degenerate_gold", degenerate);
    record_stats(&mut m, &samples, a.gold_scale);
    m.write_beside(&out)?;
    Ok(())
}

pub fn cmd_ingest(base: Option<&Path>, a: &IngestArgs) -> CliResult {
    if a.train_labels.is_none() && a.test_labels.is_none() {
        return Err(usage("ingest needs --train-labels and/or --test-labels"));
    }
    let sidecar = resolve(base, &a.sidecar);
    if !sidecar.is_file() {
        return Err(usage(format!("sidecar {} not found", sidecar.display())));
    }
    let mut m = Manifest::new("ingest");
    let mut records = Vec::new();
    for (split, dir) in [
        (Split::Train, &a.train_labels),
        (Split::Test, &a.test_labels),
    ] {
        let Some(dir) = dir else { continue };
        let labels = parse_panoptic(&resolve(base, dir), split)?;
        for (path, why) in &labels.skipped {
            eprintln!("warning: skipped {}: {why}", path.display());
        }
        m.path(&format!("labels.{split}"), dir)
            .set(&format!("labels.{split}.parsed"), labels.records.len())
            .set(&format!("labels.{split}.malformed"), labels.skipped.len());
        records.extend(labels.records);
    }
    let merged = merge_pose_sidecar(&records, &sidecar)?;
    let (samples, degenerate) = filter_degenerate(merged.samples, a.gold_scale);
    let out = resolve(base, &a.out);
    write_samples(&out, &samples)?;

    m.path("sidecar", &a.sidecar)
        .path("out", &a.out)
        .set("gold_scale", a.gold_scale)
        .set("dropped.no_pose", merged.dropped_no_pose)
        .set("dropped.degenerate_gold", degenerate)
        .set("unmatched_pose_lines", merged.unmatched_pose);
    record_stats(&mut m, &samples, a.gold_scale);
    m.write_beside(&out)?;
    Ok(())
}

fn load_dataset(base: Option<&Path>, p: &Path) -> Result<Vec<Sample>> {
    read_samples(&resolve(base, p))
}

/// Feature vectors and gold targets for the samples of one split.
pub fn training_examples(
    samples: &[Sample],
    split: Split,
    gold_scale: f64,
) -> Result<Vec<RoiExample>> {
    samples
        .iter()
        .filter(|s| s.split == split)
        .map(|s| {
            let (w, h) = s.dims();
            Ok(RoiExample {
                features: featurize(&s.pose, s.rho())?,
                target: gold_roi(&s.hand, w, h, gold_scale)?,
            })
        })
        .collect()
}

pub fn cmd_train(base: Option<&Path>, a: &TrainArgs) -> CliResult {
    let cfg = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch_size,
        epochs: a.epochs,
        seed: a.seed,
        validation_fraction: a.val_fraction,
        optimizer: match a.optimizer {
            OptimizerArg::Sgd => Optimizer::Sgd,
            OptimizerArg::Adam => Optimizer::Adam,
        },
        angle_mode: match a.angle_mode {
            AngleModeArg::Sincos => AngleMode::SinCos,
            AngleModeArg::Scalar => AngleMode::Scalar,
        },
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let samples = load_dataset(base, &a.dataset)?;
    let examples = training_examples(&samples, Split::Train, a.gold_scale)?;
    let (predictor, log) = train_predictor(&examples, &cfg)?;

    let weights = resolve(base, &a.weights_out);
    save_weights(&predictor, &weights)?;
    let log_path = a
        .log
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| with_suffix(&weights, ".log.csv"));
    let mut text = String::from("head,epoch,train_loss,val_loss\n");
    for e in &log.epochs {
        writeln!(
            text,
            "{},{},{},{}",
            e.head, e.epoch, e.train_loss, e.val_loss
        )
        .unwrap();
    }
    write_file(&log_path, text)?;

    let mut m = Manifest::new("train");
    m.path("dataset", &a.dataset)
        .path("weights_out", &a.weights_out)
        .set("learning_rate", cfg.learning_rate)
        .set("batch_size", cfg.batch_size)
        .set("epochs", cfg.epochs)
        .set("seed", cfg.seed)
        .set("validation_fraction", cfg.validation_fraction)
        .set("optimizer", format!("{:?}", cfg.optimizer).to_lowercase())
        .set("angle_mode", format!("{:?}", cfg.angle_mode).to_lowercase())
        .set("gold_scale", a.gold_scale)
        .set("train_samples", log.train_count)
        .set("val_samples", log.val_count);
    for (head, epoch, loss) in &log.best {
        m.set(&format!("best.{head}.epoch"), epoch)
            .set(&format!("best.{head}.val_loss"), loss);
    }
    m.write_beside(&weights)?;
    Ok(())
}

fn require_weights(
    base: Option<&Path>,
    weights: &Option<PathBuf>,
    method: Method,
) -> CliResult<Option<RoiPredictor>> {
    match (method, weights) {
        (Method::Heuristic, _) => Ok(None),
        (_, None) => Err(usage(format!(
            "--weights is required for method {}",
            method.name()
        ))),
        (_, Some(p)) => Ok(Some(load_weights(&resolve(base, p))?)),
    }
}

/// Prediction of `method` for one sample.
pub fn predict_with(
    method: Method,
    predictor: Option<&RoiPredictor>,
    s: &Sample,
) -> Result<RotRect> {
    match method {
        Method::Heuristic => s.pose.heuristic_roi(s.rho()),
        Method::Mlp => Ok(predictor
            .expect("weights loaded")
            .predict(&featurize(&s.pose, s.rho())?)),
        Method::Hybrid => predictor
            .expect("weights loaded")
            .predict_hybrid(&s.pose, s.rho()),
    }
}

pub fn cmd_eval(base: Option<&Path>, a: &EvalArgs) -> CliResult {
    let predictor = if a.gold_as_predictor {
        None
    } else {
        require_weights(base, &a.weights, a.method)?
    };
    let samples: Vec<Sample> = load_dataset(base, &a.dataset)?
        .into_iter()
        .filter(|s| s.split == Split::Test)
        .collect();
    let opts = EvalOptions {
        gold_scale: a.gold_scale,
        rotation_metric: match a.rotation_metric {
            RotationMetricArg::Circular => RotationMetric::Circular,
            RotationMetricArg::Square => RotationMetric::Square,
        },
    };
    let (method_name, (rows, summary)) = if a.gold_as_predictor {
        let gold = |s: &Sample| {
            let (w, h) = s.dims();
            gold_roi(&s.hand, w, h, a.gold_scale)
        };
        ("gold", evaluate("gold", gold, &samples, &opts)?)
    } else {
        let m = a.method;
        let name = m.name();
        (
            name,
            evaluate(
                name,
                |s| predict_with(m, predictor.as_ref(), s),
                &samples,
                &opts,
            )?,
        )
    };

    let rows_out = resolve(base, &a.rows_out);
    write_rows_csv(&rows_out, &rows)?;
    let summary_out = a
        .summary_out
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| with_suffix(&rows_out, ".summary"));
    write_file(&summary_out, summary.to_text())?;

    let mut m = Manifest::new("eval");
    m.path("dataset", &a.dataset)
        .set("method", method_name)
        .set(
            "weights",
            a.weights
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        )
        .path("rows_out", &a.rows_out)
        .set("gold_scale", a.gold_scale)
        .set(
            "rotation_metric",
            format!("{:?}", opts.rotation_metric).to_lowercase(),
        )
        .set("split", Split::Test)
        .set("n", summary.n)
        .set("n_failed", summary.n_failed);
    m.write_beside(&rows_out)?;
    Ok(())
}

pub fn cmd_compare(base: Option<&Path>, a: &CompareArgs) -> CliResult {
    if a.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    let rows_a = read_rows_csv(&resolve(base, &a.rows_a))?;
    let rows_b = read_rows_csv(&resolve(base, &a.rows_b))?;
    let cmp = compare(&rows_a, &rows_b, a.bins)?;
    let report = resolve(base, &a.report);
    write_file(&report, cmp.to_text())?;
    let svg = a
        .svg
        .as_ref()
        .map(|p| resolve(base, p))
        .unwrap_or_else(|| with_suffix(&report, ".svg"));
    write_file(&svg, cmp.histogram_svg())?;

    let mut m = Manifest::new("compare");
    m.path("rows_a", &a.rows_a)
        .path("rows_b", &a.rows_b)
        .path("report", &a.report)
        .set("bins", a.bins);
    m.write_beside(&report)?;
    Ok(())
}

pub fn cmd_render(base: Option<&Path>, a: &RenderArgs) -> CliResult {
    let samples = load_dataset(base, &a.dataset)?;
    let sample = samples
        .iter()
        .find(|s| s.id == a.sample_id)
        .ok_or_else(|| Error::NotFound(a.sample_id.clone()))?;
    let needs_weights = a.methods.iter().any(|m| *m != Method::Heuristic);
    let predictor = if needs_weights {
        require_weights(base, &a.weights, Method::Mlp)?
    } else {
        None
    };
    let (w, h) = sample.dims();
    let gold = gold_roi(&sample.hand, w, h, a.gold_scale)?;
    let mut preds = Vec::new();
    for &m in &a.methods {
        match predict_with(m, predictor.as_ref(), sample) {
            Ok(r) => preds.push((m.name().to_string(), r)),
            Err(Error::DegenerateHand(_) | Error::DegenerateGeometry(_)) => {
                preds.push((m.name().to_string(), RotRect::new(gold.center, 0.0, 0.0)))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (svg, skipped) = render_svg(sample.width, sample.height, &sample.hand, &gold, &preds)?;
    for label in &skipped {
        eprintln!("warning: {label} prediction is degenerate; drawing gold box only");
    }
    let out = resolve(base, &a.out);
    write_file(&out, svg)?;

    let mut m = Manifest::new("render");
    m.path("dataset", &a.dataset)
        .set("sample_id", &a.sample_id)
        .set(
            "methods",
            a.methods
                .iter()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(","),
        )
        .set("gold_scale", a.gold_scale)
        .set("skipped", skipped.join(","));
    m.write_beside(&out)?;
    Ok(())
}
