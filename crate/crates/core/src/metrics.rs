//! Per-sample ROI metrics, summaries, win rate and IoU histograms.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::geometry::{circular_diff_deg, rotated_iou, RotRect};
use crate::heuristic::gold_roi;

/// Center distance in percent, with x measured in image widths and y in
/// image heights.
pub fn center_error(pred: &RotRect, gold: &RotRect) -> f64 {
    100.0 * (pred.center - gold.center).norm()
}

pub fn scale_error(pred: &RotRect, gold: &RotRect) -> Result<f64> {
    if gold.size == 0.0 {
        return Err(Error::DegenerateGold);
    }
    Ok(100.0 * (pred.size - gold.size).abs() / gold.size)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationMetric {
    /// Difference on the full circle, in `[0, 180]`.
    #[default]
    Circular,
    /// Difference modulo the square's 90 degree symmetry, in `[0, 45]`.
    Square,
}

pub fn rotation_error(pred: &RotRect, gold: &RotRect) -> f64 {
    circular_diff_deg(pred.rotation, gold.rotation)
}

fn rotation_error_with(metric: RotationMetric, pred: &RotRect, gold: &RotRect) -> f64 {
    match metric {
        RotationMetric::Circular => rotation_error(pred, gold),
        RotationMetric::Square => {
            let d = (pred.rotation - gold.rotation).rem_euclid(90.0);
            d.min(90.0 - d).max(0.0)
        }
    }
}

/// One evaluated sample. Error columns are `None` when the predictor failed
/// on the sample; its IoU is then 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub sample_id: String,
    pub method: String,
    pub iou: f64,
    pub center_err_pct: Option<f64>,
    pub scale_err_pct: Option<f64>,
    pub rot_err_deg: Option<f64>,
}

impl EvalRow {
    pub fn failed(&self) -> bool {
        self.center_err_pct.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSummary {
    pub n: usize,
    pub n_failed: usize,
    pub mean_iou: f64,
    pub mean_center_err: f64,
    pub mean_scale_err: f64,
    pub mean_rot_err: f64,
    pub min_iou: f64,
}

impl MetricsSummary {
    pub fn from_rows(rows: &[EvalRow]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mean = |v: Vec<f64>| {
            if v.is_empty() {
                f64::NAN
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        let ok: Vec<&EvalRow> = rows.iter().filter(|r| !r.failed()).collect();
        Ok(MetricsSummary {
            n: rows.len(),
            n_failed: rows.len() - ok.len(),
            mean_iou: mean(rows.iter().map(|r| r.iou).collect()),
            mean_center_err: mean(ok.iter().filter_map(|r| r.center_err_pct).collect()),
            mean_scale_err: mean(ok.iter().filter_map(|r| r.scale_err_pct).collect()),
            mean_rot_err: mean(ok.iter().filter_map(|r| r.rot_err_deg).collect()),
            min_iou: rows.iter().map(|r| r.iou).fold(f64::INFINITY, f64::min),
        })
    }

    /// Flat `key=value` lines, in a fixed key order.
    pub fn to_text(&self) -> String {
        format!(
            "mean_iou={}\nmean_center_err={}\nmean_scale_err={}\nmean_rot_err={}\nmin_iou={}\nn={}\n",
            self.mean_iou,
            self.mean_center_err,
            self.mean_scale_err,
            self.mean_rot_err,
            self.min_iou,
            self.n
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub gold_scale: f64,
    pub rotation_metric: RotationMetric,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            gold_scale: crate::heuristic::DEFAULT_GOLD_SCALE,
            rotation_metric: RotationMetric::Circular,
        }
    }
}

/// Scores one prediction against its gold ROI.
pub fn score(
    sample: &Sample,
    method: &str,
    pred: Result<RotRect>,
    opts: &EvalOptions,
) -> Result<EvalRow> {
    let (w, h) = sample.dims();
    let gold = gold_roi(&sample.hand, w, h, opts.gold_scale)?;
    let row = match pred {
        Ok(pred) => EvalRow {
            sample_id: sample.id.clone(),
            method: method.to_string(),
            iou: if pred.size > 0.0 {
                rotated_iou(&pred, &gold, w, h)?
            } else {
                0.0
            },
            center_err_pct: Some(center_error(&pred, &gold)),
            scale_err_pct: Some(scale_error(&pred, &gold)?),
            rot_err_deg: Some(rotation_error_with(opts.rotation_metric, &pred, &gold)),
        },
        Err(Error::DegenerateHand(_) | Error::DegenerateGeometry(_)) => EvalRow {
            sample_id: sample.id.clone(),
            method: method.to_string(),
            iou: 0.0,
            center_err_pct: None,
            scale_err_pct: None,
            rot_err_deg: None,
        },
        Err(e) => return Err(e),
    };
    Ok(row)
}

/// Runs `predict` on every sample, in order.
///
/// Degenerate predictions score IoU 0 and are left out of the error means.
pub fn evaluate<F>(
    method: &str,
    predict: F,
    samples: &[Sample],
    opts: &EvalOptions,
) -> Result<(Vec<EvalRow>, MetricsSummary)>
where
    F: Fn(&Sample) -> Result<RotRect>,
{
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows = samples
        .iter()
        .map(|s| score(s, method, predict(s), opts))
        .collect::<Result<Vec<_>>>()?;
    let summary = MetricsSummary::from_rows(&rows)?;
    Ok((rows, summary))
}

/// Fraction of samples on which `a` has strictly higher IoU than `b`.
pub fn win_rate(a: &[EvalRow], b: &[EvalRow]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Join(format!("{} rows vs {} rows", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let by_id: HashMap<&str, f64> = b.iter().map(|r| (r.sample_id.as_str(), r.iou)).collect();
    if by_id.len() != b.len() {
        return Err(Error::Join("duplicate sample ids".into()));
    }
    let mut wins = 0usize;
    for r in a {
        let other = by_id
            .get(r.sample_id.as_str())
            .ok_or_else(|| Error::Join(format!("sample {:?} missing", r.sample_id)))?;
        if r.iou > *other {
            wins += 1;
        }
    }
    Ok(wins as f64 / a.len() as f64)
}

/// Equal-width bin counts over `[0, 1]`; the last bin includes 1.
pub fn iou_histogram(ious: impl IntoIterator<Item = f64>, bins: usize) -> Vec<usize> {
    let bins = bins.max(1);
    let mut counts = vec![0; bins];
    for v in ious {
        let i = ((v.clamp(0.0, 1.0) * bins as f64).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
}

const CSV_HEADER: [&str; 6] = [
    "sample_id",
    "method",
    "iou",
    "center_err_pct",
    "scale_err_pct",
    "rot_err_deg",
];

/// Columns: `sample_id,method,iou,center_err_pct,scale_err_pct,rot_err_deg`.
/// Failed predictions leave the three error columns empty.
pub fn write_rows_csv(path: &Path, rows: &[EvalRow]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(CSV_HEADER).expect("in-memory write");
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in rows {
            w.write_record([
                r.sample_id.clone(),
                r.method.clone(),
                r.iou.to_string(),
                opt(r.center_err_pct),
                opt(r.scale_err_pct),
                opt(r.rot_err_deg),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_rows_csv(path: &Path) -> Result<Vec<EvalRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!("{other:?}"),
        },
    })?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let header = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(parse_err(1, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let num = |k: usize| -> Result<Option<f64>> {
            let s = &rec[k];
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| {
                parse_err(
                    line,
                    format!("bad number {s:?} in column {}", CSV_HEADER[k]),
                )
            })
        };
        rows.push(EvalRow {
            sample_id: rec[0].to_string(),
            method: rec[1].to_string(),
            iou: num(2)?.ok_or_else(|| parse_err(line, "missing iou".into()))?,
            center_err_pct: num(3)?,
            scale_err_pct: num(4)?,
            rot_err_deg: num(5)?,
        });
    }
    Ok(rows)
}
