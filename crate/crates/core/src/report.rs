//! Text reports and hand-written SVG output.

use std::fmt::Write;

use crate::error::Result;
use crate::geometry::{rect_to_quad, Quad, RotRect};
use crate::heuristic::Hand21;
use crate::metrics::{iou_histogram, win_rate, EvalRow, MetricsSummary};

/// Reference results from the original real-data study, listed beside the
/// measured values in comparison reports.
pub const REFERENCE_TABLE: [(&str, [f64; 4]); 2] = [
    ("original", [57.0, 2.51, 30.37, 32.08]),
    ("mlp", [63.0, 2.15, 17.91, 56.96]),
];
pub const REFERENCE_COLUMNS: [&str; 4] =
    ["iou_pct", "center_err_pct", "scale_err_pct", "rot_err_deg"];

fn method_of(rows: &[EvalRow], fallback: &str) -> String {
    rows.first()
        .map(|r| r.method.clone())
        .unwrap_or_else(|| fallback.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub method_a: String,
    pub method_b: String,
    pub summary_a: MetricsSummary,
    pub summary_b: MetricsSummary,
    pub win_rate_a: f64,
    pub win_rate_b: f64,
    pub hist_a: Vec<usize>,
    pub hist_b: Vec<usize>,
}

pub fn compare(a: &[EvalRow], b: &[EvalRow], bins: usize) -> Result<Comparison> {
    let win_rate_a = win_rate(a, b)?;
    let win_rate_b = win_rate(b, a)?;
    Ok(Comparison {
        method_a: method_of(a, "a"),
        method_b: method_of(b, "b"),
        summary_a: MetricsSummary::from_rows(a)?,
        summary_b: MetricsSummary::from_rows(b)?,
        win_rate_a,
        win_rate_b,
        hist_a: iou_histogram(a.iter().map(|r| r.iou), bins),
        hist_b: iou_histogram(b.iter().map(|r| r.iou), bins),
    })
}

impl Comparison {
    /// Flat `key=value` report.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |h: &[usize]| {
            h.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(s, "method.a={}", self.method_a).unwrap();
        writeln!(s, "method.b={}", self.method_b).unwrap();
        writeln!(s, "win_rate.a_over_b={}", self.win_rate_a).unwrap();
        writeln!(s, "win_rate.b_over_a={}", self.win_rate_b).unwrap();
        for (tag, sum) in [("a", &self.summary_a), ("b", &self.summary_b)] {
            for line in sum.to_text().lines() {
                writeln!(s, "{tag}.{line}").unwrap();
            }
            writeln!(s, "{tag}.n_failed={}", sum.n_failed).unwrap();
        }
        writeln!(
            s,
            "min_iou_pct={} {:.1} vs {} {:.1}",
            self.method_a,
            100.0 * self.summary_a.min_iou,
            self.method_b,
            100.0 * self.summary_b.min_iou
        )
        .unwrap();
        writeln!(s, "histogram.bins={}", self.hist_a.len()).unwrap();
        writeln!(s, "histogram.a={}", join(&self.hist_a)).unwrap();
        writeln!(s, "histogram.b={}", join(&self.hist_b)).unwrap();
        for (name, cells) in REFERENCE_TABLE {
            for (col, v) in REFERENCE_COLUMNS.iter().zip(cells) {
                writeln!(s, "reference.{name}.{col}={v}").unwrap();
            }
        }
        s
    }

    pub fn histogram_svg(&self) -> String {
        histogram_svg(
            &[
                (self.method_a.as_str(), &self.hist_a),
                (self.method_b.as_str(), &self.hist_b),
            ],
            "IoU",
        )
    }
}

const SERIES_COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

/// Overlaid bar histogram over `[0, 1]`, one series per entry.
pub fn histogram_svg(series: &[(&str, &Vec<usize>)], x_label: &str) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (56.0, 16.0, 36.0, 48.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let bins = series
        .iter()
        .map(|(_, c)| c.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let max_count = series
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);
    let bar_w = plot_w / bins as f64;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();

    for (k, (name, counts)) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        writeln!(
            s,
            r#"<g class="series" data-name="{}" fill="{color}" fill-opacity="0.5">"#,
            escape(name)
        )
        .unwrap();
        for (i, &c) in counts.iter().enumerate() {
            let bh = plot_h * c as f64 / max_count as f64;
            writeln!(
                s,
                r#"<rect class="bar" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" data-count="{c}"/>"#,
                left + i as f64 * bar_w,
                top + plot_h - bh,
                bar_w,
                bh
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
        let ly = 14.0 + 14.0 * k as f64;
        writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}" fill-opacity="0.5"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            w - right - 120.0,
            ly - 9.0,
            w - right - 105.0,
            ly,
            escape(name)
        )
        .unwrap();
    }

    // axes
    writeln!(
        s,
        r#"<path d="M{left} {top} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        top + plot_h,
        left + plot_w
    )
    .unwrap();
    for t in 0..=10 {
        let x = left + plot_w * t as f64 / 10.0;
        writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{:.1}</text>"#,
            top + plot_h,
            top + plot_h + 4.0,
            top + plot_h + 16.0,
            t as f64 / 10.0
        )
        .unwrap();
    }
    for t in 0..=4 {
        let y = top + plot_h - plot_h * t as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.0}</text>"#,
            left - 6.0,
            y + 4.0,
            max_count as f64 * t as f64 / 4.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        h - 10.0,
        escape(x_label)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn quad_points(q: &Quad) -> String {
    q.corners
        .iter()
        .map(|c| format!("{:.2},{:.2}", c.x, c.y))
        .collect::<Vec<_>>()
        .join(" ")
}

fn box_svg(s: &mut String, q: &Quad, kind: &str, label: &str, color: &str) {
    writeln!(
        s,
        r#"<polygon class="roi {kind}" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
        escape(label),
        quad_points(q)
    )
    .unwrap();
    // corners 2 and 3 span the bottom edge of the box frame
    let (a, b) = (q.corners[2], q.corners[3]);
    writeln!(
        s,
        r##"<line class="orientation" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#1f3fff" stroke-width="3"/>"##,
        a.x, a.y, b.x, b.y
    )
    .unwrap();
}

/// Schematic overlay of the gold ROI (green) and predictions (red shades)
/// on an empty canvas of the image size. Predictions with zero size are
/// skipped; their labels are returned.
pub fn render_svg(
    width: u32,
    height: u32,
    hand: &Hand21,
    gold: &RotRect,
    predictions: &[(String, RotRect)],
) -> Result<(String, Vec<String>)> {
    let (w, h) = (width as f64, height as f64);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect width="{width}" height="{height}" fill="#f4f4f4"/>"##
    )
    .unwrap();
    for p in hand.positions() {
        writeln!(
            s,
            r##"<circle class="landmark" cx="{:.2}" cy="{:.2}" r="2" fill="#2a9d2a"/>"##,
            p.x, p.y
        )
        .unwrap();
    }
    box_svg(
        &mut s,
        &rect_to_quad(gold, w, h)?,
        "gold",
        "gold",
        "#00a000",
    );
    let reds = ["#e00000", "#ff7f0e", "#9467bd"];
    let mut skipped = Vec::new();
    for (i, (label, r)) in predictions.iter().enumerate() {
        if r.size <= 0.0 {
            skipped.push(label.clone());
            continue;
        }
        box_svg(
            &mut s,
            &rect_to_quad(r, w, h)?,
            "pred",
            label,
            reds[i % reds.len()],
        );
    }
    s.push_str("</svg>\n");
    Ok((s, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::heuristic::Landmark;

    fn rows(m: &str, ious: &[f64]) -> Vec<EvalRow> {
        ious.iter()
            .enumerate()
            .map(|(i, &iou)| EvalRow {
                sample_id: i.to_string(),
                method: m.into(),
                iou,
                center_err_pct: Some(1.0),
                scale_err_pct: Some(1.0),
                rot_err_deg: Some(1.0),
            })
            .collect()
    }

    #[test]
    fn self_comparison() {
        let a = rows("heuristic", &[0.1, 0.5, 0.9, 1.0]);
        let c = compare(&a, &a, 20).unwrap();
        assert_eq!((c.win_rate_a, c.win_rate_b), (0.0, 0.0));
        assert_eq!(c.hist_a.iter().sum::<usize>(), 4);
        assert_eq!(c.hist_b.iter().sum::<usize>(), 4);
        let text = c.to_text();
        assert!(text.contains("win_rate.a_over_b=0\n"));
        assert!(text.contains("reference.original.iou_pct=57\n"));
        assert!(text.contains("reference.mlp.rot_err_deg=56.96\n"));
        let svg = c.histogram_svg();
        assert_eq!(svg.matches(r#"class="bar""#).count(), 40);
        assert_eq!(svg, compare(&a, &a, 20).unwrap().histogram_svg());
    }

    #[test]
    fn render_counts_elements() {
        let mut pts = [Landmark::default(); 21];
        for (i, p) in pts.iter_mut().enumerate() {
            *p = Landmark {
                x: 50.0 + i as f64,
                y: 60.0 - i as f64,
                confidence: 1.0,
            };
        }
        let hand = Hand21 { points: pts };
        let gold = RotRect::new(Vec2::new(0.5, 0.5), 0.3, 10.0);
        let pred = RotRect::new(Vec2::new(0.45, 0.5), 0.35, 0.0);
        let (svg, skipped) =
            render_svg(200, 100, &hand, &gold, &[("heuristic".into(), pred)]).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert_eq!(svg.matches(r#"class="orientation""#).count(), 2);

        let zero = RotRect::new(Vec2::new(0.45, 0.5), 0.0, 0.0);
        let (svg, skipped) = render_svg(200, 100, &hand, &gold, &[("mlp".into(), zero)]).unwrap();
        assert_eq!(skipped, ["mlp"]);
        assert_eq!(svg.matches("<polygon").count(), 1);
    }
}
