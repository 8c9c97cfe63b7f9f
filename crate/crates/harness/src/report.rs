//! Turns result records into figures: one SVG per (paradigm, metric) with a
//! panel per learner and a line per resampler, a companion CSV of plotted
//! points per figure, and a best-combination table per paradigm.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::runner::{ResultRecord, METRIC_NAMES};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no records to report on")]
    NoData,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Whether a larger mean is better for the named metric; `None` for metrics
/// this crate does not know, which are plotted but excluded from the best
/// tables.
pub fn higher_is_better(metric: &str) -> Option<bool> {
    match metric {
        "risk" | "type1" | "type2" | "cost" => Some(false),
        "f0" | "f1" | "roc_auc" | "pr_auc0" | "pr_auc1" => Some(true),
        _ => None,
    }
}

fn line_color(resampler: &str) -> &'static str {
    match resampler {
        "original" => "#1f77b4",
        "under" => "#ff7f0e",
        "smote" => "#2ca02c",
        "hybrid" => "#d62728",
        _ => "#7f7f7f",
    }
}

fn learner_rank(tag: &str) -> usize {
    ["lr", "nn", "rf", "svm", "gbt"].iter().position(|t| *t == tag).unwrap_or(usize::MAX)
}

fn resampler_rank(tag: &str) -> usize {
    ["original", "under", "smote", "hybrid"].iter().position(|t| *t == tag).unwrap_or(usize::MAX)
}

fn metric_rank(name: &str) -> usize {
    METRIC_NAMES.iter().position(|m| *m == name).unwrap_or(usize::MAX)
}

fn sorted_by_rank(tags: BTreeSet<String>, rank: fn(&str) -> usize) -> Vec<String> {
    let mut out: Vec<String> = tags.into_iter().collect();
    out.sort_by(|a, b| rank(a).cmp(&rank(b)).then(a.cmp(b)));
    out
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.1e}");
    }
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn from_values(values: impl Iterator<Item = f64>, floor_at_zero: bool) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values.filter(|v| v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        let mut pad = (hi - lo) * 0.08;
        if pad == 0.0 {
            pad = lo.abs().max(1.0) * 0.1;
        }
        let padded_lo = if floor_at_zero && lo >= 0.0 { (lo - pad).max(0.0) } else { lo - pad };
        Axis { lo: padded_lo, hi: hi + pad }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

const COLS: usize = 3;
const PANEL_W: f64 = 290.0;
const PANEL_H: f64 = 225.0;
const GUTTER: f64 = 18.0;
const TITLE_H: f64 = 42.0;
const MARGIN: f64 = 12.0;
const PLOT_L: f64 = 48.0;
const PLOT_R: f64 = 10.0;
const PLOT_T: f64 = 24.0;
const PLOT_B: f64 = 36.0;

struct Panel {
    x0: f64,
    y0: f64,
}

impl Panel {
    fn plot_origin(&self) -> (f64, f64) {
        (self.x0 + PLOT_L, self.y0 + PLOT_T)
    }

    fn plot_size() -> (f64, f64) {
        (PANEL_W - PLOT_L - PLOT_R, PANEL_H - PLOT_T - PLOT_B)
    }

    fn px(&self, x_axis: &Axis, v: f64) -> f64 {
        let (ox, _) = self.plot_origin();
        ox + x_axis.frac(v) * Self::plot_size().0
    }

    fn py(&self, y_axis: &Axis, v: f64) -> f64 {
        let (_, oy) = self.plot_origin();
        oy + (1.0 - y_axis.frac(v)) * Self::plot_size().1
    }
}

#[derive(Serialize)]
struct PlotPoint<'a> {
    learner: &'a str,
    resampler: &'a str,
    ir: f64,
    mean: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct BestRow<'a> {
    metric: &'a str,
    ir: f64,
    resampler: &'a str,
    learner: &'a str,
    mean: f64,
    stderr: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ReportError + '_ {
    move |source| ReportError::Csv { path: path.display().to_string(), source }
}

fn render_figure(
    paradigm: &str,
    metric: &str,
    records: &[&ResultRecord],
    learners: &[String],
    resamplers: &[String],
) -> String {
    let slots = learners.len() + 1;
    let rows = slots.div_ceil(COLS);
    let width = MARGIN * 2.0 + COLS as f64 * PANEL_W + (COLS as f64 - 1.0) * GUTTER;
    let height = TITLE_H + rows as f64 * PANEL_H + (rows as f64 - 1.0) * GUTTER + MARGIN;

    let x_axis = Axis::from_values(records.iter().map(|r| r.ir.log2()), false);
    let y_axis = Axis::from_values(records.iter().map(|r| r.mean), true);

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">
<rect width="{width}" height="{height}" fill="white"/>
<text x="{MARGIN}" y="26" font-size="16">{} paradigm, {} (mean over repetitions)</text>
"#,
        esc(paradigm),
        esc(metric),
    );

    for (slot, learner) in learners.iter().enumerate() {
        let panel = Panel {
            x0: MARGIN + (slot % COLS) as f64 * (PANEL_W + GUTTER),
            y0: TITLE_H + (slot / COLS) as f64 * (PANEL_H + GUTTER),
        };
        let (ox, oy) = panel.plot_origin();
        let (pw, ph) = Panel::plot_size();
        let _ = write!(
            svg,
            r##"<rect x="{ox}" y="{oy}" width="{pw}" height="{ph}" fill="none" stroke="#888888"/>
<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>
"##,
            ox + pw / 2.0,
            oy - 8.0,
            esc(learner),
        );

        let x_lo_tick = x_axis.lo.ceil() as i64;
        let x_hi_tick = x_axis.hi.floor() as i64;
        let step = if x_hi_tick - x_lo_tick > 8 { 2 } else { 1 };
        let mut t = x_lo_tick;
        while t <= x_hi_tick {
            let x = panel.px(&x_axis, t as f64);
            let _ = write!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888888"/>
<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{t}</text>
"##,
                oy + ph,
                oy + ph + 4.0,
                oy + ph + 15.0,
            );
            t += step;
        }
        let _ = write!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">log2(ir)</text>
"#,
            ox + pw / 2.0,
            oy + ph + 29.0,
        );

        for i in 0..5 {
            let v = y_axis.lo + (y_axis.hi - y_axis.lo) * i as f64 / 4.0;
            let y = panel.py(&y_axis, v);
            let _ = write!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{ox}" y2="{y:.2}" stroke="#888888"/>
<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>
"##,
                ox - 4.0,
                ox - 6.0,
                y + 3.5,
                fmt_num(v),
            );
        }

        for resampler in resamplers {
            let mut points: Vec<(f64, f64)> = records
                .iter()
                .filter(|r| &r.learner == learner && &r.resampler == resampler && r.mean.is_finite())
                .map(|r| (r.ir.log2(), r.mean))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            if points.is_empty() {
                continue;
            }
            let color = line_color(resampler);
            let coords: Vec<String> = points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", panel.px(&x_axis, *x), panel.py(&y_axis, *y)))
                .collect();
            let _ = write!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>
"#,
                coords.join(" "),
            );
            for (x, y) in &points {
                let _ = write!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{color}"/>
"#,
                    panel.px(&x_axis, *x),
                    panel.py(&y_axis, *y),
                );
            }
        }
    }

    let legend_slot = learners.len();
    let lx = MARGIN + (legend_slot % COLS) as f64 * (PANEL_W + GUTTER) + PLOT_L;
    let ly = TITLE_H + (legend_slot / COLS) as f64 * (PANEL_H + GUTTER) + PLOT_T + 10.0;
    for (i, resampler) in resamplers.iter().enumerate() {
        let y = ly + i as f64 * 20.0;
        let color = line_color(resampler);
        let _ = write!(
            svg,
            r#"<line x1="{lx}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>
<circle cx="{:.2}" cy="{y:.2}" r="2.2" fill="{color}"/>
<text x="{:.2}" y="{:.2}" font-size="12">{}</text>
"#,
            lx + 30.0,
            lx + 15.0,
            lx + 38.0,
            y + 4.0,
            esc(resampler),
        );
    }

    svg.push_str("</svg>\n");
    svg
}

fn write_best_table(records: &[&ResultRecord], path: &Path) -> Result<bool, ReportError> {
    let metrics = sorted_by_rank(
        records.iter().filter(|r| higher_is_better(&r.metric).is_some()).map(|r| r.metric.clone()).collect(),
        metric_rank,
    );
    if metrics.is_empty() {
        return Ok(false);
    }
    let mut irs: Vec<f64> = Vec::new();
    for r in records {
        if !irs.contains(&r.ir) {
            irs.push(r.ir);
        }
    }
    irs.sort_by(f64::total_cmp);

    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for metric in &metrics {
        let maximize = higher_is_better(metric).expect("filtered to known metrics");
        for &ir in &irs {
            let mut candidates: Vec<&&ResultRecord> = records
                .iter()
                .filter(|r| &r.metric == metric && r.ir == ir && r.mean.is_finite())
                .collect();
            candidates.sort_by(|a, b| {
                resampler_rank(&a.resampler)
                    .cmp(&resampler_rank(&b.resampler))
                    .then(a.resampler.cmp(&b.resampler))
                    .then(learner_rank(&a.learner).cmp(&learner_rank(&b.learner)))
                    .then(a.learner.cmp(&b.learner))
            });
            let mut best: Option<&&ResultRecord> = None;
            for candidate in &candidates {
                let better = match best {
                    None => true,
                    Some(b) => {
                        if maximize {
                            candidate.mean > b.mean
                        } else {
                            candidate.mean < b.mean
                        }
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
            if let Some(b) = best {
                writer
                    .serialize(BestRow {
                        metric,
                        ir,
                        resampler: &b.resampler,
                        learner: &b.learner,
                        mean: b.mean,
                        stderr: b.stderr,
                    })
                    .map_err(csv_err(path))?;
            }
        }
    }
    writer.flush().map_err(io_err(path))?;
    Ok(true)
}

/// Renders every figure, companion CSV and best-combination table into
/// `out_dir` and returns the written paths.
pub fn render_report(records: &[ResultRecord], out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::NoData);
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut groups: BTreeSet<(String, String)> = BTreeSet::new();
    let mut paradigms: BTreeSet<String> = BTreeSet::new();
    for r in records {
        groups.insert((r.paradigm.clone(), r.metric.clone()));
        paradigms.insert(r.paradigm.clone());
    }

    let mut written = Vec::new();
    for (paradigm, metric) in &groups {
        let group: Vec<&ResultRecord> =
            records.iter().filter(|r| &r.paradigm == paradigm && &r.metric == metric).collect();
        let learners =
            sorted_by_rank(group.iter().map(|r| r.learner.clone()).collect(), learner_rank);
        let resamplers =
            sorted_by_rank(group.iter().map(|r| r.resampler.clone()).collect(), resampler_rank);

        let svg = render_figure(paradigm, metric, &group, &learners, &resamplers);
        let svg_path = out_dir.join(format!("fig_{paradigm}_{metric}.svg"));
        std::fs::write(&svg_path, svg).map_err(io_err(&svg_path))?;
        written.push(svg_path);

        let csv_path = out_dir.join(format!("fig_{paradigm}_{metric}.csv"));
        let mut writer = csv::Writer::from_path(&csv_path).map_err(csv_err(&csv_path))?;
        let mut points: Vec<&&ResultRecord> = group.iter().collect();
        points.sort_by(|a, b| {
            learner_rank(&a.learner)
                .cmp(&learner_rank(&b.learner))
                .then(a.learner.cmp(&b.learner))
                .then(resampler_rank(&a.resampler).cmp(&resampler_rank(&b.resampler)))
                .then(a.resampler.cmp(&b.resampler))
                .then(a.ir.total_cmp(&b.ir))
        });
        for r in points {
            writer
                .serialize(PlotPoint {
                    learner: &r.learner,
                    resampler: &r.resampler,
                    ir: r.ir,
                    mean: r.mean,
                    stderr: r.stderr,
                })
                .map_err(csv_err(&csv_path))?;
        }
        writer.flush().map_err(io_err(&csv_path))?;
        written.push(csv_path);
    }

    for paradigm in &paradigms {
        let group: Vec<&ResultRecord> = records.iter().filter(|r| &r.paradigm == paradigm).collect();
        let path = out_dir.join(format!("best_{paradigm}.csv"));
        if write_best_table(&group, &path)? {
            written.push(path);
        }
    }
    Ok(written)
}
