//! Comparative reporting across approaches: mean metrics, ratios against a
//! baseline, and cumulative-energy chart data rendered as CSV and SVG.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::output::{read_events, read_metrics, read_summary, RunArtifacts, SummaryRow};
use crate::harness::{MetricsRow, RunResult};
use crate::knowledge::{EventKind, EventLog};

/// Approach used as the ratio denominator when it is among the inputs.
pub const DEFAULT_BASELINE: &str = "recurrent-prt";

/// One repetition as needed for reporting.
#[derive(Debug, Clone)]
pub struct RepetitionData {
    pub summary: SummaryRow,
    pub metrics: Vec<MetricsRow>,
    pub events: EventLog,
}

impl From<&RunResult> for RepetitionData {
    fn from(r: &RunResult) -> Self {
        Self {
            summary: SummaryRow::from(r),
            metrics: r.per_interval.clone(),
            events: r.events.clone(),
        }
    }
}

impl RepetitionData {
    /// Energy charged per interval: inference plus whatever the events attribute to it.
    pub fn interval_energy(&self) -> Vec<f64> {
        let mut energy: Vec<f64> = self.metrics.iter().map(|m| m.metrics.e_i).collect();
        for e in self.events.events() {
            if let Some(slot) = energy.get_mut(e.interval) {
                *slot += e.loop_energy;
            }
        }
        energy
    }

    pub fn cumulative_energy(&self) -> Vec<f64> {
        self.interval_energy()
            .into_iter()
            .scan(0.0, |acc, e| {
                *acc += e;
                Some(*acc)
            })
            .collect()
    }

    /// Loop overhead, i.e. energy attributed to threshold-update events.
    pub fn loop_energy(&self) -> f64 {
        self.events
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::ThresholdUpdate)
            .fold(0.0, |acc, e| acc + e.loop_energy)
    }
}

/// All repetitions of one approach.
#[derive(Debug, Clone)]
pub struct ResultSet {
    pub approach: String,
    pub reps: Vec<RepetitionData>,
}

impl ResultSet {
    pub fn from_results(results: &[RunResult]) -> Self {
        Self {
            approach: results
                .first()
                .map(|r| r.approach.name().to_string())
                .unwrap_or_default(),
            reps: results.iter().map(RepetitionData::from).collect(),
        }
    }

    /// Loads `<dir>/<approach>_summary.csv` and the per-repetition files next to it.
    pub fn load(summary_path: &Path) -> Result<Self> {
        let art = RunArtifacts::from_summary_path(summary_path)?;
        let rows = read_summary(summary_path)?;
        let reps = rows
            .into_iter()
            .map(|summary| {
                Ok(RepetitionData {
                    metrics: read_metrics(&art.metrics(summary.rep))?,
                    events: read_events(&art.events(summary.rep))?,
                    summary,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            approach: art.approach,
            reps,
        })
    }

    pub fn seeds(&self) -> BTreeSet<u64> {
        self.reps.iter().map(|r| r.summary.seed).collect()
    }

    fn mean(&self, f: impl Fn(&RepetitionData) -> f64) -> f64 {
        self.reps.iter().map(f).sum::<f64>() / self.reps.len().max(1) as f64
    }

    /// Mean cumulative energy per interval across repetitions.
    pub fn mean_cumulative_energy(&self) -> Vec<f64> {
        let curves: Vec<Vec<f64>> = self.reps.iter().map(|r| r.cumulative_energy()).collect();
        let len = curves.iter().map(Vec::len).min().unwrap_or(0);
        (0..len)
            .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64)
            .collect()
    }

    /// `e_i / e_bar_i` from the first interval with positive energy.
    fn e_max_train(&self) -> Option<f64> {
        self.reps
            .iter()
            .flat_map(|r| &r.metrics)
            .find(|m| m.metrics.e_bar_i > 0.0)
            .map(|m| m.metrics.e_i / m.metrics.e_bar_i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproachSummary {
    pub approach: String,
    pub reps: usize,
    pub mean_energy: f64,
    pub mean_r2: f64,
    pub mean_mse: f64,
    pub mean_adaptations: f64,
    pub loop_energy_share: f64,
    /// Mean energy over the baseline's mean energy.
    pub energy_ratio: f64,
    /// Mean R² over the baseline's mean R².
    pub r2_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub baseline: String,
    pub rows: Vec<ApproachSummary>,
}

impl ComparisonReport {
    pub fn row(&self, approach: &str) -> Option<&ApproachSummary> {
        self.rows.iter().find(|r| r.approach == approach)
    }
}

/// Requires at least two result sets sharing one seed set.
pub fn compare(sets: &[ResultSet]) -> Result<ComparisonReport> {
    if sets.len() < 2 {
        return Err(Error::Plan("comparison needs at least two result sets".into()));
    }
    let seeds = sets[0].seeds();
    if sets.iter().any(|s| s.seeds() != seeds) {
        return Err(Error::SeedMismatch);
    }
    let base = sets
        .iter()
        .find(|s| s.approach == DEFAULT_BASELINE)
        .unwrap_or(&sets[0]);
    let base_energy = base.mean(|r| r.summary.total_energy);
    let base_r2 = base.mean(|r| r.summary.r2);

    let rows = sets
        .iter()
        .map(|s| {
            let mean_energy = s.mean(|r| r.summary.total_energy);
            let mean_r2 = s.mean(|r| r.summary.r2);
            let loop_energy = s.mean(|r| r.loop_energy());
            ApproachSummary {
                approach: s.approach.clone(),
                reps: s.reps.len(),
                mean_energy,
                mean_r2,
                mean_mse: s.mean(|r| r.summary.mse),
                mean_adaptations: s.mean(|r| r.summary.n_adaptations as f64),
                loop_energy_share: if mean_energy > 0.0 { loop_energy / mean_energy } else { 0.0 },
                energy_ratio: mean_energy / base_energy,
                r2_ratio: mean_r2 / base_r2,
            }
        })
        .collect();
    Ok(ComparisonReport {
        baseline: base.approach.clone(),
        rows,
    })
}

pub const REPORT_HEADER: [&str; 10] = [
    "approach",
    "reps",
    "mean_total_energy_eu",
    "mean_r2",
    "mean_mse",
    "mean_n_adaptations",
    "loop_energy_share",
    "energy_ratio",
    "r2_ratio",
    "baseline",
];

pub fn write_report<W: Write>(report: &ComparisonReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.approach.clone(),
            r.reps.to_string(),
            r.mean_energy.to_string(),
            r.mean_r2.to_string(),
            r.mean_mse.to_string(),
            r.mean_adaptations.to_string(),
            r.loop_energy_share.to_string(),
            r.energy_ratio.to_string(),
            r.r2_ratio.to_string(),
            report.baseline.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format chart data: `approach,interval,cumulative_energy_eu`.
pub fn write_chart_data<W: Write>(sets: &[ResultSet], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["approach", "interval", "cumulative_energy_eu"])?;
    for s in sets {
        for (i, e) in s.mean_cumulative_energy().iter().enumerate() {
            w.write_record([s.approach.clone(), i.to_string(), e.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// Cumulative-energy chart with a horizontal line at the reference energy
/// budget `e_ref * E_max_train * intervals`.
pub fn render_chart_svg(sets: &[ResultSet], e_ref: f64) -> String {
    let (w, h) = (860.0, 500.0);
    let (left, right, top, bottom) = (80.0, 190.0, 30.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;

    let curves: Vec<(String, Vec<f64>)> = sets
        .iter()
        .map(|s| (s.approach.clone(), s.mean_cumulative_energy()))
        .collect();
    let n = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0).max(1);
    let budget = sets
        .iter()
        .find_map(ResultSet::e_max_train)
        .map(|e_max| e_ref * e_max * n as f64);
    let y_max = curves
        .iter()
        .flat_map(|(_, c)| c.iter().copied())
        .chain(budget)
        .fold(1.0, f64::max)
        * 1.05;
    let x = |i: f64| left + plot_w * i / (n.max(2) - 1) as f64;
    let y = |v: f64| top + plot_h * (1.0 - v / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="black"/>"#,
        top + plot_h
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.0}</text>"#,
            left - 6.0,
            y(v) + 4.0,
            v
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">monitoring interval</text>"#,
        left + plot_w / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">cumulative energy (eu)</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    if let Some(b) = budget {
        let _ = writeln!(
            svg,
            r#"<line x1="{left}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="red" stroke-dasharray="4 4"/>"#,
            y(b),
            left + plot_w,
            y(b)
        );
    }
    for (k, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = curve
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", x(i as f64), y(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 16.0 * k as f64 + 8.0;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0
        );
    }
    if budget.is_some() {
        let ly = top + 16.0 * curves.len() as f64 + 8.0;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="red" stroke-dasharray="4 4"/><text x="{}" y="{}">reference</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
