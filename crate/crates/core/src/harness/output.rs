//! File formats written by experiment runs.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::plan::Approach;
use super::run::{MetricsRow, RunResult};
use crate::error::{Error, Result};
use crate::knowledge::EventLog;
use crate::monitor::IntervalMetrics;

pub const SUMMARY_HEADER: [&str; 9] = [
    "approach",
    "rep",
    "seed",
    "total_energy_eu",
    "r2",
    "mse",
    "mean_infer_cost_eu",
    "wall_ms_per_pred",
    "n_adaptations",
];

pub const METRICS_HEADER: [&str; 10] = [
    "interval",
    "a_i",
    "raw_r2",
    "e_i",
    "e_bar_i",
    "s_i",
    "ema_s_i",
    "d_i",
    "tau_e_i",
    "active_model",
];

/// Parsed summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub approach: String,
    pub rep: usize,
    pub seed: u64,
    pub total_energy: f64,
    pub r2: f64,
    pub mse: f64,
    pub mean_infer_cost: f64,
    pub wall_ms_per_pred: f64,
    pub n_adaptations: usize,
}

impl From<&RunResult> for SummaryRow {
    fn from(r: &RunResult) -> Self {
        Self {
            approach: r.approach.name().to_string(),
            rep: r.rep,
            seed: r.seed,
            total_energy: r.total_energy,
            r2: r.r2,
            mse: r.mse,
            mean_infer_cost: r.mean_inference_cost,
            wall_ms_per_pred: r.wall_ms_per_pred,
            n_adaptations: r.n_adaptations,
        }
    }
}

impl SummaryRow {
    pub fn fields(&self) -> [String; 9] {
        [
            self.approach.clone(),
            self.rep.to_string(),
            self.seed.to_string(),
            self.total_energy.to_string(),
            self.r2.to_string(),
            self.mse.to_string(),
            self.mean_infer_cost.to_string(),
            self.wall_ms_per_pred.to_string(),
            self.n_adaptations.to_string(),
        ]
    }

    /// The row as it appears in the summary CSV, without a trailing newline.
    pub fn to_line(&self) -> String {
        self.fields().join(",")
    }
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(field: &str, line: usize) -> Result<T> {
    field.trim().parse().map_err(|_| Error::ParseLine {
        line,
        message: format!("bad value `{field}`"),
    })
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(SUMMARY_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "unexpected summary header".into(),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        rows.push(SummaryRow {
            approach: rec[0].to_string(),
            rep: parse(&rec[1], line)?,
            seed: parse(&rec[2], line)?,
            total_energy: parse(&rec[3], line)?,
            r2: parse(&rec[4], line)?,
            mse: parse(&rec[5], line)?,
            mean_infer_cost: parse(&rec[6], line)?,
            wall_ms_per_pred: parse(&rec[7], line)?,
            n_adaptations: parse(&rec[8], line)?,
        });
    }
    Ok(rows)
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            m.interval.to_string(),
            m.a_i.to_string(),
            m.raw_r2.to_string(),
            m.e_i.to_string(),
            m.e_bar_i.to_string(),
            m.s_i.to_string(),
            m.ema_s_i.to_string(),
            m.d_i.to_string(),
            r.tau_e_i.to_string(),
            r.active_model.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        rows.push(MetricsRow {
            metrics: IntervalMetrics {
                interval: parse(&rec[0], line)?,
                a_i: parse(&rec[1], line)?,
                raw_r2: parse(&rec[2], line)?,
                e_i: parse(&rec[3], line)?,
                e_bar_i: parse(&rec[4], line)?,
                s_i: parse(&rec[5], line)?,
                ema_s_i: parse(&rec[6], line)?,
                d_i: parse(&rec[7], line)?,
                carried_forward: false,
            },
            tau_e_i: parse(&rec[8], line)?,
            active_model: rec[9].to_string(),
        });
    }
    Ok(rows)
}

/// Paths of the artifacts written for one approach under an output directory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub approach: String,
}

impl RunArtifacts {
    pub fn new(dir: impl Into<PathBuf>, approach: Approach) -> Self {
        Self {
            dir: dir.into(),
            approach: approach.name().to_string(),
        }
    }

    /// Locates sibling artifacts from a summary path `<dir>/<approach>_summary.csv`.
    pub fn from_summary_path(path: &Path) -> Result<Self> {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix("_summary.csv"))
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: "summary file must be named <approach>_summary.csv".into(),
            })?;
        Ok(Self {
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            approach: name.to_string(),
        })
    }

    pub fn summary(&self) -> PathBuf {
        self.dir.join(format!("{}_summary.csv", self.approach))
    }

    pub fn events(&self, rep: usize) -> PathBuf {
        self.dir.join(format!("{}_rep{rep}_events.jsonl", self.approach))
    }

    pub fn metrics(&self, rep: usize) -> PathBuf {
        self.dir.join(format!("{}_rep{rep}_metrics.csv", self.approach))
    }
}

/// Writes the summary, and per repetition the event log and metrics CSV.
pub fn write_run_artifacts(dir: &Path, results: &[RunResult]) -> Result<Vec<PathBuf>> {
    let Some(first) = results.first() else {
        return Ok(vec![]);
    };
    std::fs::create_dir_all(dir)?;
    let art = RunArtifacts::new(dir, first.approach);
    let mut written = Vec::new();
    let rows: Vec<SummaryRow> = results.iter().map(SummaryRow::from).collect();
    write_summary(&rows, std::fs::File::create(art.summary())?)?;
    written.push(art.summary());
    for r in results {
        std::fs::write(art.events(r.rep), r.events.to_jsonl())?;
        write_metrics(&r.per_interval, std::fs::File::create(art.metrics(r.rep))?)?;
        written.push(art.events(r.rep));
        written.push(art.metrics(r.rep));
    }
    Ok(written)
}

pub fn read_events(path: &Path) -> Result<EventLog> {
    let text = std::fs::read_to_string(path)?;
    EventLog::from_jsonl(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
