//! Flow series: CSV ingestion, synthetic generation and drift injection.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDateTime};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Readings per day at a 5-minute cadence.
pub const DAY: usize = 288;
/// Readings per week.
pub const WEEK: usize = 2016;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Csv,
    Synthetic { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub readings: Vec<f64>,
    pub origin: Origin,
}

impl Series {
    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn valid_timestamp(s: &str) -> bool {
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).is_ok() || DateTime::parse_from_rfc3339(s).is_ok()
}

/// Parses `timestamp,flow` rows. Line numbers in errors are 1-based file lines.
pub fn read_series_csv<R: Read>(reader: R) -> Result<Series> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != "flow" {
        return Err(Error::ParseLine {
            line: 1,
            message: "expected header `timestamp,flow`".into(),
        });
    }
    let mut readings = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let line = k + 2;
        let row = row.map_err(|e| Error::ParseLine {
            line,
            message: e.to_string(),
        })?;
        if !valid_timestamp(row[0].trim()) {
            return Err(Error::ParseLine {
                line,
                message: format!("bad timestamp `{}`", &row[0]),
            });
        }
        let flow: f64 = row[1].trim().parse().map_err(|_| Error::ParseLine {
            line,
            message: format!("bad flow `{}`", &row[1]),
        })?;
        if !flow.is_finite() {
            return Err(Error::ParseLine {
                line,
                message: "flow is not finite".into(),
            });
        }
        if flow < 0.0 {
            return Err(Error::NegativeFlow { line });
        }
        readings.push(flow);
    }
    Ok(Series {
        readings,
        origin: Origin::Csv,
    })
}

pub fn load_series_csv(path: impl AsRef<Path>) -> Result<Series> {
    read_series_csv(std::fs::File::open(path)?)
}

/// Writes the series with synthetic timestamps starting 2024-01-01T00:00:00.
pub fn write_series_csv<W: Write>(series: &[f64], writer: W) -> Result<()> {
    let start = NaiveDateTime::parse_from_str("2024-01-01T00:00:00", TIMESTAMP_FORMAT)
        .expect("valid start timestamp");
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "flow"])?;
    for (i, v) in series.iter().enumerate() {
        let ts = start + Duration::minutes(5 * i as i64);
        w.write_record([ts.format(TIMESTAMP_FORMAT).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub base: f64,
    pub daily_amplitude: f64,
    /// Relative depth of the weekly modulation.
    pub weekly_depth: f64,
    /// AR(1) coefficient of the noise.
    pub phi: f64,
    /// Innovation standard deviation of the noise.
    pub sigma: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            base: 200.0,
            daily_amplitude: 120.0,
            weekly_depth: 0.1,
            phi: 0.7,
            sigma: 8.0,
        }
    }
}

/// Minimum synthetic length: training and validation windows plus one lag window.
pub const MIN_SYNTHETIC_LEN: usize = 1445;

/// Daily sinusoid times a weekly modulation, plus AR(1) noise, clamped at zero.
pub fn generate_synthetic(params: &SyntheticParams, seed: u64, length: usize) -> Series {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, params.sigma.max(0.0)).expect("valid noise scale");
    let mut ar = 0.0;
    let readings = (0..length)
        .map(|t| {
            let tf = t as f64;
            let daily = params.base + params.daily_amplitude * (2.0 * PI * tf / DAY as f64).sin();
            let weekly = 1.0 + params.weekly_depth * (2.0 * PI * tf / WEEK as f64).sin();
            let eps: f64 = if params.sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            ar = params.phi * ar + eps;
            (daily * weekly + ar).max(0.0)
        })
        .collect();
    Series {
        readings,
        origin: Origin::Synthetic { seed },
    }
}

/// Scale-and-shift applied to a half-open index range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSegment {
    pub start: usize,
    pub end: usize,
    pub scale: f64,
    pub shift: f64,
}

impl DriftSegment {
    pub fn offset(self, by: usize) -> Self {
        Self {
            start: self.start + by,
            end: self.end + by,
            ..self
        }
    }
}

/// Segments must be non-empty, in order, non-overlapping and inside `0..len`.
pub fn validate_segments(segments: &[DriftSegment], len: usize) -> Result<()> {
    let mut prev_end = 0;
    for (k, s) in segments.iter().enumerate() {
        if s.start >= s.end {
            return Err(Error::Segment(format!("segment {k} is empty")));
        }
        if s.end > len {
            return Err(Error::Segment(format!("segment {k} ends past {len}")));
        }
        if s.start < prev_end {
            return Err(Error::Segment(format!("segment {k} overlaps or is out of order")));
        }
        if !(s.scale.is_finite() && s.shift.is_finite()) {
            return Err(Error::Segment(format!("segment {k} has a non-finite transform")));
        }
        prev_end = s.end;
    }
    Ok(())
}

/// `reading <- max(0, scale * reading + shift)` inside each segment.
pub fn inject_drift(series: &[f64], segments: &[DriftSegment]) -> Result<Vec<f64>> {
    validate_segments(segments, series.len())?;
    let mut out = series.to_vec();
    for s in segments {
        for v in &mut out[s.start..s.end] {
            *v = (s.scale * *v + s.shift).max(0.0);
        }
    }
    Ok(out)
}
