//! Reading external spike trains.

use std::path::Path;
use std::str::FromStr;

use cs_causality::Series;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeFormat {
    /// Header `ch0,ch1,...`, one row per time bin.
    Csv,
    /// Lines `channel_id,timestamp`, binned at the given width.
    EventList { bin_width: f64 },
}

impl FromStr for SpikeFormat {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SpikeFormat::Csv),
            "events" | "event-list" => Ok(SpikeFormat::EventList { bin_width: 1.0 }),
            other => Err(HarnessError::Config(format!("unknown input format `{other}`"))),
        }
    }
}

pub fn ingest_spike_trains(path: &Path, format: SpikeFormat) -> Result<Series> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    match format {
        SpikeFormat::Csv => parse_channel_csv(&text),
        SpikeFormat::EventList { bin_width } => parse_event_list(&text, bin_width),
    }
}

fn reader(text: &str, has_headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> HarnessError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    HarnessError::Parse { line, msg: e.to_string() }
}

/// Parses a channel CSV (header `ch0,...`) into a channels x bins matrix.
pub fn parse_channel_csv(text: &str) -> Result<Series> {
    let mut rdr = reader(text, true);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(HarnessError::Parse { line: 1, msg: "missing header".into() });
    }
    for (i, h) in headers.iter().enumerate() {
        if h != format!("ch{i}") {
            return Err(HarnessError::Parse {
                line: 1,
                msg: format!("column {i} is named `{h}`, expected `ch{i}`"),
            });
        }
    }
    let channels = headers.len();
    let mut cols: Vec<f64> = Vec::new();
    let mut bins = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != channels {
            return Err(HarnessError::Parse {
                line,
                msg: format!("expected {channels} fields, found {}", rec.len()),
            });
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| HarnessError::Parse {
                line,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(HarnessError::Parse { line, msg: format!("non-finite value `{field}`") });
            }
            cols.push(v);
        }
        bins += 1;
    }
    if bins == 0 {
        return Err(HarnessError::Parse { line: 1, msg: "no data rows".into() });
    }
    // cols is bins x channels in row-major order, i.e. column-major channels x bins
    Ok(Series::from_column_slice(channels, bins, &cols))
}

/// Bins `channel_id,timestamp` events: bin `floor(t / width)` is set to 1.
pub fn parse_event_list(text: &str, bin_width: f64) -> Result<Series> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(HarnessError::Config(format!("bin width must be positive, got {bin_width}")));
    }
    let mut rdr = reader(text, false);
    let mut events: Vec<(usize, usize)> = Vec::new();
    let mut last: Vec<f64> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() != 2 {
            return Err(HarnessError::Parse { line, msg: format!("expected `channel_id,timestamp`, found {} fields", rec.len()) });
        }
        let ch: usize = rec[0].parse().map_err(|_| HarnessError::Parse {
            line,
            msg: format!("`{}` is not a channel id", &rec[0]),
        })?;
        let t: f64 = rec[1].parse().map_err(|_| HarnessError::Parse {
            line,
            msg: format!("`{}` is not a timestamp", &rec[1]),
        })?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(HarnessError::Parse { line, msg: format!("invalid timestamp {t}") });
        }
        if last.len() <= ch {
            last.resize(ch + 1, f64::NEG_INFINITY);
        }
        if t < last[ch] {
            return Err(HarnessError::Data(format!(
                "timestamps of channel {ch} decrease at line {line} ({t} after {})",
                last[ch]
            )));
        }
        last[ch] = t;
        events.push((ch, (t / bin_width).floor() as usize));
    }
    if events.is_empty() {
        return Err(HarnessError::Parse { line: 1, msg: "no events".into() });
    }
    let channels = last.len();
    let bins = events.iter().map(|e| e.1).max().unwrap_or(0) + 1;
    let mut m = Series::zeros(channels, bins);
    for (ch, b) in events {
        m[(ch, b)] = 1.0;
    }
    Ok(m)
}
