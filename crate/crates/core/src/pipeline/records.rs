//! The per-acquisition count-record CSV.
//!
//! Columns: `angle_rad, label, singles_t, singles_r, coincidences,
//! valid_starts, duration_s`, plus an optional `acquisition` index. Without
//! it, acquisitions are numbered in file order within each (label, angle).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scan::{CountRecord, Label};
use crate::sim::SimulatedRun;

pub const COLUMNS: [&str; 7] = [
    "angle_rad",
    "label",
    "singles_t",
    "singles_r",
    "coincidences",
    "valid_starts",
    "duration_s",
];
const ACQUISITION: &str = "acquisition";
/// Angles closer than this are the same polarizer setting.
const ANGLE_MATCH: f64 = 1e-9;

#[derive(Debug, Deserialize)]
struct Row {
    angle_rad: f64,
    label: Label,
    singles_t: u64,
    singles_r: u64,
    coincidences: u64,
    valid_starts: u64,
    duration_s: f64,
    acquisition: Option<u32>,
}

#[derive(Debug, Serialize)]
struct OutRow {
    angle_rad: f64,
    label: Label,
    singles_t: u64,
    singles_r: u64,
    coincidences: u64,
    valid_starts: u64,
    duration_s: f64,
    acquisition: u32,
}

/// Records of one label at one polarizer angle, in acquisition order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGroup {
    pub angle_rad: f64,
    pub records: Vec<CountRecord>,
}

/// Parsed record file, grouped by label and angle, angles ascending.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RecordSet {
    pub signal: Vec<AngleGroup>,
    pub background: Vec<AngleGroup>,
}

impl RecordSet {
    pub fn signal_records(&self) -> usize {
        self.signal.iter().map(|g| g.records.len()).sum()
    }

    pub fn background_records(&self) -> usize {
        self.background.iter().map(|g| g.records.len()).sum()
    }

    /// Group simulated runs the way [`ingest_records`] would.
    pub fn from_runs(signal: &[SimulatedRun], background: &SimulatedRun) -> Self {
        let group = |run: &SimulatedRun| AngleGroup {
            angle_rad: run.phi.unwrap_or(0.0),
            records: run.records.clone(),
        };
        Self {
            signal: signal.iter().map(group).collect(),
            background: vec![group(background)],
        }
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Records by acquisition index, per angle in first-seen order.
type Groups = Vec<(f64, BTreeMap<u32, CountRecord>)>;

fn find_group(groups: &mut Groups, angle: f64) -> &mut BTreeMap<u32, CountRecord> {
    let i = match groups.iter().position(|(a, _)| (a - angle).abs() < ANGLE_MATCH) {
        Some(i) => i,
        None => {
            groups.push((angle, BTreeMap::new()));
            groups.len() - 1
        }
    };
    &mut groups[i].1
}

fn finish(mut groups: Groups) -> Vec<AngleGroup> {
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    groups
        .into_iter()
        .map(|(angle_rad, recs)| AngleGroup {
            angle_rad,
            records: recs.into_values().collect(),
        })
        .collect()
}

pub fn read_records(input: impl Read) -> Result<RecordSet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    for col in COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(parse_error(1, format!("missing column {col:?}")));
        }
    }
    if let Some(extra) = headers.iter().find(|h| *h != ACQUISITION && !COLUMNS.contains(h)) {
        return Err(parse_error(1, format!("unknown column {extra:?}")));
    }
    let mut groups: BTreeMap<Label, Groups> = BTreeMap::new();
    let mut rows = 0;
    for result in reader.deserialize::<Row>() {
        let row = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let message = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            };
            parse_error(line, message)
        })?;
        rows += 1;
        // header is line 1
        let line = rows + 1;
        if !row.angle_rad.is_finite() {
            return Err(parse_error(line, format!("angle {} is not finite", row.angle_rad)));
        }
        let record = CountRecord {
            singles_t: row.singles_t,
            singles_r: row.singles_r,
            coincidences: row.coincidences,
            valid_starts: row.valid_starts,
            duration_s: row.duration_s,
            label: row.label,
        };
        record.validate().map_err(|e| parse_error(line, e.to_string()))?;
        let group = find_group(groups.entry(row.label).or_default(), row.angle_rad);
        let acquisition = row.acquisition.unwrap_or(group.len() as u32);
        if group.insert(acquisition, record).is_some() {
            return Err(Error::Conflict(format!(
                "line {line}: {} record for angle {} acquisition {acquisition} appears twice",
                row.label.as_str(),
                row.angle_rad
            )));
        }
    }
    if rows == 0 {
        return Err(Error::EmptyInput("record file has no rows".into()));
    }
    Ok(RecordSet {
        signal: finish(groups.remove(&Label::Signal).unwrap_or_default()),
        background: finish(groups.remove(&Label::Background).unwrap_or_default()),
    })
}

/// Parse a record file; an empty file is an empty-input error.
pub fn ingest_records(path: impl AsRef<Path>) -> Result<RecordSet> {
    let bytes = std::fs::read(path)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(Error::EmptyInput("record file is empty".into()));
    }
    read_records(bytes.as_slice())
}

pub fn write_records(out: impl Write, set: &RecordSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for group in set.signal.iter().chain(&set.background) {
        for (i, r) in group.records.iter().enumerate() {
            w.serialize(OutRow {
                angle_rad: group.angle_rad,
                label: r.label,
                singles_t: r.singles_t,
                singles_r: r.singles_r,
                coincidences: r.coincidences,
                valid_starts: r.valid_starts,
                duration_s: r.duration_s,
                acquisition: i as u32,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_records(path: impl AsRef<Path>, set: &RecordSet) -> Result<()> {
    write_records(File::create(path)?, set)
}

/// Hex SHA-256 of a file, for report provenance.
pub fn file_digest(path: impl AsRef<Path>) -> Result<String> {
    Ok(hex::encode(Sha256::digest(std::fs::read(path)?)))
}
