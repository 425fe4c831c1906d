//! On-disk encodings of patterns and drive schedules.
//!
//! Schedules are written with times in ns and frequencies in Hz; field order
//! is fixed by the wire structs below.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::compiler::{ColumnEvent, DriveSchedule, Pattern, Tone};
use crate::device::{parse_json, ChirpScan};
use crate::error::{Error, Result};

pub const SCHEDULE_FORMAT: &str = "raster-drive-schedule/1";

const NS: f64 = 1e-9;

fn parse_error(source_name: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        message: message.into(),
    }
}

/// Text grid: line `r` is row `r`, character `c` is column `c`, digit `d`
/// means weight `d/9`. Blank lines and lines starting with `#` are skipped.
pub fn parse_pattern_text(source_name: &str, text: &str) -> Result<Pattern> {
    let mut rows: Vec<(usize, Vec<u8>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut digits = Vec::with_capacity(line.len());
        for (col, ch) in line.chars().enumerate() {
            match ch.to_digit(10) {
                Some(d) => digits.push(d as u8),
                None => {
                    return Err(parse_error(
                        source_name,
                        format!("line {} column {}: expected a digit 0-9, found {ch:?}", i + 1, col + 1),
                    ))
                }
            }
        }
        rows.push((i + 1, digits));
    }
    let Some((_, first)) = rows.first() else {
        return Err(parse_error(source_name, "pattern has no rows"));
    };
    let n_cols = first.len();
    if let Some((line, row)) = rows.iter().find(|(_, r)| r.len() != n_cols) {
        return Err(parse_error(
            source_name,
            format!("line {line}: {} columns, expected {n_cols}", row.len()),
        ));
    }
    let mut pattern = Pattern::new(n_cols, rows.len())?;
    for (r, (_, digits)) in rows.iter().enumerate() {
        for (c, &d) in digits.iter().enumerate() {
            if d > 0 {
                pattern.set(c, r, f64::from(d) / 9.0)?;
            }
        }
    }
    Ok(pattern)
}

/// Inverse of [`parse_pattern_text`]; weights are rounded to the nearest ninth.
pub fn pattern_to_text(pattern: &Pattern) -> String {
    let mut out = String::with_capacity((pattern.n_cols() + 1) * pattern.n_rows());
    for r in 0..pattern.n_rows() {
        for c in 0..pattern.n_cols() {
            let d = (pattern.get(c, r) * 9.0).round() as u32;
            out.push(char::from_digit(d.min(9), 10).expect("digit"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellWire {
    c: usize,
    r: usize,
    w: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternWire {
    n_cols: usize,
    n_rows: usize,
    cells: Vec<CellWire>,
}

/// Sparse JSON form: only lit cells are listed; missing cells are dark.
pub fn parse_pattern_json(source_name: &str, text: &str) -> Result<Pattern> {
    let wire: PatternWire = parse_json(source_name, text)?;
    let mut pattern = Pattern::new(wire.n_cols, wire.n_rows)?;
    for (i, cell) in wire.cells.iter().enumerate() {
        pattern
            .set(cell.c, cell.r, cell.w)
            .map_err(|e| parse_error(source_name, format!("cells[{i}]: {e}")))?;
    }
    Ok(pattern)
}

pub fn pattern_to_json(pattern: &Pattern) -> String {
    let wire = PatternWire {
        n_cols: pattern.n_cols(),
        n_rows: pattern.n_rows(),
        cells: pattern.lit_cells().map(|(c, r, w)| CellWire { c, r, w }).collect(),
    };
    serde_json::to_string_pretty(&wire).expect("pattern serializes")
}

/// Picks the JSON or text reader from the first non-blank character.
pub fn parse_pattern(source_name: &str, text: &str) -> Result<Pattern> {
    if text.trim_start().starts_with('{') {
        parse_pattern_json(source_name, text)
    } else {
        parse_pattern_text(source_name, text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChirpWire {
    f_start_hz: f64,
    f_end_hz: f64,
    t_scan_ns: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToneWire {
    frequency_hz: f64,
    amplitude_weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventWire {
    column_index: usize,
    t_start_ns: f64,
    t_end_ns: f64,
    slow_frequency_hz: f64,
    tones: Vec<ToneWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleWire {
    format: String,
    n_cols: usize,
    n_rows: usize,
    chirp: ChirpWire,
    retrace_ns: f64,
    column_events: Vec<EventWire>,
}

pub fn schedule_to_json(schedule: &DriveSchedule) -> String {
    let wire = ScheduleWire {
        format: SCHEDULE_FORMAT.to_string(),
        n_cols: schedule.n_cols(),
        n_rows: schedule.n_rows,
        chirp: ChirpWire {
            f_start_hz: schedule.chirp.f_start,
            f_end_hz: schedule.chirp.f_end,
            t_scan_ns: schedule.chirp.t_scan / NS,
        },
        retrace_ns: schedule.retrace / NS,
        column_events: schedule
            .column_events
            .iter()
            .map(|ev| EventWire {
                column_index: ev.column_index,
                t_start_ns: ev.t_start / NS,
                t_end_ns: ev.t_end / NS,
                slow_frequency_hz: ev.slow_frequency_hz,
                tones: ev
                    .tones
                    .iter()
                    .map(|t| ToneWire {
                        frequency_hz: t.frequency_hz,
                        amplitude_weight: t.amplitude_weight,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("schedule serializes");
    out.push('\n');
    out
}

pub fn parse_schedule_json(source_name: &str, text: &str) -> Result<DriveSchedule> {
    let wire: ScheduleWire = parse_json(source_name, text)?;
    if wire.format != SCHEDULE_FORMAT {
        return Err(parse_error(
            source_name,
            format!("format `{}` is not `{SCHEDULE_FORMAT}`", wire.format),
        ));
    }
    if wire.n_cols != wire.column_events.len() {
        return Err(parse_error(
            source_name,
            format!("n_cols {} but {} column events", wire.n_cols, wire.column_events.len()),
        ));
    }
    let schedule = DriveSchedule {
        chirp: ChirpScan::new(wire.chirp.f_start_hz, wire.chirp.f_end_hz, wire.chirp.t_scan_ns * NS)?,
        retrace: wire.retrace_ns * NS,
        n_rows: wire.n_rows,
        column_events: wire
            .column_events
            .into_iter()
            .map(|ev| ColumnEvent {
                t_start: ev.t_start_ns * NS,
                t_end: ev.t_end_ns * NS,
                column_index: ev.column_index,
                slow_frequency_hz: ev.slow_frequency_hz,
                tones: ev
                    .tones
                    .into_iter()
                    .map(|t| Tone {
                        frequency_hz: t.frequency_hz,
                        amplitude_weight: t.amplitude_weight,
                    })
                    .collect(),
            })
            .collect(),
    };
    schedule.check_well_formed()?;
    Ok(schedule)
}

/// Renders rows of a CSV with a header; values use Rust's shortest round-trip form.
pub fn csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.into_iter().collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}
