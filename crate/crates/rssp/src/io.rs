//! Record and report emission: CSV and JSON Lines.
//!
//! The CSV schema is fixed (header and column order):
//! `trial_id,method,distribution,n,B,w,split,seed,error,elapsed_ns,extras_json`.
//! JSONL mirrors the same fields one record per line. Emission is
//! deterministic byte-for-byte for identical inputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::Serialize;

use crate::experiments::{AggregateRow, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => bail!("unknown format {other:?} (want csv or jsonl)"),
        }
    }
}

/// Writes trial records to `path` in the chosen format.
pub fn emit_records(records: &[TrialRecord], path: &Path, format: OutputFormat) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write_records(records, &mut out, format).with_context(|| format!("writing {}", path.display()))
}

/// Writes trial records to any sink (stdout included).
pub fn write_records(
    records: &[TrialRecord],
    out: &mut impl Write,
    format: OutputFormat,
) -> anyhow::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            // Header-only output still needs the header row.
            if records.is_empty() {
                w.write_record([
                    "trial_id",
                    "method",
                    "distribution",
                    "n",
                    "B",
                    "w",
                    "split",
                    "seed",
                    "error",
                    "elapsed_ns",
                    "extras_json",
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Reads trial records back from a CSV file written by [`emit_records`].
pub fn read_records_csv(path: &Path) -> anyhow::Result<Vec<TrialRecord>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row.with_context(|| format!("parsing {}", path.display()))?);
    }
    Ok(records)
}

/// Reads trial records back from a JSONL file.
pub fn read_records_jsonl(path: &Path) -> anyhow::Result<Vec<TrialRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut records = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).with_context(|| format!("parsing {}", path.display()))?,
        );
    }
    Ok(records)
}

/// Reads records, dispatching on the file extension (`.jsonl` vs CSV).
pub fn read_records(path: &Path) -> anyhow::Result<Vec<TrialRecord>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        read_records_jsonl(path)
    } else {
        read_records_csv(path)
    }
}

/// Writes aggregate rows in the chosen format.
pub fn write_aggregate(
    rows: &[AggregateRow],
    out: &mut impl Write,
    format: OutputFormat,
) -> anyhow::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            for r in rows {
                serde_json::to_writer(&mut *out, r)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Pretty-prints a JSON value to `path` (or stdout when `path` is None).
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text.as_bytes())
            .with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Dumps a per-layer solve trace as JSON lines:
/// `{"layer":i,"regime":"pre|post","cells":k,"gap":D}`.
pub fn write_trace_jsonl(trace: &rssp_core::mitm::PhaseBTrace, path: &Path) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for (i, (&cells, &gap)) in trace
        .cells_filled
        .iter()
        .zip(&trace.gap_history)
        .enumerate()
    {
        let layer = i + 1;
        let regime = match trace.t_hit {
            Some(t) if layer >= t => "post",
            _ => "pre",
        };
        serde_json::to_writer(
            &mut out,
            &serde_json::json!({ "layer": layer, "regime": regime, "cells": cells, "gap": gap }),
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_records(count: usize) -> Vec<TrialRecord> {
        (0..count)
            .map(|i| TrialRecord {
                trial_id: i as u64,
                method: "mitm".into(),
                distribution: "uniform-symmetric".into(),
                n: 10,
                bound: 1_000,
                width: 8,
                split: "logw:4".into(),
                seed: 42 + i as u64,
                error: i as u64 * 3,
                elapsed_ns: 1000 + i as u64,
                extras: format!("{{\"digest\":\"{i:016x}\",\"t_hit\":null}}"),
            })
            .collect()
    }

    #[test]
    fn csv_header_schema_is_exact() {
        let mut buf = Vec::new();
        write_records(&[], &mut buf, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "trial_id,method,distribution,n,B,w,split,seed,error,elapsed_ns,extras_json"
        );
    }

    #[test]
    fn single_record_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        let records = sample_records(1);
        emit_records(&records, &path, OutputFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(read_records_csv(&path).unwrap(), records);
    }

    #[test]
    fn large_batch_round_trips_in_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let records = sample_records(10_000);
        let csv_path = dir.path().join("r.csv");
        emit_records(&records, &csv_path, OutputFormat::Csv).unwrap();
        assert_eq!(read_records(&csv_path).unwrap(), records);
        let jsonl_path = dir.path().join("r.jsonl");
        emit_records(&records, &jsonl_path, OutputFormat::Jsonl).unwrap();
        assert_eq!(read_records(&jsonl_path).unwrap(), records);
    }

    #[test]
    fn emission_is_byte_deterministic() {
        let records = sample_records(50);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_records(&records, &mut a, OutputFormat::Csv).unwrap();
        write_records(&records, &mut b, OutputFormat::Csv).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aggregate_rows_serialize_with_expected_header() {
        let rows = crate::experiments::aggregate(&sample_records(6));
        let mut buf = Vec::new();
        write_aggregate(&rows, &mut buf, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "method,w,count,mean_error,sd,se,mean_elapsed_ns"
        );
        let mut jsonl = Vec::new();
        write_aggregate(&rows, &mut jsonl, OutputFormat::Jsonl).unwrap();
        assert_eq!(jsonl.iter().filter(|&&b| b == b'\n').count(), rows.len());
    }
}
