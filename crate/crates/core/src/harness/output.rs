//! CSV and JSON artifacts.
//!
//! Floats are written with `{:.16e}` (17 significant digits, exact
//! round-trip); absent values are empty fields. Column orders are fixed by
//! the `*_HEADER` constants.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::ExperimentConfig;
use super::density::DensityRow;
use super::experiment::{CellFailure, SampleSet, SimulationRecord, TruthRecord};
use super::summary::SummaryTable;
use crate::bootstrap::Statistic;
use crate::datagen::EllipticalLaw;
use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 19] = [
    "law",
    "r",
    "c",
    "p",
    "lambda1",
    "statistic",
    "simulation",
    "point_estimate",
    "true_value",
    "null_value",
    "boot_bias",
    "boot_variance",
    "percentile_lo",
    "percentile_hi",
    "normal_lo",
    "normal_hi",
    "bc_lo",
    "bc_hi",
    "bc_fallback",
];

pub const SUMMARY_HEADER: [&str; 6] = ["law", "r", "c", "statistic", "metric", "value"];

pub const SAMPLE_HEADER: [&str; 8] = [
    "law",
    "r",
    "c",
    "statistic",
    "simulation",
    "point_estimate",
    "replicate",
    "value",
];

pub const TRUTH_HEADER: [&str; 5] = ["r", "c", "statistic", "simulation", "point_estimate"];

pub const DENSITY_HEADER: [&str; 8] = ["law", "r", "c", "statistic", "simulation", "x", "density", "point_mass"];

/// Crate version plus the git revision the binary was built from.
pub fn artifact_version() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("EIGBOOT_GIT_REV"))
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

fn reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let found = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            format!("unexpected header {:?}, expected {:?}", found, header),
        ));
    }
    Ok(rdr)
}

struct Fields<'a> {
    path: &'a Path,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Fields<'_> {
    fn err(&self, col: usize, what: &str) -> Error {
        Error::parse(self.path, format!("line {}: column {}: {what}", self.line, col + 1))
    }

    fn str(&self, col: usize) -> Result<&str> {
        self.record.get(col).ok_or_else(|| self.err(col, "missing field"))
    }

    fn f64(&self, col: usize) -> Result<f64> {
        self.str(col)?.parse().map_err(|_| self.err(col, "expected a number"))
    }

    fn opt(&self, col: usize) -> Result<Option<f64>> {
        let s = self.str(col)?;
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| self.err(col, "expected a number or empty"))
        }
    }

    fn usize(&self, col: usize) -> Result<usize> {
        self.str(col)?.parse().map_err(|_| self.err(col, "expected an integer"))
    }

    fn law(&self, col: usize) -> Result<EllipticalLaw> {
        EllipticalLaw::from_name(self.str(col)?).ok_or_else(|| self.err(col, "unknown law"))
    }

    fn statistic(&self, col: usize) -> Result<Statistic> {
        Statistic::from_name(self.str(col)?).ok_or_else(|| self.err(col, "unknown statistic"))
    }

    fn pair(&self, col: usize) -> Result<Option<(f64, f64)>> {
        Ok(match (self.opt(col)?, self.opt(col + 1)?) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        })
    }
}

fn for_each_row(path: &Path, header: &[&str], mut f: impl FnMut(&Fields) -> Result<()>) -> Result<()> {
    let mut rdr = reader(path, header)?;
    for (i, rec) in rdr.records().enumerate() {
        let record = rec.map_err(|e| csv_err(path, e))?;
        f(&Fields {
            path,
            line: i as u64 + 2,
            record: &record,
        })?;
    }
    Ok(())
}

pub fn write_records_csv(path: &Path, records: &[SimulationRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RECORD_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let pair = |x: Option<(f64, f64)>| [fmt_opt(x.map(|v| v.0)), fmt_opt(x.map(|v| v.1))];
        let [pl, ph] = pair(r.percentile);
        let [nl, nh] = pair(r.normal);
        let [bl, bh] = pair(r.bias_corrected);
        w.write_record([
            r.law.name().to_string(),
            fmt_float(r.ratio),
            fmt_float(r.multiplier),
            r.p.to_string(),
            fmt_float(r.lambda1),
            r.statistic.name().to_string(),
            r.simulation.to_string(),
            fmt_float(r.point_estimate),
            fmt_opt(r.true_value),
            fmt_opt(r.null_value),
            fmt_float(r.boot_bias),
            fmt_opt(r.boot_variance),
            pl,
            ph,
            nl,
            nh,
            bl,
            bh,
            r.bc_fallback.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<SimulationRecord>> {
    let mut out = Vec::new();
    for_each_row(path, &RECORD_HEADER, |f| {
        out.push(SimulationRecord {
            law: f.law(0)?,
            ratio: f.f64(1)?,
            multiplier: f.f64(2)?,
            p: f.usize(3)?,
            lambda1: f.f64(4)?,
            statistic: f.statistic(5)?,
            simulation: f.usize(6)?,
            point_estimate: f.f64(7)?,
            true_value: f.opt(8)?,
            null_value: f.opt(9)?,
            boot_bias: f.f64(10)?,
            boot_variance: f.opt(11)?,
            percentile: f.pair(12)?,
            normal: f.pair(14)?,
            bias_corrected: f.pair(16)?,
            bc_fallback: f.str(18)?.parse().map_err(|_| f.err(18, "expected true or false"))?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_summary_csv(path: &Path, table: &SummaryTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    for row in &table.rows {
        for (metric, value) in &row.metrics {
            w.write_record([
                row.law.name(),
                &fmt_float(row.ratio),
                &fmt_float(row.multiplier),
                row.statistic.name(),
                metric,
                &fmt_float(*value),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// JSON document with the config echo, artifact version, per-cell metrics
/// (including Monte-Carlo standard errors) and recorded failures.
pub fn summary_json(cfg: &ExperimentConfig, table: &SummaryTable, failures: &[CellFailure]) -> Value {
    let cells: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let metrics: Map<String, Value> = row.metrics.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            json!({
                "law": row.law.name(),
                "r": row.ratio,
                "c": row.multiplier,
                "statistic": row.statistic.name(),
                "metrics": metrics,
            })
        })
        .collect();
    json!({
        "artifact_version": artifact_version(),
        "config": cfg,
        "cells": cells,
        "failures": failures,
    })
}

pub fn write_summary_json(
    path: &Path,
    cfg: &ExperimentConfig,
    table: &SummaryTable,
    failures: &[CellFailure],
) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    let text = serde_json::to_string_pretty(&summary_json(cfg, table, failures)).expect("json value serialises");
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    file.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn write_samples_csv(path: &Path, samples: &[SampleSet]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SAMPLE_HEADER).map_err(|e| csv_err(path, e))?;
    for s in samples {
        for (b, v) in s.replicates.iter().enumerate() {
            w.write_record([
                s.law.name(),
                &fmt_float(s.ratio),
                &fmt_float(s.multiplier),
                s.statistic.name(),
                &s.simulation.to_string(),
                &fmt_float(s.point_estimate),
                &b.to_string(),
                &fmt_float(*v),
            ])
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<SampleSet>> {
    let mut out: Vec<SampleSet> = Vec::new();
    for_each_row(path, &SAMPLE_HEADER, |f| {
        let (law, ratio, multiplier, statistic, simulation) =
            (f.law(0)?, f.f64(1)?, f.f64(2)?, f.statistic(3)?, f.usize(4)?);
        let value = f.f64(7)?;
        match out.last_mut() {
            Some(s)
                if s.law == law
                    && s.ratio == ratio
                    && s.multiplier == multiplier
                    && s.statistic == statistic
                    && s.simulation == simulation =>
            {
                s.replicates.push(value)
            }
            _ => out.push(SampleSet {
                law,
                ratio,
                multiplier,
                statistic,
                simulation,
                point_estimate: f.f64(5)?,
                replicates: vec![value],
            }),
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn write_truth_csv(path: &Path, truth: &[TruthRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRUTH_HEADER).map_err(|e| csv_err(path, e))?;
    for t in truth {
        w.write_record([
            &fmt_float(t.ratio),
            &fmt_float(t.multiplier),
            t.statistic.name(),
            &t.simulation.to_string(),
            &fmt_float(t.point_estimate),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<TruthRecord>> {
    let mut out = Vec::new();
    for_each_row(path, &TRUTH_HEADER, |f| {
        out.push(TruthRecord {
            ratio: f.f64(0)?,
            multiplier: f.f64(1)?,
            statistic: f.statistic(2)?,
            simulation: f.usize(3)?,
            point_estimate: f.f64(4)?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_density_csv(path: &Path, samples: &[SampleSet], rows: &[DensityRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(DENSITY_HEADER).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let s = &samples[row.dist];
        w.write_record([
            s.law.name(),
            &fmt_float(s.ratio),
            &fmt_float(s.multiplier),
            s.statistic.name(),
            &s.simulation.to_string(),
            &fmt_float(row.x),
            &fmt_float(row.density),
            &row.point_mass.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
