//! Per-step records, run summaries and their CSV forms.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schemes::Scheme;

pub const STEP_HEADER: [&str; 6] = ["time", "u", "reaction", "n_stag", "n_nr_u", "n_nr_d"];
pub const SWEEP_HEADER: [&str; 6] = [
    "scheme",
    "max_n_stag",
    "total_n_stag",
    "total_nr_u",
    "total_nr_d",
    "peak_force",
];

/// One accepted load step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepRow {
    pub time: f64,
    pub u: f64,
    pub reaction: f64,
    pub n_stag: usize,
    pub n_nr_u: usize,
    pub n_nr_d: usize,
    /// Seconds spent in the step. Not written to CSV so files stay reproducible.
    pub wall: f64,
    pub wall_u: f64,
    pub wall_d: f64,
    /// Smallest nodal damage change over the step.
    pub min_increment: f64,
    pub final_residual_u: f64,
    pub final_residual_d: f64,
    pub final_abs_u: f64,
    pub final_abs_d: f64,
    pub fallbacks: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct CsvRow {
    time: f64,
    u: f64,
    reaction: f64,
    n_stag: usize,
    n_nr_u: usize,
    n_nr_d: usize,
}

impl From<&StepRow> for CsvRow {
    fn from(r: &StepRow) -> Self {
        CsvRow {
            time: r.time,
            u: r.u,
            reaction: r.reaction,
            n_stag: r.n_stag,
            n_nr_u: r.n_nr_u,
            n_nr_d: r.n_nr_d,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scheme: Scheme,
    pub rows: Vec<StepRow>,
}

/// Table of cost totals for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: Scheme,
    pub max_n_stag: usize,
    pub total_n_stag: usize,
    pub total_nr_u: usize,
    pub total_nr_d: usize,
    pub peak_force: f64,
}

impl RunReport {
    pub fn new(scheme: Scheme) -> Self {
        RunReport {
            scheme,
            rows: Vec::new(),
        }
    }

    pub fn summary(&self) -> Summary {
        Summary {
            scheme: self.scheme,
            max_n_stag: self.rows.iter().map(|r| r.n_stag).max().unwrap_or(0),
            total_n_stag: self.rows.iter().map(|r| r.n_stag).sum(),
            total_nr_u: self.rows.iter().map(|r| r.n_nr_u).sum(),
            total_nr_d: self.rows.iter().map(|r| r.n_nr_d).sum(),
            peak_force: self.rows.iter().map(|r| r.reaction.abs()).fold(0.0, f64::max),
        }
    }

    /// Step with the most staggered iterations (first one on ties).
    pub fn hardest_step(&self) -> Option<usize> {
        let max = self.rows.iter().map(|r| r.n_stag).max()?;
        self.rows.iter().position(|r| r.n_stag == max)
    }

    pub fn total_wall(&self) -> f64 {
        self.rows.iter().map(|r| r.wall).sum()
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Writes the per-step table to any sink.
pub fn write_steps<W: Write>(rows: &[StepRow], sink: W, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    w.write_record(STEP_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(CsvRow::from(r)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv(report: &RunReport, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_steps(&report.rows, f, path)
}

/// Reads a per-step table. Only the CSV columns are restored.
pub fn read_steps<R: Read>(source: R, path: &Path) -> Result<Vec<StepRow>> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(STEP_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    r.deserialize::<CsvRow>()
        .map(|row| {
            let c = row.map_err(|e| csv_err(path, e))?;
            Ok(StepRow {
                time: c.time,
                u: c.u,
                reaction: c.reaction,
                n_stag: c.n_stag,
                n_nr_u: c.n_nr_u,
                n_nr_d: c.n_nr_d,
                ..Default::default()
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<StepRow>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_steps(f, path)
}

pub fn write_sweep(rows: &[Summary], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sweep(path: &Path) -> Result<Vec<Summary>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(f);
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

/// Damage profiles of a bar, one row per staggered iteration and node.
pub fn write_profiles(profiles: &[Vec<f64>], length: f64, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["iteration", "x", "d"]).map_err(|e| csv_err(path, e))?;
    for (k, p) in profiles.iter().enumerate() {
        let n = p.len().saturating_sub(1).max(1);
        for (i, d) in p.iter().enumerate() {
            let x = length * i as f64 / n as f64;
            w.serialize((k + 1, x, d)).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
