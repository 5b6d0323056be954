//! Trajectory, rate-report and figure-data files.
//!
//! CSV files are comma separated with a mandatory header row and `\n` line
//! endings. Reals are written with 17 significant digits so that every `f64`
//! survives a write/read round trip unchanged.

use std::io::{Read, Write};

use thiserror::Error;

use crate::adversarial::FigureRow;
use crate::analysis::RateReport;
use crate::instance::Point;
use crate::solver::{IterateRecord, Trajectory};

pub const TRAJECTORY_HEADER: [&str; 5] = ["k", "x", "f", "grad_norm", "step_norm"];
pub const REPORT_HEADER: [&str; 6] = ["k", "lhs", "rhs", "rhs_loose", "lhs_floor_divisor", "pass"];
pub const FIGURE_HEADER: [&str; 4] = ["x", "f", "g", "h"];

#[derive(Debug, Error)]
pub enum FileError {
    #[error("empty trajectory file")]
    Empty,
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_point(p: &Point) -> String {
    p.iter().map(|&c| fmt_f64(c)).collect::<Vec<_>>().join(";")
}

pub fn write_trajectory<W: Write>(
    traj: &Trajectory,
    format: Format,
    out: W,
) -> Result<(), FileError> {
    match format {
        Format::Csv => write_trajectory_csv(traj, out),
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, traj)?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<(), FileError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for r in &traj.records {
        w.write_record([
            r.k.to_string(),
            fmt_point(&r.x),
            fmt_f64(r.f),
            fmt_f64(r.grad_f_norm),
            fmt_f64(r.step_norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory written as CSV or JSON; the format is detected from
/// the first non-blank character.
pub fn read_trajectory<R: Read>(mut input: R) -> Result<Trajectory, FileError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Err(FileError::Empty);
    }
    let traj = if trimmed.starts_with('{') {
        let traj: Trajectory = serde_json::from_str(&text)?;
        validate_indices(&traj, |_| 0)?;
        traj
    } else {
        read_trajectory_csv(text.as_bytes())?
    };
    if traj.is_empty() {
        return Err(FileError::Empty);
    }
    Ok(traj)
}

fn validate_indices(traj: &Trajectory, line_of: impl Fn(usize) -> u64) -> Result<(), FileError> {
    for (i, r) in traj.records.iter().enumerate() {
        if r.k != i {
            return Err(FileError::Parse {
                line: line_of(i),
                msg: format!("expected iteration index {i}, found {}", r.k),
            });
        }
    }
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory, FileError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(FileError::Parse {
            line: 1,
            msg: format!(
                "expected header {:?}, found {:?}",
                TRAJECTORY_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| match e.position() {
            Some(pos) => FileError::Parse {
                line: pos.line(),
                msg: e.to_string(),
            },
            None => FileError::Csv(e),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |msg: String| FileError::Parse { line, msg };
        let real = |idx: usize, name: &str| -> Result<f64, FileError> {
            let v: f64 = row[idx]
                .trim()
                .parse()
                .map_err(|e| err(format!("column {name}: {e} ({:?})", &row[idx])))?;
            if !v.is_finite() {
                return Err(err(format!("column {name}: non-finite value")));
            }
            Ok(v)
        };
        let k: usize = row[0]
            .trim()
            .parse()
            .map_err(|e| err(format!("column k: {e} ({:?})", &row[0])))?;
        let coords = row[1]
            .split(';')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(format!("column x: {e} ({:?})", &row[1])))?;
        let x = Point::new(coords).map_err(|e| err(format!("column x: {e}")))?;
        let rec = IterateRecord {
            k,
            x,
            f: real(2, "f")?,
            g: None,
            h: None,
            grad_f_norm: real(3, "grad_norm")?,
            step_norm: real(4, "step_norm")?,
        };
        if rec.grad_f_norm < 0.0 || rec.step_norm < 0.0 {
            return Err(err("negative norm".into()));
        }
        if rec.k != records.len() {
            return Err(err(format!(
                "expected iteration index {}, found {}",
                records.len(),
                rec.k
            )));
        }
        records.push(rec);
    }
    Ok(Trajectory {
        records,
        terminated_by: None,
    })
}

pub fn write_report<W: Write>(
    report: &RateReport,
    format: Format,
    out: W,
) -> Result<(), FileError> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            out.write_all(b"\n")?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(REPORT_HEADER)?;
            for c in &report.per_k {
                w.write_record([
                    c.k.to_string(),
                    fmt_f64(c.lhs),
                    fmt_f64(c.rhs),
                    fmt_f64(c.rhs_loose),
                    fmt_f64(c.lhs_floor_divisor),
                    c.pass.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_figure_csv<W: Write>(rows: &[FigureRow], out: W) -> Result<(), FileError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE_HEADER)?;
    for r in rows {
        w.write_record([fmt_f64(r.x), fmt_f64(r.f), fmt_f64(r.g), fmt_f64(r.h)])?;
    }
    w.flush()?;
    Ok(())
}
