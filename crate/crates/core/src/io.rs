//! CSV artifacts: coefficient tables, surface transforms, result rows, shells.
//!
//! Files are UTF-8 with LF line endings and `.` decimals. Floats are written
//! with Rust's shortest round-trip formatting.

use crate::counting::LatticeShell;
use crate::domain::{Coefficients, Support};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CoefficientRow {
    n: String,
    re: f64,
    im: f64,
}

fn parse_index(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad index component {t:?}"))))
        .collect()
}

/// Writes `n,re,im`; multi-indices are comma-joined inside one quoted field.
pub fn write_coefficients<W: Write>(a: &Coefficients, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for (i, z) in a.values().iter().enumerate() {
        let idx = a.support().index(i);
        let n = idx.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        w.serialize(CoefficientRow { n, re: z.re, im: z.im })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `n,re,im`. Consecutive scalar indices give an interval support.
pub fn parse_coefficients<R: Read>(input: R) -> Result<Coefficients> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["n", "re", "im"] {
        return Err(Error::Parse(format!("expected header n,re,im, got {:?}", headers)));
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for row in r.deserialize::<CoefficientRow>() {
        let row = row?;
        points.push(parse_index(&row.n)?);
        values.push(Complex64::new(row.re, row.im));
    }
    if points.is_empty() {
        return Err(Error::Parse("coefficient file has no rows".into()));
    }
    let scalar = points.iter().all(|p| p.len() == 1);
    let consecutive = scalar && points.windows(2).all(|w| w[1][0] == w[0][0] + 1);
    if consecutive {
        Coefficients::interval(points[0][0], values)
    } else {
        Coefficients::new(Support::Points { points }, values)
    }
}

pub fn read_coefficients(path: &Path) -> Result<Coefficients> {
    parse_coefficients(std::fs::File::open(path)?)
}

/// Writes `xi_1,…,xi_d,re,im,abs`.
pub fn write_surface_table<W: Write>(rows: &[(Vec<f64>, Complex64)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let d = rows.first().map_or(0, |r| r.0.len());
    let mut header: Vec<String> = (1..=d).map(|k| format!("xi_{k}")).collect();
    header.extend(["re", "im", "abs"].map(String::from));
    w.write_record(&header)?;
    for (xi, z) in rows {
        if xi.len() != d {
            return Err(Error::Parse("surface rows have mixed dimensions".into()));
        }
        let mut rec: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
        rec.extend([z.re, z.im, z.norm()].map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One line of the experiment results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub experiment: String,
    pub d: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<i64>,
    pub p: Option<f64>,
    pub j: Option<u32>,
    pub method: String,
    pub value: f64,
    pub stderr: f64,
    pub seed: Option<u64>,
    pub wall_ms: u64,
}

impl ResultRow {
    pub fn new(experiment: impl Into<String>, method: impl Into<String>, value: f64, stderr: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            d: None,
            n: None,
            p: None,
            j: None,
            method: method.into(),
            value,
            stderr,
            seed: None,
            wall_ms: 0,
        }
    }
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Writes `N,x,y` for every shell point.
pub fn write_shell<W: Write>(shell: &LatticeShell, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["N", "x", "y"])?;
    for &(x, y) in &shell.points {
        w.write_record([shell.n.to_string(), x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
