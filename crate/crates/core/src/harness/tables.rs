//! CSV files. Every float is written with 17 significant digits, so
//! reading a file back gives the same doubles.

use std::path::Path;

use crate::coupled::{FullRecord, NormRecord};
use crate::error::{Error, Result};
use crate::numerics::{ComplexField, Grid1D, RealField, TimeSeries, C64};

pub const FIELDS_HEADER: [&str; 4] = ["x", "re_u", "im_u", "v_tilde"];
pub const MEASURE_HEADER: [&str; 2] = ["t", "psi"];
pub const NORMS_HEADER: [&str; 7] = ["t", "mass", "h1_u", "l2_vtilde", "hm1_v", "energy", "shock_energy"];
pub const FULL_NORMS_HEADER: [&str; 5] = ["t", "mass", "h1_u", "l2_v", "hm1_v"];

/// Header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
        w.write_record(&self.header).map_err(|e| io_error(path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| fmt(v))).map_err(|e| io_error(path, e))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
        let header = r
            .headers()
            .map_err(|e| io_error(path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| io_error(path, e))?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Config(format!("{}: row {}: cannot parse `{s}`", path.display(), i + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_error(path: &Path, e: csv::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source: e.into(),
    }
}

pub fn fields_table(grid: &Grid1D, u: &[C64], v: &[f64]) -> Table {
    let mut t = Table::new(&FIELDS_HEADER);
    for k in 0..grid.len() {
        t.push(vec![grid.x(k), u[k].re, u[k].im, v[k]]);
    }
    t
}

pub fn write_fields(path: &Path, grid: &Grid1D, u: &[C64], v: &[f64]) -> Result<()> {
    grid.check(u)?;
    grid.check(v)?;
    fields_table(grid, u, v).write(path)
}

/// Fields file back as `(x, u, v)`.
pub fn read_fields(path: &Path) -> Result<(RealField, ComplexField, RealField)> {
    let t = Table::read(path)?;
    if t.header != FIELDS_HEADER {
        return Err(Error::Config(format!(
            "{}: expected header {}, got {}",
            path.display(),
            FIELDS_HEADER.join(","),
            t.header.join(",")
        )));
    }
    let x = t.rows.iter().map(|r| r[0]).collect();
    let u = t.rows.iter().map(|r| C64::new(r[1], r[2])).collect();
    let v = t.rows.iter().map(|r| r[3]).collect();
    Ok((x, u, v))
}

pub fn measure_table(psi: &TimeSeries) -> Table {
    let mut t = Table::new(&MEASURE_HEADER);
    for (time, p) in psi.iter() {
        t.push(vec![time, p]);
    }
    t
}

pub fn norms_table(records: &[NormRecord]) -> Table {
    let mut t = Table::new(&NORMS_HEADER);
    for r in records {
        t.push(r.values().to_vec());
    }
    t
}

pub fn full_norms_table(records: &[FullRecord]) -> Table {
    let mut t = Table::new(&FULL_NORMS_HEADER);
    for r in records {
        t.push(r.values().to_vec());
    }
    t
}
