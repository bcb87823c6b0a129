//! CSV interchange: one row per observation, columns `x0..x{p-1}` then `y`.
//! Either block may be absent (Ising spins have no `y`, trend series no `x`).

use std::io::{Read, Write};

use ndarray::{Array2, ShapeBuilder};

use crate::error::{Result, ScoError};

use super::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x: Option<Array2<f64>>,
    pub y: Option<Vec<f64>>,
}

pub fn write_csv<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let p = data.x.as_ref().map_or(0, |x| x.ncols());
    let mut header: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    if data.y.is_some() {
        header.push("y".into());
    }
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        if let Some(x) = &data.x {
            row.extend(x.row(i).iter().map(|v| v.to_string()));
        }
        if let Some(y) = &data.y {
            row.push(y[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Table> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let mut p = 0;
    let mut has_y = false;
    for (k, name) in header.iter().enumerate() {
        let name = name.trim();
        if name == "y" && k + 1 == header.len() {
            has_y = true;
        } else if name == format!("x{k}") {
            p += 1;
        } else {
            return Err(ScoError::Data(format!("unexpected column `{name}` at position {k}")));
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(ScoError::Data(format!("row {} has {} fields", line + 1, rec.len())));
        }
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| ScoError::Data(format!("row {}: `{field}` is not a number", line + 1)))?;
            if k < p {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    let n = if p > 0 { xs.len() / p } else { ys.len() };
    let x = if p > 0 {
        let rowmajor = Array2::from_shape_vec((n, p), xs).map_err(|e| ScoError::Data(e.to_string()))?;
        let mut f = Array2::zeros((n, p).f());
        f.assign(&rowmajor);
        Some(f)
    } else {
        None
    };
    Ok(Table {
        x,
        y: has_y.then_some(ys),
    })
}
