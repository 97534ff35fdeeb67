//! CSV persistence for time series, atoms, and convergence traces.
//!
//! Every signal file starts with the header `index,value` and stores one
//! sample per row. Values are written with 17 significant digits, which is
//! enough for an f64 to survive a write/read round trip bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{usage, CliError};

pub fn write_series(path: &Path, values: &[f64]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<Vec<f64>, CliError> {
    let file = File::open(path)
        .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(header)) if header.trim() == "index,value" => {}
        _ => {
            return Err(usage(format!(
                "{}: expected header \"index,value\"",
                path.display()
            )))
        }
    }
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (index, value) = line
            .split_once(',')
            .ok_or_else(|| usage(format!("{}: row {row} is not index,value", path.display())))?;
        let index: usize = index
            .trim()
            .parse()
            .map_err(|_| usage(format!("{}: bad index on row {row}", path.display())))?;
        if index != values.len() {
            return Err(usage(format!(
                "{}: indices must be consecutive from 0 (row {row} has {index})",
                path.display()
            )));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("{}: bad value on row {row}", path.display())))?;
        values.push(value);
    }
    Ok(values)
}

/// Atoms share one file with a `channel,index,value` layout.
pub fn write_atoms(path: &Path, kernels: &[Vec<f64>]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "channel,index,value")?;
    for (channel, kernel) in kernels.iter().enumerate() {
        for (i, v) in kernel.iter().enumerate() {
            writeln!(out, "{channel},{i},{v:.16e}")?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per iteration: the modified energy and the raw data term.
pub fn write_convergence(path: &Path, rows: &[(usize, f64, f64)]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| usage(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "iter,psi,data_term")?;
    for (iter, psi, data_term) in rows {
        writeln!(out, "{iter},{psi:.16e},{data_term:.16e}")?;
    }
    out.flush()?;
    Ok(())
}
