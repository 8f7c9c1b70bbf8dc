//! Field serialization: CSV `(x, value)`, a little-endian binary checkpoint
//! and JSON sidecars.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use super::grid::Grid1D;
use crate::error::{Result, WwError};

pub const MAGIC: &[u8; 6] = b"WWLAB1";

pub fn write_field_csv(path: &Path, grid: &Grid1D, f: &[f64]) -> Result<()> {
    grid.check_len(f, "csv field")?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "x,value")?;
    for (x, v) in grid.nodes().iter().zip(f) {
        writeln!(out, "{x:.17e},{v:.17e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rd = BufReader::new(fs::File::open(path)?);
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for (i, line) in rd.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "x,value" {
                return Err(WwError::Format(format!("unexpected csv header {line:?}")));
            }
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| WwError::Format(format!("short csv row {}", i + 1)))?
                .trim()
                .parse()
                .map_err(|e| WwError::Format(format!("row {}: {e}", i + 1)))
        };
        xs.push(parse(it.next())?);
        vs.push(parse(it.next())?);
    }
    Ok((xs, vs))
}

/// Generic table with a fixed header line.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Header, then `data` as raw `f64` values. `data` may hold several stacked fields.
pub fn write_checkpoint(path: &Path, grid: &Grid1D, data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(22 + 8 * data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&grid.length().to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Returns `(L, N, data)`.
pub fn read_checkpoint(path: &Path) -> Result<(f64, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 22 || &bytes[..6] != MAGIC {
        return Err(WwError::Format("not a checkpoint file".into()));
    }
    let l = f64::from_le_bytes(bytes[6..14].try_into().unwrap());
    let n = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
    let body = &bytes[22..];
    if body.len() % 8 != 0 {
        return Err(WwError::Format("truncated checkpoint body".into()));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((l, n, data))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| WwError::Format(e.to_string()))?;
    fs::write(path, s)?;
    Ok(())
}
