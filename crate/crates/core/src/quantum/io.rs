//! Little-endian state layout:
//!
//! ```text
//! u32 dim
//! u32 points[dim]
//! u32 boundary        0 = periodic, 1 = box
//! f64 lo, hi          per axis
//! f64 hbar
//! f64 re, im          per node, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::Serialize;

use super::WaveFunction;
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};

pub(crate) struct FieldHeader {
    pub points: Vec<usize>,
    pub boundary: u32,
    pub extents: Vec<(f64, f64)>,
    pub hbar: f64,
}

pub(crate) fn write_field(w: &mut impl Write, header: &FieldHeader, values: &[Complex64]) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(header.points.len() as u32)?;
    for &n in &header.points {
        w.write_u32::<LittleEndian>(n as u32)?;
    }
    w.write_u32::<LittleEndian>(header.boundary)?;
    for &(lo, hi) in &header.extents {
        w.write_f64::<LittleEndian>(lo)?;
        w.write_f64::<LittleEndian>(hi)?;
    }
    w.write_f64::<LittleEndian>(header.hbar)?;
    for z in values {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    w.flush()
}

pub(crate) fn read_field(r: &mut impl Read) -> std::io::Result<(FieldHeader, Vec<Complex64>)> {
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(bad("dimension out of range"));
    }
    let points = (0..dim)
        .map(|_| r.read_u32::<LittleEndian>().map(|n| n as usize))
        .collect::<std::io::Result<Vec<_>>>()?;
    let boundary = r.read_u32::<LittleEndian>()?;
    let extents = (0..dim)
        .map(|_| Ok((r.read_f64::<LittleEndian>()?, r.read_f64::<LittleEndian>()?)))
        .collect::<std::io::Result<Vec<_>>>()?;
    let hbar = r.read_f64::<LittleEndian>()?;
    let len = points
        .iter()
        .try_fold(1usize, |a, &n| a.checked_mul(n))
        .filter(|&n| n <= 1 << 28)
        .ok_or_else(|| bad("payload too large"))?;
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        values.push(Complex64::new(r.read_f64::<LittleEndian>()?, r.read_f64::<LittleEndian>()?));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes after payload"));
    }
    Ok((
        FieldHeader {
            points,
            boundary,
            extents,
            hbar,
        },
        values,
    ))
}

pub fn write_state(path: &Path, psi: &WaveFunction) -> Result<()> {
    let grid = psi.grid();
    let header = FieldHeader {
        points: grid.shape(),
        boundary: match grid.boundary() {
            Boundary::Periodic => 0,
            Boundary::BoxDoubled => 1,
        },
        extents: grid.axes().iter().map(|a| (a.lo, a.hi)).collect(),
        hbar: psi.hbar(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_field(&mut BufWriter::new(file), &header, psi.values()).map_err(|e| Error::io(path, e))
}

/// Reads a state written by [`write_state`]; the norm is checked, not
/// restored.
pub fn read_state(path: &Path) -> Result<WaveFunction> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (header, values) = read_field(&mut BufReader::new(file)).map_err(|e| Error::io(path, e))?;
    let boundary = match header.boundary {
        0 => Boundary::Periodic,
        1 => Boundary::BoxDoubled,
        b => return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, format!("boundary code {b}")))),
    };
    let grid = ConfigGrid::new(&header.extents, &header.points, boundary)?;
    WaveFunction::new(grid, values, header.hbar)
}

/// One row of a quantum time series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumSeriesRow {
    pub t: f64,
    pub norm: f64,
    pub trace: f64,
    pub herm_residual: f64,
    pub picture_gap: f64,
    pub moment_residual: f64,
}

pub fn write_quantum_csv(path: &Path, rows: &[QuantumSeriesRow]) -> Result<()> {
    let to_err = |e: csv::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    for row in rows {
        w.serialize(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
