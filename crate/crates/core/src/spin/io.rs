use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use super::{CommutatorRow, Eigencheck, SpinField, SpinWeight};
use crate::error::{Error, Result};
use crate::grid::SphericalGrid;
use crate::quantum::io::{read_field, write_field, FieldHeader};

/// Boundary codes of sphere fields in the shared state layout; points are
/// `(n_theta, n_phi)` and extents `(0, pi), (0, 2 pi)`.
const SPHERE_WEIGHT_ZERO: u32 = 2;
const SPHERE_WEIGHT_HALF: u32 = 3;

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn write_spin_state(path: &Path, f: &SpinField) -> Result<()> {
    let grid = f.grid();
    let header = FieldHeader {
        points: vec![grid.n_theta(), grid.n_phi()],
        boundary: match f.weight() {
            SpinWeight::Zero => SPHERE_WEIGHT_ZERO,
            SpinWeight::Half => SPHERE_WEIGHT_HALF,
        },
        extents: vec![(0.0, std::f64::consts::PI), (0.0, 2.0 * std::f64::consts::PI)],
        hbar: f.hbar(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_field(&mut BufWriter::new(file), &header, f.values()).map_err(|e| Error::io(path, e))
}

pub fn read_spin_state(path: &Path) -> Result<SpinField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let (header, values) = read_field(&mut BufReader::new(file)).map_err(|e| Error::io(path, e))?;
    let bad = |m: &str| Error::Io {
        path: path.display().to_string(),
        message: m.to_string(),
    };
    let weight = match header.boundary {
        SPHERE_WEIGHT_ZERO => SpinWeight::Zero,
        SPHERE_WEIGHT_HALF => SpinWeight::Half,
        _ => return Err(bad("not a sphere field")),
    };
    if header.points.len() != 2 || header.points[0] < 3 {
        return Err(bad("malformed sphere header"));
    }
    let grid = SphericalGrid::new(header.points[0] - 2)?;
    if grid.n_phi() != header.points[1] {
        return Err(bad("azimuth count does not match the colatitude count"));
    }
    SpinField::new(grid, weight, values, header.hbar)
}

pub fn write_eigencheck_csv(path: &Path, rows: &[(String, Eigencheck)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["state", "casimir", "z_component", "casimir_residual", "z_residual"])
        .map_err(csv_err(path))?;
    for (label, e) in rows {
        w.write_record([
            label.clone(),
            e.casimir.to_string(),
            e.z_component.to_string(),
            e.casimir_residual.to_string(),
            e.z_residual.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_commutator_csv(path: &Path, rows: &[CommutatorRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::spin_eigencheck;

    #[test]
    fn sphere_state_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("up.bin");
        let g = SphericalGrid::new(5).unwrap();
        let up = SpinField::half_spin(g, true, 0.5).unwrap();
        write_spin_state(&path, &up).unwrap();
        assert_eq!(read_spin_state(&path).unwrap(), up);
        assert!(crate::quantum::read_state(&path).is_err());
    }

    #[test]
    fn eigencheck_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let g = SphericalGrid::new(5).unwrap();
        let e = spin_eigencheck(&SpinField::half_spin(g, true, 1.0).unwrap()).unwrap();
        write_eigencheck_csv(&path, &[("up".into(), e)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("state,casimir,z_component,casimir_residual,z_residual\nup,0.75"));
    }
}
