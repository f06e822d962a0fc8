use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operators::{hermitian_residual, OperatorRep};
use super::{check_hbar, WaveFunction};
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};
use crate::spectral;

/// Largest basis size for density matrices.
pub const MAX_BASIS: usize = 256;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-10;
const TABLE_TOLERANCE: f64 = 1e-10;

/// Density matrix in the orthonormal grid basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    grid: ConfigGrid,
    matrix: DMatrix<Complex64>,
    hbar: f64,
}

impl DensityMatrix {
    /// Requires hermiticity to 1e-12 and unit trace to 1e-10.
    pub fn new(grid: ConfigGrid, matrix: DMatrix<Complex64>, hbar: f64) -> Result<Self> {
        let rho = Self::from_parts(grid, matrix, hbar)?;
        let residual = rho.hermitian_residual();
        if residual > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::arg("rho", format!("trace {tr:.12}, expected 1")));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(grid: ConfigGrid, matrix: DMatrix<Complex64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let n = grid.len();
        if n > MAX_BASIS {
            return Err(Error::Unsupported(format!("density matrices on {n} nodes (limit {MAX_BASIS})")));
        }
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::GridMismatch(format!(
                "{}x{} matrix for a grid of {n} nodes",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("density matrix"));
        }
        Ok(DensityMatrix { grid, matrix, hbar })
    }

    /// `|psi><psi|`.
    pub fn pure(psi: &WaveFunction) -> Result<Self> {
        let c = nalgebra::DVector::from_vec(psi.coefficients());
        Self::from_parts(psi.grid().clone(), &c * c.adjoint(), psi.hbar())
    }

    /// `sum_k w_k |psi_k><psi_k|` with non-negative weights summing to one.
    pub fn mixture(states: &[(f64, WaveFunction)]) -> Result<Self> {
        if states.iter().any(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::arg("weights", "must be non-negative"));
        }
        Self::weighted(states)
    }

    /// As [`DensityMatrix::mixture`] but admitting negative weights.
    #[cfg(feature = "signed-weights")]
    pub fn signed_mixture(states: &[(f64, WaveFunction)]) -> Result<Self> {
        Self::weighted(states)
    }

    fn weighted(states: &[(f64, WaveFunction)]) -> Result<Self> {
        let (_, first) = states.first().ok_or_else(|| Error::arg("states", "empty mixture"))?;
        let total: f64 = states.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::arg("weights", format!("sum to {total}, expected 1")));
        }
        let n = first.grid().len();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for (w, psi) in states {
            first.grid().ensure_same(psi.grid())?;
            let c = nalgebra::DVector::from_vec(psi.coefficients());
            m += (&c * c.adjoint()).scale(*w);
        }
        Self::new(first.grid().clone(), m, first.hbar())
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermitian_residual(&self) -> f64 {
        hermitian_residual(&self.matrix)
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Position density `<x|rho|x>` at the nodes.
    pub fn diagonal_density(&self) -> Vec<f64> {
        let dv = self.grid.cell_volume();
        (0..self.dim()).map(|i| self.matrix[(i, i)].re / dv).collect()
    }

    /// `tr(rho F)`.
    pub fn expectation(&self, op: &OperatorRep) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::arg("operator", "dimension differs from the density matrix"));
        }
        Ok((&self.matrix * op.matrix()).trace().re)
    }

    /// `max_ij |rho_ij - other_ij|`.
    pub fn max_entry_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
    }
}

/// Plane-wave coefficient table `rho~(k, k')` on a 1-D periodic chart,
/// indexed by signed integer mode numbers (`k = 2 pi m / L`).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDensity {
    grid: ConfigGrid,
    table: DMatrix<Complex64>,
}

impl FourierDensity {
    pub fn zeros(grid: ConfigGrid) -> Result<Self> {
        if grid.dim() != 1 || grid.boundary() != Boundary::Periodic {
            return Err(Error::Unsupported("Fourier density tables beyond 1-D periodic charts".into()));
        }
        let n = grid.len();
        if n > MAX_BASIS {
            return Err(Error::Unsupported(format!("Fourier tables on {n} modes (limit {MAX_BASIS})")));
        }
        Ok(FourierDensity {
            grid,
            table: DMatrix::zeros(n, n),
        })
    }

    /// Wraps a table in FFT bin order, requiring `rho~(k,k')* = rho~(k',k)`.
    pub fn from_table(grid: ConfigGrid, table: DMatrix<Complex64>) -> Result<Self> {
        let mut f = Self::zeros(grid)?;
        if table.shape() != f.table.shape() {
            return Err(Error::GridMismatch("table size differs from the mode count".into()));
        }
        f.table = table;
        f.validate()?;
        Ok(f)
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    /// The table in FFT bin order.
    pub fn table(&self) -> &DMatrix<Complex64> {
        &self.table
    }

    /// Signed modes `m` with `-n/2 <= m < n/2`.
    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.table.nrows();
        (0..n).map(move |j| spectral::mode_index(j, n))
    }

    fn bin(&self, m: i64) -> Result<usize> {
        let n = self.table.nrows() as i64;
        if m < -(n / 2) || m > (n - 1) / 2 {
            return Err(Error::arg("mode", format!("{m} outside the grid bandwidth")));
        }
        Ok(m.rem_euclid(n) as usize)
    }

    pub fn get(&self, m: i64, m_prime: i64) -> Result<Complex64> {
        Ok(self.table[(self.bin(m)?, self.bin(m_prime)?)])
    }

    /// Sets `rho~(m, m')` and its mirror `rho~(m', m) = conj`.
    pub fn set(&mut self, m: i64, m_prime: i64, value: Complex64) -> Result<()> {
        let (a, b) = (self.bin(m)?, self.bin(m_prime)?);
        if a == b && value.im != 0.0 {
            return Err(Error::arg("value", "diagonal entries must be real"));
        }
        self.table[(a, b)] = value;
        self.table[(b, a)] = value.conj();
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let residual = hermitian_residual(&self.table);
        if residual > TABLE_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        Ok(())
    }
}

/// Unitary map from plane-wave to grid coefficients,
/// `W_{ia} = exp(i k_a x_i) / sqrt(n)`.
fn plane_wave_basis(grid: &ConfigGrid) -> DMatrix<Complex64> {
    let n = grid.len();
    let x = grid.coords(0);
    let k = spectral::wavenumbers(n, grid.period(0));
    let s = (n as f64).sqrt().recip();
    DMatrix::from_fn(n, n, |i, a| Complex64::from_polar(s, k[a] * x[i]))
}

/// `rho = sum rho~(k, k') |k><k'|`, assembled in the plane-wave basis and
/// transformed to the grid basis.
pub fn density_from_fourier(coeffs: &FourierDensity, hbar: f64) -> Result<DensityMatrix> {
    coeffs.validate()?;
    let w = plane_wave_basis(&coeffs.grid);
    DensityMatrix::new(coeffs.grid.clone(), &w * &coeffs.table * w.adjoint(), hbar)
}

/// Inverse of [`density_from_fourier`].
pub fn fourier_from_density(rho: &DensityMatrix) -> Result<FourierDensity> {
    let grid = rho.grid().clone();
    let mut f = FourierDensity::zeros(grid)?;
    let w = plane_wave_basis(&f.grid);
    f.table = w.adjoint() * rho.matrix() * &w;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use std::f64::consts::PI;

    fn line(n: usize) -> ConfigGrid {
        make_uniform_grid(1, &[(0.0, 2.0 * PI)], n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn momentum_projector_has_flat_density() {
        let g = line(32);
        let mut f = FourierDensity::zeros(g.clone()).unwrap();
        f.set(3, 3, Complex64::new(1.0, 0.0)).unwrap();
        let rho = density_from_fourier(&f, 1.0).unwrap();
        for d in rho.diagonal_density() {
            assert!((d - 1.0 / (2.0 * PI)).abs() < 1e-14);
        }
        let psi = WaveFunction::plane_wave(g, 1.0, &[3.0]).unwrap();
        assert!(rho.max_entry_distance(&DensityMatrix::pure(&psi).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn round_trip_is_identity() {
        let g = line(16);
        let mut f = FourierDensity::zeros(g).unwrap();
        f.set(0, 0, Complex64::new(0.5, 0.0)).unwrap();
        f.set(2, 2, Complex64::new(0.3, 0.0)).unwrap();
        f.set(-1, -1, Complex64::new(0.2, 0.0)).unwrap();
        f.set(0, 2, Complex64::new(0.1, -0.2)).unwrap();
        f.set(-1, 2, Complex64::new(0.05, 0.05)).unwrap();
        let back = fourier_from_density(&density_from_fourier(&f, 1.0).unwrap()).unwrap();
        for (a, b) in back.table().iter().zip(f.table().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn two_mode_table_gives_non_negative_density() {
        let g = line(64);
        let mut f = FourierDensity::zeros(g.clone()).unwrap();
        let (p, q, c) = (0.6, 0.4, Complex64::new(0.3, 0.35));
        f.set(1, 1, Complex64::new(p, 0.0)).unwrap();
        f.set(-2, -2, Complex64::new(q, 0.0)).unwrap();
        f.set(1, -2, c).unwrap();
        let rho = density_from_fourier(&f, 1.0).unwrap();
        // direct assembly: (p + q + 2 Re(c e^{i(k1 - k2)x})) / L
        for (d, x) in rho.diagonal_density().iter().zip(g.coords(0)) {
            let expect = (p + q + 2.0 * (c * Complex64::from_polar(1.0, 3.0 * x)).re) / (2.0 * PI);
            assert!((d - expect).abs() < 1e-13);
            assert!(*d >= -1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian_tables() {
        let g = line(8);
        let mut t = DMatrix::<Complex64>::zeros(8, 8);
        t[(0, 0)] = Complex64::new(1.0, 0.0);
        t[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(FourierDensity::from_table(g, t), Err(Error::NotHermitian { .. })));
    }
}
