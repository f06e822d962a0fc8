//! Wave functions and density matrices for the canonical Hamiltonian class:
//! split-step and Crank-Nicolson propagation, unitary conjugation of density
//! matrices, observables built from position and momentum operators, and the
//! moment, picture and Madelung checks.
//!
//! Dense representations use the orthonormal grid basis with coefficients
//! `c_i = psi(x_i) sqrt(dV)`, so `trace(rho) = int |psi|^2 = 1`.

mod checks;
mod density;
mod evolution;
pub(crate) mod io;
mod kinetic;
mod madelung;
mod operators;

pub use checks::{
    angular_momentum_expectation, box_eigenstates, box_wall_density, heisenberg_expectation, picture_gap,
    verify_moment_equations, MomentReport,
};
pub use density::{density_from_fourier, fourier_from_density, DensityMatrix, FourierDensity, MAX_BASIS};
pub use evolution::{step_quantum_liouville, step_schrodinger, ExactPropagator, SchrodingerStepper};
pub use io::{read_state, write_quantum_csv, write_state, QuantumSeriesRow};
pub use madelung::{madelung_fields, madelung_fields_with_floor, MadelungFields, DEFAULT_NODE_FLOOR};
pub use operators::{
    build_observable, hamiltonian_operator, momentum_operator, position_operator, ObservableTerm, OperatorRep,
};
pub(crate) use operators::hermitian_residual;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};

/// Unit-norm tolerance accepted by [`WaveFunction::new`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Complex wave function sampled on a configuration grid. On box grids the
/// samples are the interior of an odd reflection, so `psi` vanishes at the
/// walls.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    grid: ConfigGrid,
    values: Vec<Complex64>,
    hbar: f64,
}

impl WaveFunction {
    /// Requires `int |psi|^2 = 1` within [`NORM_TOLERANCE`].
    pub fn new(grid: ConfigGrid, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        let psi = Self::unchecked(grid, values, hbar)?;
        let norm = psi.norm_squared();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::arg("psi", format!("norm^2 = {norm:.12}, expected 1")));
        }
        Ok(psi)
    }

    /// Rescales `values` to unit norm.
    pub fn normalized(grid: ConfigGrid, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        let mut psi = Self::unchecked(grid, values, hbar)?;
        let norm = psi.norm_squared();
        if !(norm > 0.0) {
            return Err(Error::arg("psi", "zero wave function"));
        }
        let s = norm.sqrt().recip();
        psi.values.iter_mut().for_each(|z| *z *= s);
        Ok(psi)
    }

    fn unchecked(grid: ConfigGrid, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::arg("hbar", "must be positive and finite"));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("wave function"));
        }
        Ok(WaveFunction { grid, values, hbar })
    }

    /// Samples `f` and normalizes.
    pub fn from_fn(grid: ConfigGrid, hbar: f64, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::normalized(grid, values, hbar)
    }

    /// Gaussian packet `exp(-|x - x0|^2 / (4 sigma^2) + i p0.x / hbar)`, where
    /// `sigma` is the position standard deviation of `|psi|^2`.
    pub fn gaussian_packet(
        grid: ConfigGrid,
        hbar: f64,
        center: &[f64],
        momentum: &[f64],
        sigma: f64,
    ) -> Result<Self> {
        let d = grid.dim();
        if center.len() != d || momentum.len() != d {
            return Err(Error::arg("gaussian_packet", "center and momentum must match the grid dimension"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::arg("sigma", "must be positive"));
        }
        Self::from_fn(grid, hbar, |x| {
            let mut e = 0.0;
            let mut phase = 0.0;
            for a in 0..d {
                e += (x[a] - center[a]).powi(2);
                phase += momentum[a] * x[a];
            }
            Complex64::from_polar((-e / (4.0 * sigma * sigma)).exp(), phase / hbar)
        })
    }

    /// Coherent state of the isotropic oscillator with frequency `omega`.
    pub fn coherent_state(grid: ConfigGrid, hbar: f64, omega: f64, center: &[f64], momentum: &[f64]) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::arg("omega", "must be positive"));
        }
        Self::gaussian_packet(grid, hbar, center, momentum, (hbar / (2.0 * omega)).sqrt())
    }

    /// `exp(i k.x) / sqrt(V)` on a periodic grid.
    pub fn plane_wave(grid: ConfigGrid, hbar: f64, k: &[f64]) -> Result<Self> {
        if grid.boundary() != Boundary::Periodic {
            return Err(Error::Unsupported("plane waves on box grids".into()));
        }
        if k.len() != grid.dim() {
            return Err(Error::arg("k", "length must match the grid dimension"));
        }
        Self::from_fn(grid, hbar, |x| {
            Complex64::from_polar(1.0, x.iter().zip(k).map(|(a, b)| a * b).sum())
        })
    }

    /// Wraps orthonormal-basis coefficients `c_i = psi_i sqrt(dV)`.
    pub fn from_coefficients(grid: ConfigGrid, coeffs: &[Complex64], hbar: f64) -> Result<Self> {
        let s = grid.cell_volume().sqrt().recip();
        Self::normalized(grid, coeffs.iter().map(|c| c * s).collect(), hbar)
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `int |psi|^2`.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        let s = self.grid.cell_volume().sqrt();
        self.values.iter().map(|z| z * s).collect()
    }

    /// `int conj(self) other`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `<psi|F|psi>`; the real part for hermitian `F`.
    pub fn expectation(&self, op: &OperatorRep) -> Result<f64> {
        let c = self.coefficients();
        let fc = op.apply(&c)?;
        Ok(c.iter().zip(&fc).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
    }

    /// `<x_a>` for every axis.
    pub fn position_mean(&self) -> Vec<f64> {
        let dv = self.grid.cell_volume();
        let mut out = vec![0.0; self.grid.dim()];
        let mut x = vec![0.0; self.grid.dim()];
        for (i, z) in self.values.iter().enumerate() {
            self.grid.point_into(i, &mut x);
            let w = z.norm_sqr();
            for a in 0..out.len() {
                out[a] += w * x[a];
            }
        }
        out.iter_mut().for_each(|v| *v *= dv);
        out
    }

    /// `max_i |psi_i - other_i|`.
    pub fn max_distance(&self, other: &WaveFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())))
    }
}

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::arg("hbar", "must be positive and finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;

    #[test]
    fn gaussian_packet_is_normalized_and_centred() {
        let g = make_uniform_grid(1, &[(-10.0, 10.0)], 128, Boundary::Periodic).unwrap();
        let psi = WaveFunction::gaussian_packet(g, 1.0, &[1.5], &[0.3], 0.8).unwrap();
        assert!((psi.norm_squared() - 1.0).abs() < 1e-13);
        assert!((psi.position_mean()[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized_samples() {
        let g = make_uniform_grid(1, &[(0.0, 1.0)], 16, Boundary::Periodic).unwrap();
        let v = vec![Complex64::new(2.0, 0.0); 16];
        assert!(WaveFunction::new(g.clone(), v.clone(), 1.0).is_err());
        assert!(WaveFunction::normalized(g, v, 1.0).is_ok());
    }

    #[test]
    fn coefficients_round_trip() {
        let g = make_uniform_grid(2, &[(-4.0, 4.0)], 16, Boundary::Periodic).unwrap();
        let psi = WaveFunction::gaussian_packet(g.clone(), 0.5, &[0.5, -0.5], &[1.0, 0.0], 1.0).unwrap();
        let c = psi.coefficients();
        let n: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-13);
        let back = WaveFunction::from_coefficients(g, &c, 0.5).unwrap();
        assert!(back.max_distance(&psi).unwrap() < 1e-14);
    }
}
