//! Classical evolution on phase space: the grid Liouville equation, the
//! canonical characteristics, and Lie-Poisson transport of a Lagrange
//! foliation, together with the reconstruction that ties them together.

mod characteristics;
mod equivalence;
mod leaves;
mod liouville;
mod pchip;

pub use characteristics::{
    integrate_trajectory, step_characteristics, CharacteristicsEnsemble, Trajectory, TrajectorySample,
};
pub use equivalence::{
    verify_classical_equivalence, ClassicalSeriesRow, EquivalenceOptions, EquivalenceReport, ResolutionResult,
};
pub use leaves::{
    reconstruct_phase_density, step_lie_poisson_leaf, EmergenceMomentum, Foliation, FoliationLeaf, LeafOptions,
    LeafTransport, Reconstruction,
};
pub use liouville::{step_liouville, LiouvilleOptions, LiouvilleSolver};
pub use pchip::{pchip_interpolate, Interpolation};

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::hamiltonian::{HamiltonianSpec, SampledHamiltonian};

/// Probability density on a phase grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceDensity {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl PhaseSpaceDensity {
    /// Rejects negative or non-finite samples. Mass is not checked; see
    /// [`PhaseSpaceDensity::normalized`].
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a phase grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase-space density"));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::arg("density", "negative sample"));
        }
        Ok(PhaseSpaceDensity { grid, values })
    }

    /// Numerical solutions may undershoot zero by rounding-sized amounts.
    pub(crate) fn from_solver(grid: PhaseGrid, values: Vec<f64>) -> Self {
        PhaseSpaceDensity { grid, values }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let (x, p) = grid.point(i);
                f(&x, &p)
            })
            .collect();
        Self::new(grid, values)
    }

    /// Uniform density of unit mass.
    pub fn uniform(grid: PhaseGrid) -> Self {
        let v = 1.0 / (grid.len() as f64 * grid.cell_volume());
        let n = grid.len();
        PhaseSpaceDensity {
            grid,
            values: vec![v; n],
        }
    }

    /// Product Gaussian with standard deviations `widths` (x then p),
    /// normalized to unit discrete mass.
    pub fn gaussian(grid: PhaseGrid, center_x: &[f64], center_p: &[f64], widths: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if center_x.len() != d || center_p.len() != d || widths.len() != 2 * d {
            return Err(Error::arg("gaussian", "center and width lengths must match the grid"));
        }
        if widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::arg("widths", "must be positive"));
        }
        let rho = Self::from_fn(grid, |x, p| {
            let mut e = 0.0;
            for a in 0..d {
                e += ((x[a] - center_x[a]) / widths[a]).powi(2);
                e += ((p[a] - center_p[a]) / widths[d + a]).powi(2);
            }
            (-0.5 * e).exp()
        })?;
        rho.normalized()
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescaled to unit mass.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::arg("density", "mass must be positive"));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(self)
    }

    /// `int |rho - other| dx dp`.
    pub fn l1_distance(&self, other: &PhaseSpaceDensity) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `int rho f dx dp`.
    pub fn expectation(&self, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                let (x, p) = self.grid.point(i);
                acc += v * f(&x, &p);
            }
        }
        acc * self.grid.cell_volume()
    }

    /// Mean energy `int rho H`.
    pub fn energy_mean(&self, h: &HamiltonianSpec) -> Result<f64> {
        let sampled = SampledHamiltonian::new(h, self.grid.x())?;
        let p_len = self.grid.p_len();
        let mut acc = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                let (_, p) = self.grid.point(i);
                acc += v * sampled.eval(i / p_len, &p);
            }
        }
        Ok(acc * self.grid.cell_volume())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_uniform_grid, Boundary};

    fn grid() -> PhaseGrid {
        let x = make_uniform_grid(1, &[(-6.0, 6.0)], 64, Boundary::Periodic).unwrap();
        PhaseGrid::symmetric(x, 6.0, 64).unwrap()
    }

    #[test]
    fn gaussian_has_unit_mass_and_expected_energy() {
        let rho = PhaseSpaceDensity::gaussian(grid(), &[0.0], &[0.0], &[1.0, 1.0]).unwrap();
        assert!((rho.mass() - 1.0).abs() < 1e-14);
        // <p^2/2 + x^2/2> = 1 for unit widths
        let e = rho.energy_mean(&HamiltonianSpec::harmonic(1, 1.0)).unwrap();
        assert!((e - 1.0).abs() < 1e-6, "{e}");
    }

    #[test]
    fn rejects_negative_values() {
        let g = grid();
        let n = g.len();
        let mut v = vec![0.0; n];
        v[3] = -1e-3;
        assert!(PhaseSpaceDensity::new(g, v).is_err());
    }

    #[test]
    fn l1_distance_of_identical_densities() {
        let rho = PhaseSpaceDensity::uniform(grid());
        assert_eq!(rho.l1_distance(&rho).unwrap(), 0.0);
        assert!((rho.mass() - 1.0).abs() < 1e-12);
    }
}
