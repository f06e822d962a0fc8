use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Boundary, ConfigGrid, CovectorField};
use crate::error::{Error, Result};
use crate::spectral;

/// Unit-modulus phase field `eta = exp(i * factor * phase)` on a grid.
///
/// The phase is stored unwrapped. With the default doubled convention
/// (`factor = 2`) the momentum `-i (hbar / factor) eta^{-1} d eta` is
/// `hbar * grad(phase)` independently of the factor.
#[derive(Clone, Debug, PartialEq)]
pub struct SynchronicityField {
    grid: ConfigGrid,
    phase: Vec<f64>,
    hbar: f64,
    factor: f64,
}

impl SynchronicityField {
    pub const DOUBLED: f64 = 2.0;

    pub fn new(grid: ConfigGrid, phase: Vec<f64>, hbar: f64) -> Result<Self> {
        Self::with_factor(grid, phase, hbar, Self::DOUBLED)
    }

    pub fn with_factor(grid: ConfigGrid, phase: Vec<f64>, hbar: f64, factor: f64) -> Result<Self> {
        if phase.len() != grid.len() {
            return Err(Error::GridMismatch("phase length differs from node count".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::arg("hbar", "must be positive and finite"));
        }
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::arg("factor", "must be positive and finite"));
        }
        if phase.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("synchronicity phase"));
        }
        Ok(SynchronicityField {
            grid,
            phase,
            hbar,
            factor,
        })
    }

    pub fn from_fn(grid: ConfigGrid, hbar: f64, phase: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| phase(&grid.point(i))).collect();
        Self::new(grid, values, hbar)
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// `eta` sampled at the nodes.
    pub fn complex_values(&self) -> Vec<Complex64> {
        self.phase
            .iter()
            .map(|&th| Complex64::from_polar(1.0, self.factor * th))
            .collect()
    }
}

/// Einstein-de Broglie momentum `p = hbar * grad(phase)` of a synchronicity.
///
/// On periodic axes each lane's winding is removed before the spectral
/// derivative and restored afterwards; box axes use fourth-order finite
/// differences.
pub fn momentum_of_synchronicity(eta: &SynchronicityField) -> Result<CovectorField> {
    let grid = eta.grid();
    let shape = grid.shape();
    let quantum = 2.0 * PI / eta.factor;
    let mut comps = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let mut d = eta.phase.clone();
        let h = grid.spacing(axis);
        match grid.boundary() {
            Boundary::Periodic => {
                let period = grid.period(axis);
                let mut buf: Vec<Complex64> = Vec::new();
                spectral::for_each_lane(&mut d, &shape, axis, |lane| {
                    let n = lane.len();
                    let winding = lane_winding(lane, quantum);
                    let slope = winding / period;
                    buf.clear();
                    buf.extend(
                        lane.iter()
                            .enumerate()
                            .map(|(j, &v)| Complex64::new(v - slope * j as f64 * h, 0.0)),
                    );
                    spectral::differentiate_periodic(&mut buf, period, 1);
                    for j in 0..n {
                        lane[j] = buf[j].re + slope;
                    }
                });
            }
            Boundary::BoxDoubled => {
                d = spectral::derivative_fd4(&d, &shape, axis, h);
            }
        }
        for v in d.iter_mut() {
            *v *= eta.hbar;
        }
        comps.push(d);
    }
    CovectorField::new(grid.clone(), comps)
}

/// Total phase advance across one period of a lane, assuming the step from
/// the last node back to the first is below half a phase quantum.
fn lane_winding(lane: &[f64], quantum: f64) -> f64 {
    let n = lane.len();
    let raw = lane[0] - lane[n - 1];
    let wrapped = raw - quantum * (raw / quantum).round();
    lane[n - 1] - lane[0] + wrapped
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;

    fn line() -> ConfigGrid {
        make_uniform_grid(1, &[(0.0, 2.0 * PI)], 64, Boundary::Periodic).unwrap()
    }

    #[test]
    fn linear_phase_gives_constant_momentum() {
        let eta = SynchronicityField::from_fn(line(), 1.0, |x| 2.0 * x[0] + 0.4).unwrap();
        let p = momentum_of_synchronicity(&eta).unwrap();
        assert!(p.component(0).iter().all(|v| (v - 2.0).abs() < 1e-12));
        for z in eta.complex_values() {
            assert!((z.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_phase_gives_zero() {
        let eta = SynchronicityField::from_fn(line(), 1.0, |_| 0.9).unwrap();
        let p = momentum_of_synchronicity(&eta).unwrap();
        assert!(p.component(0).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn modulated_phase() {
        let eta = SynchronicityField::from_fn(line(), 1.0, |x| 3.0 * x[0] + 0.3 * x[0].sin()).unwrap();
        let p = momentum_of_synchronicity(&eta).unwrap();
        for (x, v) in line().coords(0).iter().zip(p.component(0)) {
            assert!((v - (3.0 + 0.3 * x.cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn hbar_scales_momentum() {
        let eta = SynchronicityField::from_fn(line(), 0.25, |x| -x[0]).unwrap();
        let p = momentum_of_synchronicity(&eta).unwrap();
        assert!(p.component(0).iter().all(|v| (v + 0.25).abs() < 1e-12));
    }

    #[test]
    fn two_dimensional_winding() {
        let g = make_uniform_grid(2, &[(0.0, 2.0 * PI)], 32, Boundary::Periodic).unwrap();
        let eta = SynchronicityField::from_fn(g, 1.0, |x| x[0] - 2.0 * x[1] + 0.1 * (x[0] + x[1]).cos()).unwrap();
        let p = momentum_of_synchronicity(&eta).unwrap();
        for i in 0..eta.grid().len() {
            let x = eta.grid().point(i);
            let s = 0.1 * (x[0] + x[1]).sin();
            assert!((p.component(0)[i] - (1.0 - s)).abs() < 1e-10);
            assert!((p.component(1)[i] - (-2.0 - s)).abs() < 1e-10);
        }
    }
}
