use std::f64::consts::PI;

use super::PhaseSpaceDensity;
use crate::error::{Error, Result};
use crate::grid::{Boundary, PhaseGrid};
use crate::hamiltonian::{DerivativeScheme, HamiltonianSpec, SampledHamiltonian};
use crate::spectral;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiouvilleOptions {
    pub scheme: DerivativeScheme,
    /// Courant number `C` in `dt * sum_a max|v_a| k_max,a <= C`.
    pub cfl: f64,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        LiouvilleOptions {
            scheme: DerivativeScheme::Spectral,
            cfl: 2.0,
        }
    }
}

/// RK4 integrator for `d rho/dt = {rho, H}`, written in the conservative
/// form `d_p(rho H_x) - d_x(rho H_p)` so the spectral scheme conserves mass
/// to rounding.
#[derive(Clone, Debug)]
pub struct LiouvilleSolver {
    grid: PhaseGrid,
    // velocity components along each phase axis, x axes first
    velocity: Vec<Vec<f64>>,
    options: LiouvilleOptions,
    dt_max: f64,
}

impl LiouvilleSolver {
    pub fn new(h: &HamiltonianSpec, grid: &PhaseGrid, options: LiouvilleOptions) -> Result<Self> {
        if grid.x().boundary() != Boundary::Periodic {
            return Err(Error::Unsupported("grid Liouville solver on box grids".into()));
        }
        if !(options.cfl > 0.0 && options.cfl.is_finite()) {
            return Err(Error::arg("cfl", "must be positive"));
        }
        let d = grid.dim();
        let sampled = SampledHamiltonian::new(h, grid.x())?;
        let p_len = grid.p_len();
        let mut velocity = vec![vec![0.0; grid.len()]; 2 * d];
        let mut dp = [0.0; 2];
        let mut dx = [0.0; 2];
        for i in 0..grid.len() {
            let (_, p) = grid.point(i);
            sampled.gradients(i / p_len, &p, &mut dp[..d], &mut dx[..d]);
            for a in 0..d {
                velocity[a][i] = dp[a];
                velocity[d + a][i] = -dx[a];
            }
        }
        let rate: f64 = (0..2 * d)
            .map(|a| {
                let vmax = velocity[a].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                vmax * PI / grid.spacing(a)
            })
            .sum();
        let dt_max = if rate > 0.0 { options.cfl / rate } else { f64::INFINITY };
        Ok(LiouvilleSolver {
            grid: grid.clone(),
            velocity,
            options,
            dt_max,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Largest step accepted by [`LiouvilleSolver::step`].
    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    fn rhs(&self, rho: &[f64], out: &mut [f64], flux: &mut [f64]) {
        let shape = self.grid.shape();
        out.iter_mut().for_each(|v| *v = 0.0);
        for (a, v) in self.velocity.iter().enumerate() {
            if v.iter().all(|&c| c == 0.0) {
                continue;
            }
            for i in 0..rho.len() {
                flux[i] = rho[i] * v[i];
            }
            let d = match self.options.scheme {
                DerivativeScheme::Spectral => {
                    spectral::derivative_real(flux, &shape, a, self.grid.period(a))
                }
                DerivativeScheme::FiniteDifference => {
                    spectral::derivative_fd4(flux, &shape, a, self.grid.spacing(a))
                }
            };
            for i in 0..rho.len() {
                out[i] -= d[i];
            }
        }
    }

    /// One RK4 step. `dt = 0` returns the input unchanged.
    pub fn step(&self, rho: &PhaseSpaceDensity, dt: f64) -> Result<PhaseSpaceDensity> {
        rho.grid().ensure_same(&self.grid)?;
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::arg("dt", "must be finite and non-negative"));
        }
        if dt > self.dt_max {
            return Err(Error::CflViolation { dt, bound: self.dt_max });
        }
        if dt == 0.0 {
            return Ok(rho.clone());
        }
        let y0 = rho.values();
        let n = y0.len();
        let mut flux = vec![0.0; n];
        let mut k = vec![0.0; n];
        let mut stage = vec![0.0; n];
        let mut acc = y0.to_vec();
        for (s, (frac, weight)) in [(0.0, 1.0), (0.5, 2.0), (0.5, 2.0), (1.0, 1.0)].into_iter().enumerate() {
            if s == 0 {
                self.rhs(y0, &mut k, &mut flux);
            } else {
                for i in 0..n {
                    stage[i] = y0[i] + frac * dt * k[i];
                }
                self.rhs(&stage, &mut k, &mut flux);
            }
            for i in 0..n {
                acc[i] += dt * weight / 6.0 * k[i];
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Liouville step"));
        }
        Ok(PhaseSpaceDensity::from_solver(self.grid.clone(), acc))
    }

    /// Advances by `t` using equal substeps no longer than `dt_max`.
    pub fn advance(&self, rho: &PhaseSpaceDensity, t: f64) -> Result<PhaseSpaceDensity> {
        if t == 0.0 {
            return Ok(rho.clone());
        }
        let steps = (t / self.dt_max).ceil().max(1.0) as usize;
        let dt = t / steps as f64;
        let mut cur = rho.clone();
        for _ in 0..steps {
            cur = self.step(&cur, dt)?;
        }
        Ok(cur)
    }
}

/// One RK4 step with default options.
pub fn step_liouville(h: &HamiltonianSpec, rho: &PhaseSpaceDensity, dt: f64) -> Result<PhaseSpaceDensity> {
    LiouvilleSolver::new(h, rho.grid(), LiouvilleOptions::default())?.step(rho, dt)
}
