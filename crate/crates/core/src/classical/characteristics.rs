use rayon::prelude::*;

use super::PhaseSpaceDensity;
use crate::error::{Error, Result};
use crate::grid::{Boundary, PhaseGrid};
use crate::hamiltonian::{hamiltonian_gradients_into, HamiltonianSpec};

const IMPLICIT_TOL: f64 = 1e-14;
const IMPLICIT_MAX_ITER: usize = 200;

/// One generalized leapfrog step of `dx/dt = dH/dp`, `dp/dt = -dH/dx`.
///
/// Separable Hamiltonians take the explicit kick-drift-kick form; otherwise
/// the two implicit half-steps are solved by fixed-point iteration.
pub fn step_characteristics(h: &HamiltonianSpec, x: &[f64], p: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = h.dim();
    if x.len() != d || p.len() != d {
        return Err(Error::arg("state", format!("expected {d} coordinates")));
    }
    if x.iter().chain(p).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("characteristic state"));
    }
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::arg("dt", "must be finite and non-negative"));
    }
    let mut xs = [0.0; 2];
    let mut ps = [0.0; 2];
    xs[..d].copy_from_slice(x);
    ps[..d].copy_from_slice(p);
    leapfrog(h, &mut xs[..d], &mut ps[..d], dt)?;
    Ok((xs[..d].to_vec(), ps[..d].to_vec()))
}

fn leapfrog(h: &HamiltonianSpec, x: &mut [f64], p: &mut [f64], dt: f64) -> Result<()> {
    if dt == 0.0 {
        return Ok(());
    }
    let d = x.len();
    let mut gp = [0.0; 2];
    let mut gx = [0.0; 2];
    if h.is_separable() {
        hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
        for a in 0..d {
            p[a] -= 0.5 * dt * gx[a];
        }
        hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
        for a in 0..d {
            x[a] += dt * gp[a];
        }
        hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
        for a in 0..d {
            p[a] -= 0.5 * dt * gx[a];
        }
        return Ok(());
    }
    // p_half = p - dt/2 H_x(x, p_half)
    let p0 = [p[0], if d > 1 { p[1] } else { 0.0 }];
    let mut converged = false;
    for _ in 0..IMPLICIT_MAX_ITER {
        hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
        let mut change: f64 = 0.0;
        for a in 0..d {
            let next = p0[a] - 0.5 * dt * gx[a];
            change = change.max((next - p[a]).abs() / (1.0 + next.abs()));
            p[a] = next;
        }
        if change < IMPLICIT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::arg("dt", "implicit momentum half-step did not converge"));
    }
    // x' = x + dt/2 (H_p(x, p_half) + H_p(x', p_half))
    hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
    let x0 = [x[0], if d > 1 { x[1] } else { 0.0 }];
    let v0 = gp;
    converged = false;
    for _ in 0..IMPLICIT_MAX_ITER {
        hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
        let mut change: f64 = 0.0;
        for a in 0..d {
            let next = x0[a] + 0.5 * dt * (v0[a] + gp[a]);
            change = change.max((next - x[a]).abs() / (1.0 + next.abs()));
            x[a] = next;
        }
        if change < IMPLICIT_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::arg("dt", "implicit position step did not converge"));
    }
    hamiltonian_gradients_into(h, x, p, &mut gp[..d], &mut gx[..d]);
    for a in 0..d {
        p[a] -= 0.5 * dt * gx[a];
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

/// Time-ordered samples of one characteristic.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Largest `|H(x_t, p_t) - H(x_0, p_0)|` over the samples.
    pub fn energy_drift(&self, h: &HamiltonianSpec) -> f64 {
        let e0 = crate::hamiltonian::eval_hamiltonian(h, &self.samples[0].x, &self.samples[0].p);
        self.samples
            .iter()
            .map(|s| (crate::hamiltonian::eval_hamiltonian(h, &s.x, &s.p) - e0).abs())
            .fold(0.0, f64::max)
    }
}

/// Integrates from `t = 0` to `t_end` with steps of `dt` (the last one
/// shortened), keeping every `record_every`-th state plus the final one.
pub fn integrate_trajectory(
    h: &HamiltonianSpec,
    x0: &[f64],
    p0: &[f64],
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::arg("dt", "must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::arg("t_end", "must be non-negative"));
    }
    let record_every = record_every.max(1);
    let (mut x, mut p) = (x0.to_vec(), p0.to_vec());
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        x: x.clone(),
        p: p.clone(),
    }];
    let full = (t_end / dt).floor() as usize;
    let rest = t_end - full as f64 * dt;
    let mut t = 0.0;
    for n in 1..=full {
        (x, p) = step_characteristics(h, &x, &p, dt)?;
        t = n as f64 * dt;
        if n % record_every == 0 {
            samples.push(TrajectorySample {
                t,
                x: x.clone(),
                p: p.clone(),
            });
        }
    }
    if rest > 1e-12 * dt {
        (x, p) = step_characteristics(h, &x, &p, rest)?;
        t = t_end;
    }
    if samples.last().is_some_and(|s| s.t != t) {
        samples.push(TrajectorySample { t, x, p });
    }
    Ok(Trajectory { samples })
}

/// Weighted markers following the canonical flow, one per occupied node of
/// the initial density.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicsEnsemble {
    dim: usize,
    x: Vec<f64>,
    p: Vec<f64>,
    weights: Vec<f64>,
}

impl CharacteristicsEnsemble {
    /// Places a marker of mass `rho * dV` on every node with `rho > 0`.
    pub fn from_density(rho: &PhaseSpaceDensity) -> Self {
        let grid = rho.grid();
        let d = grid.dim();
        let dv = grid.cell_volume();
        let mut ens = CharacteristicsEnsemble {
            dim: d,
            x: Vec::new(),
            p: Vec::new(),
            weights: Vec::new(),
        };
        for (i, &v) in rho.values().iter().enumerate() {
            if v > 0.0 {
                let (x, p) = grid.point(i);
                ens.x.extend(x);
                ens.p.extend(p);
                ens.weights.push(v * dv);
            }
        }
        ens
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Marker `i` as `(x, p, weight)`.
    pub fn marker(&self, i: usize) -> (&[f64], &[f64], f64) {
        let d = self.dim;
        (&self.x[i * d..(i + 1) * d], &self.p[i * d..(i + 1) * d], self.weights[i])
    }

    /// Advances every marker by one leapfrog step.
    pub fn step(&mut self, h: &HamiltonianSpec, dt: f64) -> Result<()> {
        if h.dim() != self.dim {
            return Err(Error::GridMismatch("Hamiltonian dimension differs from ensemble".into()));
        }
        if !dt.is_finite() || dt < 0.0 {
            return Err(Error::arg("dt", "must be finite and non-negative"));
        }
        let d = self.dim;
        self.x
            .par_chunks_mut(d)
            .zip(self.p.par_chunks_mut(d))
            .try_for_each(|(x, p)| leapfrog(h, x, p, dt))?;
        if self.x.iter().chain(&self.p).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("characteristic state"));
        }
        Ok(())
    }

    /// Weighted mean of `f` over the markers.
    pub fn mean(&self, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.weights[i] * f(&self.x[i * d..(i + 1) * d], &self.p[i * d..(i + 1) * d]);
        }
        acc / self.total_weight()
    }

    /// Deposits the markers on `grid` with a Gaussian kernel one cell wide
    /// on every axis. Each marker's kernel is renormalized over the nodes it
    /// reaches, so mass landing inside the grid is conserved exactly.
    pub fn deposit(&self, grid: &PhaseGrid) -> Result<PhaseSpaceDensity> {
        const RADIUS: i64 = 4;
        let d = self.dim;
        if grid.dim() != d {
            return Err(Error::GridMismatch("ensemble dimension differs from grid".into()));
        }
        if grid.x().boundary() != Boundary::Periodic {
            return Err(Error::Unsupported("kernel deposition on box grids".into()));
        }
        let shape = grid.shape();
        let strides = crate::spectral::strides(&shape);
        let n_axes = 2 * d;
        let lo: Vec<f64> = (0..n_axes)
            .map(|a| if a < d { grid.x().axis(a).lo } else { grid.p_axis(a - d).lo })
            .collect();
        let h: Vec<f64> = (0..n_axes).map(|a| grid.spacing(a)).collect();
        let periodic: Vec<bool> = (0..n_axes).map(|a| a < d).collect();
        let width = (2 * RADIUS + 1) as usize;
        let mut out = vec![0.0; grid.len()];
        let mut idx = vec![vec![usize::MAX; width]; n_axes];
        let mut w = vec![vec![0.0; width]; n_axes];
        let mut coord = [0.0; 4];
        for m in 0..self.len() {
            coord[..d].copy_from_slice(&self.x[m * d..(m + 1) * d]);
            coord[d..2 * d].copy_from_slice(&self.p[m * d..(m + 1) * d]);
            for a in 0..n_axes {
                let n = shape[a] as i64;
                let offset = if a < d && grid.x().boundary() == Boundary::Periodic {
                    0.0
                } else {
                    0.5
                };
                // continuous index of the marker along this axis
                let s = (coord[a] - lo[a]) / h[a] - offset;
                let base = s.round() as i64;
                for (t, j) in (base - RADIUS..=base + RADIUS).enumerate() {
                    let dist = s - j as f64;
                    let jj = if periodic[a] {
                        Some(j.rem_euclid(n))
                    } else if (0..n).contains(&j) {
                        Some(j)
                    } else {
                        None
                    };
                    match jj {
                        Some(j) => {
                            idx[a][t] = j as usize;
                            w[a][t] = (-0.5 * dist * dist).exp();
                        }
                        None => {
                            idx[a][t] = usize::MAX;
                            w[a][t] = 0.0;
                        }
                    }
                }
            }
            let norm: f64 = w.iter().map(|wa| wa.iter().sum::<f64>()).product();
            if norm == 0.0 {
                continue;
            }
            let scale = self.weights[m] / norm;
            let total = width.pow(n_axes as u32);
            for combo in 0..total {
                let mut rem = combo;
                let mut flat = 0;
                let mut wt = scale;
                for a in (0..n_axes).rev() {
                    let t = rem % width;
                    rem /= width;
                    if idx[a][t] == usize::MAX {
                        wt = 0.0;
                        break;
                    }
                    flat += idx[a][t] * strides[a];
                    wt *= w[a][t];
                }
                if wt != 0.0 {
                    out[flat] += wt;
                }
            }
        }
        let dv = grid.cell_volume();
        out.iter_mut().for_each(|v| *v /= dv);
        Ok(PhaseSpaceDensity::from_solver(grid.clone(), out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::hamiltonian::{eval_hamiltonian, ChargeSpec, Profile};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn free_particle_moves_uniformly() {
        let (x, p) = step_characteristics(&HamiltonianSpec::free(1), &[0.0], &[2.0], 0.5).unwrap();
        assert_eq!((x[0], p[0]), (1.0, 2.0));
    }

    #[test]
    fn harmonic_quarter_period() {
        let tr = integrate_trajectory(&HamiltonianSpec::harmonic(1, 1.0), &[1.0], &[0.0], PI / 2.0, 1e-3, 1000).unwrap();
        let s = tr.last();
        assert!((s.t - PI / 2.0).abs() < 1e-15);
        assert!(s.x[0].abs() < 1e-5 && (s.p[0] + 1.0).abs() < 1e-5, "{:?}", s);
    }

    #[test]
    fn constant_potential_exerts_no_force() {
        let h = HamiltonianSpec::new(vec![1.0], None, Profile::Constant(3.0)).unwrap();
        for dt in [0.01, 1.0, 17.0] {
            let (_, p) = step_characteristics(&h, &[0.4], &[-1.5], dt).unwrap();
            assert_eq!(p[0], -1.5);
        }
    }

    #[test]
    fn rejects_nonfinite_state() {
        assert!(step_characteristics(&HamiltonianSpec::free(1), &[f64::NAN], &[0.0], 0.1).is_err());
    }

    #[test]
    fn energy_error_stays_bounded_over_a_million_steps() {
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let (mut x, mut p) = ([1.0], [0.0]);
        let dt = 0.05;
        let mut worst: f64 = 0.0;
        for _ in 0..1_000_000 {
            leapfrog(&h, &mut x, &mut p, dt).unwrap();
            worst = worst.max((eval_hamiltonian(&h, &x, &p) - 0.5).abs());
        }
        // the modified energy 1/2 (p^2 + (1 - dt^2/4) x^2) is conserved exactly
        assert!(worst <= dt * dt / 8.0 * (1.0 + 1e-6), "{worst}");
    }

    #[test]
    fn implicit_step_matches_explicit_for_separable_case() {
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let hv = HamiltonianSpec::new(vec![1.0], Some(vec![Profile::Zero]), Profile::quadratic(vec![0.0], 1.0))
            .unwrap()
            .with_metric_scale(Profile::Constant(1.0));
        let a = step_characteristics(&h, &[0.3], &[0.7], 0.1).unwrap();
        let b = step_characteristics(&hv, &[0.3], &[0.7], 0.1).unwrap();
        assert!((a.0[0] - b.0[0]).abs() < 1e-13 && (a.1[0] - b.1[0]).abs() < 1e-13);
    }

    #[test]
    fn nonseparable_flow_is_second_order() {
        let h = HamiltonianSpec::new(
            vec![1.0],
            Some(vec![Profile::Sinusoid {
                amplitude: 0.5,
                wavevector: vec![1.0],
                phase: 0.0,
            }]),
            Profile::quadratic(vec![0.0], 1.0),
        )
        .unwrap();
        let run = |dt: f64| integrate_trajectory(&h, &[0.5], &[0.2], 1.0, dt, 1_000_000).unwrap().last().clone();
        let reference = run(1e-4);
        let e1 = (run(0.02).x[0] - reference.x[0]).abs();
        let e2 = (run(0.01).x[0] - reference.x[0]).abs();
        let order = (e1 / e2).log2();
        assert!((1.8..2.3).contains(&order), "{order}");
    }

    #[test]
    fn central_potential_conserves_angular_momentum() {
        let h = HamiltonianSpec::central(2, vec![0.0, 0.5, 0.1]);
        let l3 = ChargeSpec::angular_momentum_z();
        let x = make_uniform_grid(2, &[(-3.0, 3.0)], 8, Boundary::Periodic).unwrap();
        let g = PhaseGrid::symmetric(x, 3.0, 8).unwrap();
        let rho = PhaseSpaceDensity::gaussian(g, &[0.5, 0.0], &[0.0, 0.5], &[0.6, 0.6, 0.6, 0.6]).unwrap();
        let mut ens = CharacteristicsEnsemble::from_density(&rho);
        let q0 = ens.mean(|x, p| l3.eval(x, p));
        for _ in 0..200 {
            ens.step(&h, 0.005).unwrap();
        }
        let q1 = ens.mean(|x, p| l3.eval(x, p));
        assert!((q1 - q0).abs() < 1e-8);
    }

    #[test]
    fn deposition_conserves_mass() {
        let x = make_uniform_grid(1, &[(-6.0, 6.0)], 128, Boundary::Periodic).unwrap();
        let g = PhaseGrid::symmetric(x, 6.0, 128).unwrap();
        let rho = PhaseSpaceDensity::gaussian(g.clone(), &[0.0], &[0.0], &[1.0, 1.0]).unwrap();
        let ens = CharacteristicsEnsemble::from_density(&rho);
        let dep = ens.deposit(&g).unwrap();
        assert!((dep.mass() - 1.0).abs() < 1e-12);
        // one-cell kernel smoothing of a unit-width blob: bias ~ (2/e) h^2
        let l1 = rho.l1_distance(&dep).unwrap();
        assert!(l1 < 0.01, "{l1}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn harmonic_step_is_area_preserving(x in -2.0f64..2.0, p in -2.0f64..2.0, dt in 0.001f64..0.5) {
            let h = HamiltonianSpec::harmonic(1, 1.3);
            let e = 1e-6;
            let f = |x: f64, p: f64| step_characteristics(&h, &[x], &[p], dt).unwrap();
            let (xa, pa) = f(x + e, p);
            let (xb, pb) = f(x - e, p);
            let (xc, pc) = f(x, p + e);
            let (xd, pd) = f(x, p - e);
            let j = ((xa[0] - xb[0]) * (pc[0] - pd[0]) - (xc[0] - xd[0]) * (pa[0] - pb[0])) / (4.0 * e * e);
            prop_assert!((j - 1.0).abs() < 1e-7);
        }
    }
}
