use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::evolution::ExactPropagator;
use super::operators::{momentum_operator, OperatorRep};
use super::{check_hbar, DensityMatrix, WaveFunction};
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};
use crate::hamiltonian::HamiltonianSpec;
use crate::spectral;

/// Largest accepted gap between the two pictures.
const PICTURE_TOLERANCE: f64 = 1e-9;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Pointwise mismatch between centred time differences of the position and
/// momentum densities and their commutator expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub dt: f64,
    /// `max_x |d_t <x|rho|x> - i <x|[rho, H]|x> / hbar|`.
    pub density_residual: f64,
    /// Same for `<x|[rho, p]_+ / 2|x>`, maximized over axes.
    pub current_residual: f64,
}

impl MomentReport {
    pub fn max_residual(&self) -> f64 {
        self.density_residual.max(self.current_residual)
    }
}

fn diagonal(m: &DMatrix<Complex64>, dv: f64) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| m[(i, i)] / dv).collect()
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Evolves `rho` by `+-dt` with the exact propagator and compares centred
/// differences with the right-hand sides at `t = 0`. The mismatch is the
/// `O(dt^2)` truncation error of the difference quotient.
pub fn verify_moment_equations(h: &HamiltonianSpec, rho: &DensityMatrix, dt: f64) -> Result<MomentReport> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::arg("dt", "must be positive"));
    }
    let grid = rho.grid();
    let dv = grid.cell_volume();
    let prop = ExactPropagator::new(h, grid, rho.hbar())?;
    let hm = prop.hamiltonian().matrix();
    let r = rho.matrix();
    let fwd = prop.evolve_density(r, dt);
    let bwd = prop.evolve_density(r, -dt);
    let scale = I / rho.hbar();
    let comm = r * hm - hm * r;

    let lhs: Vec<Complex64> = diagonal(&fwd, dv)
        .iter()
        .zip(diagonal(&bwd, dv))
        .map(|(a, b)| (a - b) / (2.0 * dt))
        .collect();
    let rhs: Vec<Complex64> = diagonal(&comm, dv).iter().map(|z| z * scale).collect();
    let density_residual = max_gap(&lhs, &rhs);

    let mut current_residual = 0.0f64;
    for axis in 0..grid.dim() {
        let p = momentum_operator(grid, rho.hbar(), axis)?;
        let pm = p.matrix();
        let current = |m: &DMatrix<Complex64>| diagonal(&((m * pm + pm * m) * Complex64::new(0.5, 0.0)), dv);
        let lhs: Vec<Complex64> = current(&fwd)
            .iter()
            .zip(current(&bwd))
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect();
        let rhs: Vec<Complex64> = current(&comm).iter().map(|z| z * scale).collect();
        current_residual = current_residual.max(max_gap(&lhs, &rhs));
    }
    Ok(MomentReport {
        dt,
        density_residual,
        current_residual,
    })
}

/// `(<psi0|U^dagger F U|psi0>, <psi_t|F|psi_t>)` with `U = exp(-i H t / hbar)`.
pub fn picture_gap(h: &HamiltonianSpec, f: &OperatorRep, psi0: &WaveFunction, t: f64) -> Result<(f64, f64)> {
    let prop = ExactPropagator::new(h, psi0.grid(), psi0.hbar())?;
    if f.dim() != psi0.grid().len() {
        return Err(Error::arg("operator", "dimension differs from the grid"));
    }
    let c0 = DVector::from_vec(psi0.coefficients());
    let u = prop.unitary(t);
    let ft = u.adjoint() * f.matrix() * &u;
    let heis = (c0.adjoint() * ft * &c0)[(0, 0)].re;
    let ct = DVector::from_vec(prop.evolve(c0.as_slice(), t));
    let schr = (ct.adjoint() * f.matrix() * &ct)[(0, 0)].re;
    Ok((heis, schr))
}

/// Heisenberg-picture expectation, checked against the Schrodinger picture.
pub fn heisenberg_expectation(h: &HamiltonianSpec, f: &OperatorRep, psi0: &WaveFunction, t: f64) -> Result<f64> {
    let (heisenberg, schrodinger) = picture_gap(h, f, psi0, t)?;
    if (heisenberg - schrodinger).abs() > PICTURE_TOLERANCE {
        return Err(Error::PictureMismatch {
            heisenberg,
            schrodinger,
        });
    }
    Ok(heisenberg)
}

/// `sqrt(2/L) sin(n pi (x - lo) / L)` for `n = 1..=n_max` on a 1-D box grid.
pub fn box_eigenstates(grid: &ConfigGrid, hbar: f64, n_max: usize) -> Result<Vec<WaveFunction>> {
    check_hbar(hbar)?;
    if grid.dim() != 1 || grid.boundary() != Boundary::BoxDoubled {
        return Err(Error::Unsupported("box eigenstates need a 1-D box grid".into()));
    }
    if n_max == 0 || n_max >= grid.len() {
        return Err(Error::arg(
            "n_max",
            format!("must lie in 1..{} for {} nodes", grid.len(), grid.len()),
        ));
    }
    let ax = grid.axis(0);
    let (lo, len) = (ax.lo, ax.length());
    (1..=n_max)
        .map(|n| {
            WaveFunction::from_fn(grid.clone(), hbar, |x| {
                Complex64::new((2.0 / len).sqrt() * (n as f64 * PI * (x[0] - lo) / len).sin(), 0.0)
            })
        })
        .collect()
}

/// `|psi|^2` at both walls of a 1-D box grid, from the trigonometric
/// interpolant of the odd reflection.
pub fn box_wall_density(psi: &WaveFunction) -> Result<[f64; 2]> {
    let grid = psi.grid();
    if grid.dim() != 1 || grid.boundary() != Boundary::BoxDoubled {
        return Err(Error::Unsupported("wall density needs a 1-D box grid".into()));
    }
    let v = psi.values();
    let n = v.len();
    let mut ext: Vec<Complex64> = v.to_vec();
    ext.extend(v.iter().rev().map(|z| -z));
    spectral::fft(&mut ext);
    let scale = 1.0 / (2 * n) as f64;
    ext.iter_mut().for_each(|z| *z *= scale);
    let ax = grid.axis(0);
    let x0 = grid.coords(0)[0];
    let period = grid.period(0);
    let at = |x: f64| spectral::trig_interpolate(&ext, x0, period, x).norm_sqr();
    Ok([at(ax.lo), at(ax.hi)])
}

/// `<psi| x p_y - y p_x |psi>` on a 2-D periodic grid, without dense
/// matrices.
pub fn angular_momentum_expectation(psi: &WaveFunction) -> Result<f64> {
    let grid = psi.grid();
    if grid.dim() != 2 || grid.boundary() != Boundary::Periodic {
        return Err(Error::Unsupported("angular momentum needs a 2-D periodic grid".into()));
    }
    let shape = grid.shape();
    let v = psi.values();
    let dx = spectral::derivative_complex(v, &shape, 0, grid.period(0), 1);
    let dy = spectral::derivative_complex(v, &shape, 1, grid.period(1), 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut x = [0.0; 2];
    for i in 0..v.len() {
        grid.point_into(i, &mut x);
        acc += v[i].conj() * (x[0] * dy[i] - x[1] * dx[i]);
    }
    Ok((acc * Complex64::new(0.0, -psi.hbar()) * grid.cell_volume()).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::quantum::{hamiltonian_operator, madelung_fields, position_operator, SchrodingerStepper};

    fn periodic(n: usize, half: f64) -> ConfigGrid {
        make_uniform_grid(1, &[(-half, half)], n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn eigenprojector_is_stationary() {
        let g = periodic(64, 8.0);
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let prop = ExactPropagator::new(&h, &g, 1.0).unwrap();
        let eig = nalgebra::SymmetricEigen::new(prop.hamiltonian().matrix().clone());
        let v = eig.eigenvectors.column(0).into_owned();
        let rho = DensityMatrix::new(g, &v * v.adjoint(), 1.0).unwrap();
        let rep = verify_moment_equations(&h, &rho, 0.05).unwrap();
        assert!(rep.max_residual() < 1e-9, "{rep:?}");
    }

    #[test]
    fn coherent_state_velocity_matches_momentum() {
        let g = periodic(128, 10.0);
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let psi = WaveFunction::coherent_state(g.clone(), 1.0, 1.0, &[1.0], &[0.5]).unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let prop = ExactPropagator::new(&h, &g, 1.0).unwrap();
        let x = position_operator(&g, 0).unwrap();
        let p = momentum_operator(&g, 1.0, 0).unwrap();
        let dt = 1e-3;
        let xf = DensityMatrix::from_parts(g.clone(), prop.evolve_density(rho.matrix(), dt), 1.0).unwrap();
        let xb = DensityMatrix::from_parts(g.clone(), prop.evolve_density(rho.matrix(), -dt), 1.0).unwrap();
        let v = (xf.expectation(&x).unwrap() - xb.expectation(&x).unwrap()) / (2.0 * dt);
        // velocity 0.5 exactly, difference quotient error dt^2 / 6 |x'''|
        assert!((v - rho.expectation(&p).unwrap()).abs() < 1e-6);
        assert!((v - 0.5).abs() < 1e-6);
    }

    #[test]
    fn moment_residual_is_second_order() {
        let g = periodic(96, 12.0);
        let h = HamiltonianSpec::harmonic(1, 0.5);
        let psi = WaveFunction::from_fn(g.clone(), 1.0, |x| {
            Complex64::new(1.0 + 0.3 * (x[0] / 2.0).cos(), 0.2 * x[0].sin()) * (-x[0] * x[0] / 4.0).exp()
        })
        .unwrap();
        let rho = DensityMatrix::pure(&psi).unwrap();
        let a = verify_moment_equations(&h, &rho, 0.05).unwrap().max_residual();
        let b = verify_moment_equations(&h, &rho, 0.025).unwrap().max_residual();
        assert!((3.5..4.5).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn continuity_equation_for_pure_states() {
        let g = periodic(128, 10.0);
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let psi = WaveFunction::gaussian_packet(g.clone(), 1.0, &[0.5], &[0.8], 0.9).unwrap();
        let dt = 1e-3;
        let prop = ExactPropagator::new(&h, &g, 1.0).unwrap();
        let at = |t: f64| WaveFunction::from_coefficients(g.clone(), &prop.evolve(&psi.coefficients(), t), 1.0).unwrap();
        let (fwd, bwd) = (at(dt), at(-dt));
        let m = madelung_fields(&psi).unwrap();
        let flux: Vec<f64> = m.density.values().iter().zip(m.momentum.component(0)).map(|(r, p)| r * p).collect();
        let div = spectral::derivative_real(&flux, &g.shape(), 0, g.period(0));
        for i in 0..g.len() {
            let dn = (fwd.values()[i].norm_sqr() - bwd.values()[i].norm_sqr()) / (2.0 * dt);
            assert!((dn + div[i]).abs() < 1e-5, "{i}: {dn} {}", -div[i]);
        }
    }

    #[test]
    fn heisenberg_picture_examples() {
        let g = periodic(128, 10.0);
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let psi = WaveFunction::coherent_state(g.clone(), 1.0, 1.0, &[2.0], &[0.0]).unwrap();
        let id = OperatorRep::identity(g.len());
        let hm = hamiltonian_operator(&h, &g, 1.0).unwrap();
        let x = position_operator(&g, 0).unwrap();
        let e0 = heisenberg_expectation(&h, &hm, &psi, 0.0).unwrap();
        for t in [0.3, 1.7, 4.0] {
            assert!((heisenberg_expectation(&h, &id, &psi, t).unwrap() - 1.0).abs() < 1e-12);
            assert!((heisenberg_expectation(&h, &hm, &psi, t).unwrap() - e0).abs() < 1e-9);
            assert!((heisenberg_expectation(&h, &x, &psi, t).unwrap() - 2.0 * t.cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn box_spectrum_and_walls() {
        let g = make_uniform_grid(1, &[(0.0, PI)], 64, Boundary::BoxDoubled).unwrap();
        let h = HamiltonianSpec::free(1);
        let hm = hamiltonian_operator(&h, &g, 1.0).unwrap();
        let states = box_eigenstates(&g, 1.0, 4).unwrap();
        for (n, psi) in states.iter().enumerate() {
            let n = (n + 1) as f64;
            let e = psi.expectation(&hm).unwrap();
            assert!((e - n * n / 2.0).abs() < 1e-10, "{e}");
            let w = box_wall_density(psi).unwrap();
            assert!(w[0] < 1e-12 && w[1] < 1e-12);
        }
        let rho = DensityMatrix::pure(&states[0]).unwrap();
        let stepper = SchrodingerStepper::new(&h, &g, 1.0, 0.01).unwrap();
        let mut r = rho.clone();
        for _ in 0..100 {
            r = stepper.conjugate(&r).unwrap();
        }
        assert!(r.max_entry_distance(&rho).unwrap() < 1e-10);
        assert!(box_eigenstates(&g, 1.0, 64).is_err());
    }

    #[test]
    fn angular_momentum_of_rotating_packet() {
        let g = make_uniform_grid(2, &[(-8.0, 8.0)], 64, Boundary::Periodic).unwrap();
        // <L3> = x0 p_y - y0 p_x for a Gaussian packet
        let psi = WaveFunction::gaussian_packet(g, 1.0, &[1.0, 0.0], &[0.0, 0.7], 1.0).unwrap();
        assert!((angular_momentum_expectation(&psi).unwrap() - 0.7).abs() < 1e-10);
    }
}
