use std::f64::consts::PI;

use num_complex::Complex64;

use super::WaveFunction;
use crate::error::{Error, Result};
use crate::grid::{
    momentum_of_synchronicity, spectral_derivative, Boundary, CovectorField, Parity, ScalarField, SynchronicityField,
};

/// Default node floor relative to `max |psi|`.
pub const DEFAULT_NODE_FLOOR: f64 = 1e-8;

/// Density `|psi|^2` and momentum `hbar grad(arg psi)` of a wave function.
/// Momentum components are zero off the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MadelungFields {
    pub density: ScalarField,
    pub momentum: CovectorField,
    /// `true` where `|psi|` exceeds the node floor.
    pub mask: Vec<bool>,
}

impl MadelungFields {
    pub fn masked_nodes(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }
}

pub fn madelung_fields(psi: &WaveFunction) -> Result<MadelungFields> {
    madelung_fields_with_floor(psi, DEFAULT_NODE_FLOOR)
}

/// With every node above `floor * max|psi|`, the unwrapped phase is handed to
/// [`momentum_of_synchronicity`]; otherwise the momentum on the mask is
/// `hbar Im(conj(psi) grad psi) / |psi|^2`.
pub fn madelung_fields_with_floor(psi: &WaveFunction, floor: f64) -> Result<MadelungFields> {
    if !(floor >= 0.0 && floor < 1.0) {
        return Err(Error::arg("floor", "must lie in [0, 1)"));
    }
    let grid = psi.grid();
    let v = psi.values();
    let amax = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let cut = floor * amax;
    let mask: Vec<bool> = v.iter().map(|z| z.norm() > cut).collect();
    let density = ScalarField::new(grid.clone(), v.iter().map(|z| z.norm_sqr()).collect())?;
    let momentum = if mask.iter().all(|m| *m) {
        let phase = unwrap_phase(v, &grid.shape())?;
        let eta = SynchronicityField::new(grid.clone(), phase, psi.hbar())?;
        momentum_of_synchronicity(&eta)?
    } else {
        let parity = match grid.boundary() {
            Boundary::Periodic => Parity::Even,
            Boundary::BoxDoubled => Parity::Odd,
        };
        let re = ScalarField::with_parity(grid.clone(), v.iter().map(|z| z.re).collect(), parity)?;
        let im = ScalarField::with_parity(grid.clone(), v.iter().map(|z| z.im).collect(), parity)?;
        let mut comps = Vec::with_capacity(grid.dim());
        for axis in 0..grid.dim() {
            // Im(conj(psi) psi') = a b' - b a', exact zero for real psi
            let da = spectral_derivative(&re, axis)?;
            let db = spectral_derivative(&im, axis)?;
            comps.push(
                (0..v.len())
                    .map(|i| {
                        if mask[i] {
                            let (a, b) = (v[i].re, v[i].im);
                            psi.hbar() * (a * db.values()[i] - b * da.values()[i]) / v[i].norm_sqr()
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
        }
        CovectorField::new(grid.clone(), comps)?
    };
    Ok(MadelungFields {
        density,
        momentum,
        mask,
    })
}

fn wrap(d: f64) -> f64 {
    d - 2.0 * PI * (d / (2.0 * PI)).round()
}

/// Sequential unwrap in 1-D; in 2-D the first column is unwrapped along
/// axis 0 and each row along axis 1 from it, then every axis-0 step is
/// checked against its principal value.
fn unwrap_phase(v: &[Complex64], shape: &[usize]) -> Result<Vec<f64>> {
    let arg: Vec<f64> = v.iter().map(|z| z.arg()).collect();
    match shape.len() {
        1 => {
            let mut out = vec![arg[0]; arg.len()];
            for j in 1..arg.len() {
                out[j] = out[j - 1] + wrap(arg[j] - arg[j - 1]);
            }
            Ok(out)
        }
        2 => {
            let (n0, n1) = (shape[0], shape[1]);
            let mut out = vec![0.0; arg.len()];
            out[0] = arg[0];
            for i in 1..n0 {
                out[i * n1] = out[(i - 1) * n1] + wrap(arg[i * n1] - arg[(i - 1) * n1]);
            }
            for i in 0..n0 {
                for j in 1..n1 {
                    let k = i * n1 + j;
                    out[k] = out[k - 1] + wrap(arg[k] - arg[k - 1]);
                }
            }
            for i in 1..n0 {
                for j in 0..n1 {
                    let (a, b) = ((i - 1) * n1 + j, i * n1 + j);
                    let residue = (out[b] - out[a]) - wrap(arg[b] - arg[a]);
                    if residue.abs() > 1e-9 {
                        return Err(Error::PhaseUnwrap(format!(
                            "inconsistent winding between rows {} and {i} at column {j}",
                            i - 1
                        )));
                    }
                }
            }
            Ok(out)
        }
        d => Err(Error::Unsupported(format!("phase unwrapping in {d} dimensions"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_uniform_grid, ConfigGrid};

    fn line(n: usize) -> ConfigGrid {
        make_uniform_grid(1, &[(0.0, 2.0 * PI)], n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn plane_wave_momentum() {
        let hbar = 0.5;
        let psi = WaveFunction::plane_wave(line(64), hbar, &[4.0]).unwrap();
        let m = madelung_fields(&psi).unwrap();
        assert_eq!(m.masked_nodes(), 0);
        let rho0 = 1.0 / (2.0 * PI);
        assert!(m.density.values().iter().all(|r| (r - rho0).abs() < 1e-14));
        assert!(m.momentum.component(0).iter().all(|p| (p - 2.0).abs() < 1e-10));
    }

    #[test]
    fn real_gaussian_has_zero_momentum() {
        let g = make_uniform_grid(1, &[(-8.0, 8.0)], 128, Boundary::Periodic).unwrap();
        let psi = WaveFunction::gaussian_packet(g, 1.0, &[0.0], &[0.0], 0.5).unwrap();
        let m = madelung_fields(&psi).unwrap();
        assert!(m.masked_nodes() > 0);
        assert!(m.momentum.component(0).iter().all(|p| *p == 0.0));
    }

    #[test]
    fn modulated_phase_on_the_mask() {
        let g = make_uniform_grid(1, &[(-PI, PI)], 128, Boundary::Periodic).unwrap();
        let k = 3.0;
        let psi = WaveFunction::from_fn(g.clone(), 1.0, |x| {
            Complex64::from_polar((-x[0] * x[0] / 2.0).exp(), k * x[0] + 0.2 * x[0].sin())
        })
        .unwrap();
        let m = madelung_fields(&psi).unwrap();
        for (p, x) in m.momentum.component(0).iter().zip(g.coords(0)) {
            assert!((p - (k + 0.2 * x.cos())).abs() < 1e-8);
        }
    }

    #[test]
    fn two_dimensional_winding() {
        let g = make_uniform_grid(2, &[(0.0, 2.0 * PI)], 32, Boundary::Periodic).unwrap();
        let psi = WaveFunction::from_fn(g.clone(), 1.0, |x| {
            Complex64::from_polar(1.0, 2.0 * x[0] - x[1] + 0.3 * (x[0] + x[1]).sin())
        })
        .unwrap();
        let m = madelung_fields(&psi).unwrap();
        for i in 0..g.len() {
            let x = g.point(i);
            let c = 0.3 * (x[0] + x[1]).cos();
            assert!((m.momentum.component(0)[i] - (2.0 + c)).abs() < 1e-10);
            assert!((m.momentum.component(1)[i] - (-1.0 + c)).abs() < 1e-10);
        }
    }
}
