use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};
use crate::hamiltonian::HamiltonianSpec;
use crate::spectral;

/// `s h^{ij}` for a constant conformal factor `s`.
pub(crate) fn effective_metric(h: &HamiltonianSpec) -> Result<Vec<f64>> {
    if !h.has_constant_metric() {
        return Err(Error::Unsupported("position-dependent metric in the quantum layer".into()));
    }
    let s = h.metric_scale().map_or(1.0, |p| p.value(&vec![0.0; h.dim()]));
    Ok(h.metric().iter().map(|m| m * s).collect())
}

/// Kinetic energy `1/2 h^{ij} (hbar k_i + A_i)(hbar k_j + A_j)` on the FFT
/// lattice of a periodic grid or of the odd reflection of a box grid.
#[derive(Clone, Debug)]
pub(crate) struct KineticSpectrum {
    shape: Vec<usize>,
    ext_shape: Vec<usize>,
    boxed: bool,
    energy: Vec<f64>,
}

impl KineticSpectrum {
    /// Requires a constant metric and a constant vector potential; box grids
    /// additionally need `A = 0` and a diagonal metric so the reflection
    /// parity is preserved.
    pub fn new(h: &HamiltonianSpec, grid: &ConfigGrid, hbar: f64) -> Result<Self> {
        let d = grid.dim();
        if h.dim() != d {
            return Err(Error::GridMismatch(format!("{}-D Hamiltonian on a {d}-D grid", h.dim())));
        }
        let metric = effective_metric(h)?;
        let a = h
            .constant_vector_potential()
            .ok_or_else(|| Error::Unsupported("split-step kinetic factor with non-constant A".into()))?;
        let boxed = grid.boundary() == Boundary::BoxDoubled;
        if boxed {
            if a.iter().any(|v| *v != 0.0) {
                return Err(Error::Unsupported("vector potential on a box grid".into()));
            }
            if d == 2 && metric[1] != 0.0 {
                return Err(Error::Unsupported("off-diagonal metric on a box grid".into()));
            }
        }
        let shape = grid.shape();
        let ext_shape: Vec<usize> = shape.iter().map(|n| if boxed { 2 * n } else { *n }).collect();
        let ks: Vec<Vec<f64>> = (0..d).map(|ax| spectral::wavenumbers(ext_shape[ax], grid.period(ax))).collect();
        let total: usize = ext_shape.iter().product();
        let st = spectral::strides(&ext_shape);
        let mut energy = vec![0.0; total];
        let mut q = [0.0; 2];
        for (flat, e) in energy.iter_mut().enumerate() {
            for ax in 0..d {
                let j = (flat / st[ax]) % ext_shape[ax];
                q[ax] = hbar * ks[ax][j] + a[ax];
            }
            let mut t = 0.0;
            for i in 0..d {
                for j in 0..d {
                    t += metric[i * d + j] * q[i] * q[j];
                }
            }
            *e = 0.5 * t;
        }
        Ok(KineticSpectrum {
            shape,
            ext_shape,
            boxed,
            energy,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energy
    }

    /// Applies the Fourier multiplier `m` (indexed like [`Self::energies`]).
    pub fn apply(&self, values: &mut [Complex64], m: &[Complex64]) {
        let mut ext = if self.boxed {
            odd_extension(values, &self.shape)
        } else {
            values.to_vec()
        };
        fft_nd(&mut ext, &self.ext_shape, false);
        for (z, f) in ext.iter_mut().zip(m) {
            *z *= f;
        }
        fft_nd(&mut ext, &self.ext_shape, true);
        if self.boxed {
            restrict(&ext, &self.ext_shape, &self.shape, values);
        } else {
            values.copy_from_slice(&ext);
        }
    }
}

pub(crate) fn fft_nd(values: &mut [Complex64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        spectral::for_each_lane(values, shape, axis, |lane| {
            if inverse {
                spectral::ifft(lane);
            } else {
                spectral::fft(lane);
            }
        });
    }
}

/// Odd reflection about both ends of every axis of a cell-centred grid.
fn odd_extension(values: &[Complex64], shape: &[usize]) -> Vec<Complex64> {
    let ext_shape: Vec<usize> = shape.iter().map(|n| 2 * n).collect();
    let st = spectral::strides(shape);
    let est = spectral::strides(&ext_shape);
    let total: usize = ext_shape.iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    for (flat, z) in out.iter_mut().enumerate() {
        let mut src = 0;
        let mut sign = 1.0;
        for a in 0..shape.len() {
            let j = (flat / est[a]) % ext_shape[a];
            let n = shape[a];
            let jj = if j < n {
                j
            } else {
                sign = -sign;
                2 * n - 1 - j
            };
            src += jj * st[a];
        }
        *z = values[src] * sign;
    }
    out
}

fn restrict(ext: &[Complex64], ext_shape: &[usize], shape: &[usize], out: &mut [Complex64]) {
    let st = spectral::strides(shape);
    let est = spectral::strides(ext_shape);
    for (flat, z) in out.iter_mut().enumerate() {
        let mut src = 0;
        for a in 0..shape.len() {
            src += ((flat / st[a]) % shape[a]) * est[a];
        }
        *z = ext[src];
    }
}
