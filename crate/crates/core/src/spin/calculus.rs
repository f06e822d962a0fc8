use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SpinWeight;
use crate::error::{Error, Result};
use crate::grid::SphericalGrid;
use crate::spectral;

/// Spectral `d/dtheta` and `d/dphi` on a sphere grid for one spin weight.
///
/// In `phi` the field is written `e^{i s phi} g` with `g` periodic; mode `n`
/// of `g` carries azimuthal number `n + s`. In `theta` each mode is
/// collocated on a cosine or sine series whose parity follows `n`: integer
/// multiples of `theta` for `s = 0`, half-odd multiples for `s = 1/2`.
pub(crate) struct SphereCalculus {
    n_theta: usize,
    n_phi: usize,
    s: f64,
    shift: Vec<Complex64>,
    d_theta: [DMatrix<f64>; 2],
}

impl SphereCalculus {
    pub fn new(grid: &SphericalGrid, weight: SpinWeight) -> Result<Self> {
        let s = weight.value();
        let theta = grid.theta();
        let n = theta.len();
        let mut d_theta = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for (parity, d) in d_theta.iter_mut().enumerate() {
            let mut b = DMatrix::zeros(n, n);
            let mut db = DMatrix::zeros(n, n);
            for (i, &t) in theta.iter().enumerate() {
                for j in 0..n {
                    let (k, even) = match (weight, parity) {
                        (SpinWeight::Zero, 0) => (j as f64, true),
                        (SpinWeight::Zero, _) => ((j + 1) as f64, false),
                        (SpinWeight::Half, 0) => (j as f64 + 0.5, true),
                        (SpinWeight::Half, _) => (j as f64 + 0.5, false),
                    };
                    if even {
                        b[(i, j)] = (k * t).cos();
                        db[(i, j)] = -k * (k * t).sin();
                    } else {
                        b[(i, j)] = (k * t).sin();
                        db[(i, j)] = k * (k * t).cos();
                    }
                }
            }
            let inv = b
                .try_inverse()
                .ok_or_else(|| Error::Quadrature("singular colatitude collocation matrix".into()))?;
            *d = db * inv;
        }
        let shift = grid.phi().iter().map(|&p| Complex64::from_polar(1.0, s * p)).collect();
        Ok(SphereCalculus {
            n_theta: n,
            n_phi: grid.n_phi(),
            s,
            shift,
            d_theta,
        })
    }

    /// Row-major `[theta][n]` azimuthal modes of `e^{-i s phi} f`.
    fn modes(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(f.len());
        for row in f.chunks(self.n_phi) {
            let start = out.len();
            out.extend(row.iter().zip(&self.shift).map(|(v, e)| v * e.conj()));
            spectral::fft(&mut out[start..]);
        }
        out
    }

    fn synthesize(&self, mut modes: Vec<Complex64>) -> Vec<Complex64> {
        for row in modes.chunks_mut(self.n_phi) {
            spectral::ifft(row);
            row.iter_mut().zip(&self.shift).for_each(|(v, e)| *v *= e);
        }
        modes
    }

    pub fn d_phi(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut m = self.modes(f);
        for row in m.chunks_mut(self.n_phi) {
            for (j, v) in row.iter_mut().enumerate() {
                let k = spectral::mode_index(j, self.n_phi) as f64 + self.s;
                *v *= Complex64::new(0.0, k);
            }
        }
        self.synthesize(m)
    }

    pub fn d_theta(&self, f: &[Complex64]) -> Vec<Complex64> {
        let m = self.modes(f);
        let mut out = vec![Complex64::new(0.0, 0.0); m.len()];
        for j in 0..self.n_phi {
            let parity = spectral::mode_index(j, self.n_phi).rem_euclid(2) as usize;
            let d = &self.d_theta[parity];
            for i in 0..self.n_theta {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.n_theta {
                    acc += m[k * self.n_phi + j] * d[(i, k)];
                }
                out[i * self.n_phi + j] = acc;
            }
        }
        self.synthesize(out)
    }
}
