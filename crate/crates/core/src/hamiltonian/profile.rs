use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{spectral_derivative, Boundary, ConfigGrid, ScalarField};
use crate::spectral;

/// Scalar function on configuration space with a known gradient.
///
/// Analytic variants are evaluated in closed form; tabulated samples are
/// differentiated spectrally on their own grid and evaluated elsewhere by
/// trigonometric interpolation.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `gradient . x + offset`
    Linear { gradient: Vec<f64>, offset: f64 },
    /// `sum_n coeffs[n] * |x - center|^(2n)`
    Radial { center: Vec<f64>, coeffs: Vec<f64> },
    /// `amplitude * sin(wavevector . x + phase)`
    Sinusoid {
        amplitude: f64,
        wavevector: Vec<f64>,
        phase: f64,
    },
    Tabulated(Tabulated),
}

/// Grid samples plus cached spectral data for off-grid evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    field: ScalarField,
    gradient: Vec<Vec<f64>>,
    ext_shape: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl Tabulated {
    pub fn new(field: ScalarField) -> Result<Self> {
        if field.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tabulated profile"));
        }
        let grid = field.grid().clone();
        let gradient = (0..grid.dim())
            .map(|a| spectral_derivative(&field, a).map(|d| d.into_values()))
            .collect::<Result<Vec<_>>>()?;
        let (ext_shape, mut coeffs) = extended_samples(&field);
        for a in 0..ext_shape.len() {
            spectral::for_each_lane(&mut coeffs, &ext_shape, a, |lane| spectral::fft(lane));
        }
        let total = coeffs.len() as f64;
        for c in coeffs.iter_mut() {
            *c /= total;
        }
        Ok(Tabulated {
            field,
            gradient,
            ext_shape,
            coeffs,
        })
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    fn eval_series(&self, x: &[f64], deriv_axis: Option<usize>) -> f64 {
        let grid = self.field.grid();
        let dim = grid.dim();
        let st = spectral::strides(&self.ext_shape);
        let mut acc = Complex64::new(0.0, 0.0);
        let origin: Vec<f64> = (0..dim)
            .map(|a| match grid.boundary() {
                Boundary::Periodic => grid.axis(a).lo,
                Boundary::BoxDoubled => grid.axis(a).lo + 0.5 * grid.spacing(a),
            })
            .collect();
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut arg = 0.0;
            let mut factor = Complex64::new(1.0, 0.0);
            for a in 0..dim {
                let n = self.ext_shape[a];
                let j = (flat / st[a]) % n;
                let period = grid.period(a);
                let k = if spectral::is_nyquist(j, n) {
                    0.0
                } else {
                    2.0 * std::f64::consts::PI * spectral::mode_index(j, n) as f64 / period
                };
                arg += k * (x[a] - origin[a]);
                if deriv_axis == Some(a) {
                    factor *= Complex64::new(0.0, k);
                }
            }
            acc += c * factor * Complex64::from_polar(1.0, arg);
        }
        acc.re
    }
}

/// Samples of `field` on the periodic domain (doubled with even reflection
/// on box grids), in row-major order.
fn extended_samples(field: &ScalarField) -> (Vec<usize>, Vec<Complex64>) {
    let grid = field.grid();
    let shape = grid.shape();
    match grid.boundary() {
        Boundary::Periodic => (
            shape,
            field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        ),
        Boundary::BoxDoubled => {
            let ext: Vec<usize> = shape.iter().map(|n| 2 * n).collect();
            let total: usize = ext.iter().product();
            let st_src = spectral::strides(&shape);
            let st_ext = spectral::strides(&ext);
            let mut out = vec![Complex64::new(0.0, 0.0); total];
            for (flat, slot) in out.iter_mut().enumerate() {
                let mut src = 0;
                for a in 0..shape.len() {
                    let j = (flat / st_ext[a]) % ext[a];
                    let n = shape[a];
                    let js = if j < n { j } else { 2 * n - 1 - j };
                    src += js * st_src[a];
                }
                *slot = Complex64::new(field.values()[src], 0.0);
            }
            (ext, out)
        }
    }
}

impl Profile {
    pub fn tabulated(field: ScalarField) -> Result<Self> {
        Ok(Profile::Tabulated(Tabulated::new(field)?))
    }

    /// `0.5 * stiffness * |x - center|^2`
    pub fn quadratic(center: Vec<f64>, stiffness: f64) -> Self {
        Profile::Radial {
            center,
            coeffs: vec![0.0, 0.5 * stiffness],
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Zero | Profile::Constant(_))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(c) => *c,
            Profile::Linear { gradient, offset } => {
                offset + gradient.iter().zip(x).map(|(g, x)| g * x).sum::<f64>()
            }
            Profile::Radial { center, coeffs } => {
                let r2: f64 = x.iter().zip(center).map(|(x, c)| (x - c).powi(2)).sum();
                // Horner in r^2
                coeffs.iter().rev().fold(0.0, |acc, c| acc * r2 + c)
            }
            Profile::Sinusoid {
                amplitude,
                wavevector,
                phase,
            } => {
                let arg: f64 = wavevector.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase;
                amplitude * arg.sin()
            }
            Profile::Tabulated(t) => t.eval_series(x, None),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    /// Writes the gradient at `x` into `out`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Profile::Zero | Profile::Constant(_) => out.iter_mut().for_each(|v| *v = 0.0),
            Profile::Linear { gradient, .. } => out.copy_from_slice(gradient),
            Profile::Radial { center, coeffs } => {
                let r2: f64 = x.iter().zip(center).map(|(x, c)| (x - c).powi(2)).sum();
                // d/dr2 of the polynomial, times 2 (x - c)
                let mut dpoly = 0.0;
                for (n, c) in coeffs.iter().enumerate().skip(1).rev() {
                    dpoly = dpoly * r2 + n as f64 * c;
                }
                for ((o, x), c) in out.iter_mut().zip(x).zip(center) {
                    *o = 2.0 * (x - c) * dpoly;
                }
            }
            Profile::Sinusoid {
                amplitude,
                wavevector,
                phase,
            } => {
                let arg: f64 = wavevector.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase;
                for (o, k) in out.iter_mut().zip(wavevector) {
                    *o = amplitude * k * arg.cos();
                }
            }
            Profile::Tabulated(t) => {
                for (a, o) in out.iter_mut().enumerate() {
                    *o = t.eval_series(x, Some(a));
                }
            }
        }
    }

    /// Values at every node of `grid`.
    pub fn sample(&self, grid: &ConfigGrid) -> Vec<f64> {
        if let Profile::Tabulated(t) = self {
            if t.field.grid() == grid {
                return t.field.values().to_vec();
            }
        }
        let mut x = vec![0.0; grid.dim()];
        (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                self.value(&x)
            })
            .collect()
    }

    /// Gradient components at every node of `grid`, one vector per axis.
    pub fn sample_gradient(&self, grid: &ConfigGrid) -> Vec<Vec<f64>> {
        if let Profile::Tabulated(t) = self {
            if t.field.grid() == grid {
                return t.gradient.clone();
            }
        }
        let dim = grid.dim();
        let mut out = vec![vec![0.0; grid.len()]; dim];
        let mut x = vec![0.0; dim];
        for i in 0..grid.len() {
            grid.point_into(i, &mut x);
            let g = self.gradient(&x);
            for a in 0..dim {
                out[a][i] = g[a];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use std::f64::consts::PI;

    #[test]
    fn radial_gradient_matches_finite_difference() {
        let p = Profile::Radial {
            center: vec![0.3, -0.2],
            coeffs: vec![1.0, 0.5, 0.1, 0.02],
        };
        let x = [0.7, 1.1];
        let g = p.gradient(&x);
        let h = 1e-6;
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (p.value(&xp) - p.value(&xm)) / (2.0 * h);
            assert!((fd - g[a]).abs() < 1e-7);
        }
    }

    #[test]
    fn tabulated_interpolates_off_grid() {
        let g = make_uniform_grid(1, &[(0.0, 2.0 * PI)], 32, Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0]).cos() + 0.3 * x[0].sin());
        let p = Profile::tabulated(f).unwrap();
        let x = [1.2345];
        assert!((p.value(&x) - ((2.0 * x[0]).cos() + 0.3 * x[0].sin())).abs() < 1e-12);
        let d = p.gradient(&x)[0];
        assert!((d - (-2.0 * (2.0 * x[0]).sin() + 0.3 * x[0].cos())).abs() < 1e-11);
    }

    #[test]
    fn tabulated_on_box_grid_uses_even_extension() {
        let g = make_uniform_grid(1, &[(0.0, PI)], 32, Boundary::BoxDoubled).unwrap();
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).cos());
        let p = Profile::tabulated(f).unwrap();
        assert!((p.value(&[0.4]) - (1.2f64).cos()).abs() < 1e-12);
    }
}
