use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Boundary, PhaseGrid};
use crate::spectral;

/// Real function sampled on a phase grid (x axes then p axes, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a phase grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(PhaseField { grid, values })
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&[f64], &[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let (x, p) = grid.point(i);
                f(&x, &p)
            })
            .collect();
        PhaseField { grid, values }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise product.
    pub fn product(&self, other: &PhaseField) -> Result<PhaseField> {
        self.grid.ensure_same(&other.grid)?;
        Ok(PhaseField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// How phase-space derivatives are discretised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Fourier differentiation on every axis; momentum axes are treated as
    /// periodic, so fields must decay towards the momentum edges.
    Spectral,
    /// Fourth-order central differences with one-sided closures. Exact on
    /// polynomials up to degree four.
    FiniteDifference,
}

/// Derivative of `field` along phase axis `axis` (x axes first).
pub fn phase_derivative(field: &PhaseField, axis: usize, scheme: DerivativeScheme) -> Result<Vec<f64>> {
    let grid = field.grid();
    let shape = grid.shape();
    if axis >= shape.len() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: shape.len(),
        });
    }
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("phase_derivative"));
    }
    let h = grid.spacing(axis);
    let spectral_ok = axis >= grid.dim() || grid.x().boundary() == Boundary::Periodic;
    if scheme == DerivativeScheme::FiniteDifference || !spectral_ok {
        return Ok(spectral::derivative_fd4(&field.values, &shape, axis, h));
    }
    let period = grid.period(axis);
    let mut data: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectral::for_each_lane(&mut data, &shape, axis, |lane| {
        spectral::differentiate_periodic(lane, period, 1);
    });
    Ok(data.into_iter().map(|z| z.re).collect())
}

/// `{F, G} = dF/dp_j dG/dx^j - dG/dp_j dF/dx^j`.
///
/// This sign convention gives `{p, x} = 1`, the transpose of the more common
/// one.
pub fn poisson_bracket(f: &PhaseField, g: &PhaseField, scheme: DerivativeScheme) -> Result<PhaseField> {
    f.grid.ensure_same(&g.grid)?;
    let d = f.grid.dim();
    let mut out = vec![0.0; f.values.len()];
    for j in 0..d {
        let fp = phase_derivative(f, d + j, scheme)?;
        let gx = phase_derivative(g, j, scheme)?;
        let gp = phase_derivative(g, d + j, scheme)?;
        let fx = phase_derivative(f, j, scheme)?;
        for i in 0..out.len() {
            out[i] += fp[i] * gx[i] - gp[i] * fx[i];
        }
    }
    PhaseField::new(f.grid.clone(), out)
}
