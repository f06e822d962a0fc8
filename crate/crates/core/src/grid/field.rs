use num_complex::Complex64;

use super::{Boundary, ConfigGrid, Parity};
use crate::error::{Error, Result};
use crate::spectral;

/// Scalar types a field can carry.
pub trait FieldValue: Copy + Default + std::fmt::Debug + PartialEq + Send + Sync + 'static {
    fn to_complex(self) -> Complex64;
    fn from_complex(z: Complex64) -> Self;
    fn is_finite_value(self) -> bool;
    fn zero() -> Self {
        Self::default()
    }
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
}

impl FieldValue for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl FieldValue for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Scalar field sampled at the nodes of a configuration grid.
///
/// `parity` records how the field is reflected when a box grid is doubled;
/// it is ignored on periodic grids.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T: FieldValue = f64> {
    grid: ConfigGrid,
    values: Vec<T>,
    parity: Parity,
}

impl<T: FieldValue> ScalarField<T> {
    pub fn new(grid: ConfigGrid, values: Vec<T>) -> Result<Self> {
        Self::with_parity(grid, values, Parity::Even)
    }

    pub fn with_parity(grid: ConfigGrid, values: Vec<T>, parity: Parity) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values, parity })
    }

    pub fn from_fn(grid: ConfigGrid, f: impl Fn(&[f64]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        ScalarField {
            grid,
            values,
            parity: Parity::Even,
        }
    }

    pub fn constant(grid: ConfigGrid, v: T) -> Self {
        let n = grid.len();
        ScalarField {
            grid,
            values: vec![v; n],
            parity: Parity::Even,
        }
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn set_parity(&mut self, parity: Parity) {
        self.parity = parity;
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.to_complex().norm())
            .fold(0.0, f64::max)
    }
}

/// Covector field: `dim` real components per node.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorField {
    grid: ConfigGrid,
    components: Vec<Vec<f64>>,
}

impl CovectorField {
    pub fn new(grid: ConfigGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} components for a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("component length differs from node count".into()));
        }
        Ok(CovectorField { grid, components })
    }

    pub fn zeros(grid: ConfigGrid) -> Self {
        let components = vec![vec![0.0; grid.len()]; grid.dim()];
        CovectorField { grid, components }
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn component(&self, a: usize) -> &[f64] {
        &self.components[a]
    }

    pub fn component_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.components[a]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Covector at node `idx`.
    pub fn at(&self, idx: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[idx]).collect()
    }
}

/// `d^order f / (dx^axis)^order`, spectrally on the (possibly doubled) grid.
pub fn spectral_derivative_order<T: FieldValue>(
    field: &ScalarField<T>,
    axis: usize,
    order: u32,
) -> Result<ScalarField<T>> {
    let grid = field.grid();
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    if field.values.iter().any(|v| !v.is_finite_value()) {
        return Err(Error::NonFinite("spectral_derivative"));
    }
    let shape = grid.shape();
    let period = grid.period(axis);
    let mut data: Vec<Complex64> = field.values.iter().map(|v| v.to_complex()).collect();
    match grid.boundary() {
        Boundary::Periodic => {
            spectral::for_each_lane(&mut data, &shape, axis, |lane| {
                spectral::differentiate_periodic(lane, period, order);
            });
        }
        Boundary::BoxDoubled => {
            let sign = field.parity.sign();
            let mut ext: Vec<Complex64> = Vec::new();
            spectral::for_each_lane(&mut data, &shape, axis, |lane| {
                let n = lane.len();
                ext.clear();
                ext.extend_from_slice(lane);
                ext.extend(lane.iter().rev().map(|z| z * sign));
                spectral::differentiate_periodic(&mut ext, period, order);
                lane.copy_from_slice(&ext[..n]);
            });
        }
    }
    let parity = if order % 2 == 1 {
        field.parity.flip()
    } else {
        field.parity
    };
    Ok(ScalarField {
        grid: grid.clone(),
        values: data.into_iter().map(T::from_complex).collect(),
        parity,
    })
}

/// First derivative along `axis`.
pub fn spectral_derivative<T: FieldValue>(field: &ScalarField<T>, axis: usize) -> Result<ScalarField<T>> {
    spectral_derivative_order(field, axis, 1)
}

/// Rectangle-rule integral (spectrally accurate for periodic and reflected
/// box fields) with a fixed left-to-right summation order.
pub fn integrate<T: FieldValue>(field: &ScalarField<T>) -> T {
    let dv = field.grid.cell_volume();
    let mut acc = T::zero();
    for v in &field.values {
        acc = acc.add(*v);
    }
    acc.scale(dv)
}
