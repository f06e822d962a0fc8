//! Discretized configuration, phase and sphere domains.
//!
//! Every grid here is a single chart. Configuration grids are either
//! periodic (nodes `lo + j h`) or box grids whose fields are extended by
//! even/odd reflection to a periodic domain of twice the length (nodes
//! cell-centred at `lo + (j + 1/2) h` so the reflection maps nodes onto
//! nodes).

mod field;
mod sphere;
mod synchronicity;

pub use field::{integrate, spectral_derivative, spectral_derivative_order, CovectorField, FieldValue, ScalarField};
pub use sphere::{gauss_legendre, SphericalGrid};
pub use synchronicity::{momentum_of_synchronicity, SynchronicityField};

use crate::error::{Error, Result};

/// Smallest admissible number of points per axis.
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Box with walls at both ends, realized by reflection doubling.
    BoxDoubled,
}

/// Reflection parity used when a box-grid field is doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid("non-finite extent".into()));
        }
        if hi - lo <= 0.0 {
            return Err(Error::InvalidGrid(format!("non-positive extent [{lo}, {hi}]")));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{points} points per axis, need at least {MIN_POINTS}"
            )));
        }
        Ok(Axis { lo, hi, points })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.points as f64
    }
}

/// Uniform configuration-space grid in one or two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigGrid {
    axes: Vec<Axis>,
    boundary: Boundary,
}

/// Builds a uniform grid; a single extent is broadcast to every axis.
pub fn make_uniform_grid(
    dim: usize,
    extents: &[(f64, f64)],
    points: usize,
    boundary: Boundary,
) -> Result<ConfigGrid> {
    if !(1..=2).contains(&dim) {
        return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
    }
    let extents: Vec<(f64, f64)> = match extents.len() {
        0 => return Err(Error::InvalidGrid("no extents given".into())),
        1 => vec![extents[0]; dim],
        n if n == dim => extents.to_vec(),
        n => {
            return Err(Error::InvalidGrid(format!(
                "{n} extents for a {dim}-dimensional grid"
            )))
        }
    };
    ConfigGrid::new(&extents, &vec![points; dim], boundary)
}

impl ConfigGrid {
    pub fn new(extents: &[(f64, f64)], points: &[usize], boundary: Boundary) -> Result<Self> {
        let dim = extents.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if points.len() != dim {
            return Err(Error::InvalidGrid("points/extents length mismatch".into()));
        }
        let axes = extents
            .iter()
            .zip(points)
            .map(|(&(lo, hi), &n)| Axis::new(lo, hi, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConfigGrid { axes, boundary })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    /// Period of the (possibly doubled) periodic domain along axis `a`.
    pub fn period(&self, a: usize) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.axes[a].length(),
            Boundary::BoxDoubled => 2.0 * self.axes[a].length(),
        }
    }

    /// Node coordinates along axis `a`.
    pub fn coords(&self, a: usize) -> Vec<f64> {
        let ax = &self.axes[a];
        let h = ax.spacing();
        let offset = match self.boundary {
            Boundary::Periodic => 0.0,
            Boundary::BoxDoubled => 0.5,
        };
        (0..ax.points).map(|j| ax.lo + (j as f64 + offset) * h).collect()
    }

    /// Coordinates of the node with flat (row-major) index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.point_into(idx, &mut out);
        out
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        let shape = self.shape();
        let mut rem = idx;
        let offset = match self.boundary {
            Boundary::Periodic => 0.0,
            Boundary::BoxDoubled => 0.5,
        };
        for a in (0..self.dim()).rev() {
            let j = rem % shape[a];
            rem /= shape[a];
            let ax = &self.axes[a];
            out[a] = ax.lo + (j as f64 + offset) * ax.spacing();
        }
    }

    /// All node coordinates in flat order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &ConfigGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Cotangent-bundle grid: configuration axes followed by momentum axes.
///
/// Momentum nodes are cell-centred about `center`, so the node set is
/// exactly symmetric: `center + (j + 1/2 - n/2) h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    x: ConfigGrid,
    p_axes: Vec<Axis>,
    p_center: Vec<f64>,
}

impl PhaseGrid {
    /// `p_half_width[a]` is the distance from the centre to the outer cell edge.
    pub fn new(x: ConfigGrid, p_center: &[f64], p_half_width: &[f64], p_points: &[usize]) -> Result<Self> {
        let dim = x.dim();
        if p_center.len() != dim || p_half_width.len() != dim || p_points.len() != dim {
            return Err(Error::InvalidGrid("momentum axes must match configuration dimension".into()));
        }
        let p_axes = (0..dim)
            .map(|a| Axis::new(p_center[a] - p_half_width[a], p_center[a] + p_half_width[a], p_points[a]))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseGrid {
            x,
            p_axes,
            p_center: p_center.to_vec(),
        })
    }

    /// Square phase grid with the same node count on every axis.
    pub fn symmetric(x: ConfigGrid, p_half_width: f64, p_points: usize) -> Result<Self> {
        let dim = x.dim();
        PhaseGrid::new(x, &vec![0.0; dim], &vec![p_half_width; dim], &vec![p_points; dim])
    }

    pub fn x(&self) -> &ConfigGrid {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn p_axis(&self, a: usize) -> &Axis {
        &self.p_axes[a]
    }

    pub fn p_center(&self) -> &[f64] {
        &self.p_center
    }

    pub fn p_spacing(&self, a: usize) -> f64 {
        self.p_axes[a].spacing()
    }

    pub fn p_coords(&self, a: usize) -> Vec<f64> {
        let ax = &self.p_axes[a];
        let h = ax.spacing();
        (0..ax.points).map(|j| ax.lo + (j as f64 + 0.5) * h).collect()
    }

    /// Shape of phase-space arrays: x axes then p axes.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = self.x.shape();
        s.extend(self.p_axes.iter().map(|a| a.points));
        s
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn p_len(&self) -> usize {
        self.p_axes.iter().map(|a| a.points).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.x.cell_volume() * self.p_axes.iter().map(Axis::spacing).product::<f64>()
    }

    /// Spacing along phase axis `a` (x axes first).
    pub fn spacing(&self, a: usize) -> f64 {
        let d = self.dim();
        if a < d {
            self.x.spacing(a)
        } else {
            self.p_axes[a - d].spacing()
        }
    }

    /// Periodic length along phase axis `a`.
    pub fn period(&self, a: usize) -> f64 {
        let d = self.dim();
        if a < d {
            self.x.period(a)
        } else {
            self.p_axes[a - d].length()
        }
    }

    /// Coordinates `(x, p)` of the flat phase index.
    pub fn point(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let p_len = self.p_len();
        let x = self.x.point(idx / p_len);
        let mut rem = idx % p_len;
        let mut p = vec![0.0; d];
        for a in (0..d).rev() {
            let n = self.p_axes[a].points;
            let j = rem % n;
            rem /= n;
            let ax = &self.p_axes[a];
            p[a] = ax.lo + (j as f64 + 0.5) * ax.spacing();
        }
        (x, p)
    }

    pub(crate) fn ensure_same(&self, other: &PhaseGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch("phase fields live on different grids".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_spacing() {
        let g = make_uniform_grid(1, &[(0.0, 2.0 * PI)], 64, Boundary::Periodic).unwrap();
        assert_eq!(g.spacing(0), 2.0 * PI / 64.0);
        assert_eq!(g.coords(0)[0], 0.0);
    }

    #[test]
    fn box_grid_doubles_to_two_pi() {
        let g = make_uniform_grid(1, &[(0.0, PI)], 64, Boundary::BoxDoubled).unwrap();
        assert!((g.period(0) - 2.0 * PI).abs() < 1e-15);
        let c = g.coords(0);
        assert!((c[0] - PI / 128.0).abs() < 1e-15);
        assert!((c[63] - (PI - PI / 128.0)).abs() < 1e-14);
    }

    #[test]
    fn product_count_in_2d() {
        let g = make_uniform_grid(2, &[(0.0, 2.0 * PI)], 32, Boundary::Periodic).unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.point(33), vec![2.0 * PI / 32.0, 2.0 * PI / 32.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_uniform_grid(3, &[(0.0, 1.0)], 16, Boundary::Periodic).is_err());
        assert!(make_uniform_grid(1, &[(1.0, 1.0)], 16, Boundary::Periodic).is_err());
        assert!(make_uniform_grid(1, &[(0.0, 1.0)], 4, Boundary::Periodic).is_err());
    }

    #[test]
    fn construction_is_bit_reproducible() {
        let a = make_uniform_grid(2, &[(-1.3, 2.7), (0.1, 5.0)], 48, Boundary::Periodic).unwrap();
        let b = make_uniform_grid(2, &[(-1.3, 2.7), (0.1, 5.0)], 48, Boundary::Periodic).unwrap();
        for (pa, pb) in a.points().iter().zip(b.points()) {
            for (u, v) in pa.iter().zip(pb) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn phase_grid_momentum_nodes_are_symmetric() {
        let x = make_uniform_grid(1, &[(-4.0, 4.0)], 16, Boundary::Periodic).unwrap();
        let pg = PhaseGrid::new(x, &[0.5], &[3.0], &[12]).unwrap();
        let p = pg.p_coords(0);
        for j in 0..12 {
            assert!((p[j] - 0.5 + (p[11 - j] - 0.5)).abs() < 1e-14);
        }
        let (xs, ps) = pg.point(5 * 12 + 7);
        assert_eq!(xs[0], -4.0 + 5.0 * 0.5);
        assert_eq!(ps[0], p[7]);
    }
}
