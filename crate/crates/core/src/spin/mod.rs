//! Angular-momentum and spin operators on the sphere in Euler-angle form.
//!
//! Fields carry a spin weight `s` in `{0, 1/2}`. The third Euler angle is
//! never gridded: a weight-`s` field stands for `f(theta, phi) e^{i s chi}`
//! and `d/dchi` acts as multiplication by `i s`. Weight-1/2 fields are
//! double-valued in `phi`.

mod calculus;
mod checks;
mod io;
mod operators;

pub use checks::{
    commutator_table, pauli_reconstruct, random_probes, rotor_block, rotor_evolve, rotor_hamiltonian_expectation,
    spin_eigencheck, CommutatorRow, Eigencheck, OperatorFamily, PauliReport,
};
pub use io::{read_spin_state, write_commutator_csv, write_eigencheck_csv, write_spin_state};
pub use operators::{apply_angular_operator, SpinMatrixRep, SpinOperator};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SphericalGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinWeight {
    Zero,
    Half,
}

impl SpinWeight {
    pub fn value(self) -> f64 {
        match self {
            SpinWeight::Zero => 0.0,
            SpinWeight::Half => 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinField {
    grid: SphericalGrid,
    weight: SpinWeight,
    values: Vec<Complex64>,
    hbar: f64,
}

impl SpinField {
    pub fn new(grid: SphericalGrid, weight: SpinWeight, values: Vec<Complex64>, hbar: f64) -> Result<Self> {
        crate::quantum::check_hbar(hbar)?;
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a sphere grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("spin field"));
        }
        Ok(SpinField {
            grid,
            weight,
            values,
            hbar,
        })
    }

    pub fn from_fn(
        grid: SphericalGrid,
        weight: SpinWeight,
        hbar: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let values = grid.sample(f);
        Self::new(grid, weight, values, hbar)
    }

    /// `Y_l^m = sqrt((2l+1)/4pi) e^{i m phi} d^l_{m0}(theta)`, Condon-Shortley
    /// phase.
    pub fn spherical_harmonic(grid: SphericalGrid, l: usize, m: i64, hbar: f64) -> Result<Self> {
        check_degree(&grid, 2 * l as i64, 2 * m)?;
        let c = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        let (tj, tm) = (2 * l as i64, 2 * m);
        Self::from_fn(grid, SpinWeight::Zero, hbar, |t, p| {
            Complex64::from_polar(c * wigner_d(tj, tm, 0, t), m as f64 * p)
        })
    }

    /// Weight-1/2 harmonic `sqrt((2j+1)/4pi) e^{i m phi} d^j_{m,1/2}(theta)`
    /// with `j = two_j / 2`, `m = two_m / 2` half-integers.
    pub fn half_harmonic(grid: SphericalGrid, two_j: i64, two_m: i64, hbar: f64) -> Result<Self> {
        if two_j % 2 == 0 || two_m % 2 == 0 {
            return Err(Error::arg("two_j", "j and m must be half-integers"));
        }
        check_degree(&grid, two_j, two_m)?;
        let c = ((two_j + 1) as f64 / (4.0 * PI)).sqrt();
        let m = two_m as f64 / 2.0;
        Self::from_fn(grid, SpinWeight::Half, hbar, |t, p| {
            Complex64::from_polar(c * wigner_d(two_j, two_m, 1, t), m * p)
        })
    }

    /// `|+> = e^{i phi/2} cos(theta/2) / sqrt(2 pi)` or
    /// `|-> = e^{-i phi/2} sin(theta/2) / sqrt(2 pi)`.
    pub fn half_spin(grid: SphericalGrid, up: bool, hbar: f64) -> Result<Self> {
        let c = (2.0 * PI).sqrt().recip();
        Self::from_fn(grid, SpinWeight::Half, hbar, |t, p| {
            if up {
                Complex64::from_polar(c * (t / 2.0).cos(), p / 2.0)
            } else {
                Complex64::from_polar(c * (t / 2.0).sin(), -p / 2.0)
            }
        })
    }

    /// `N [ sqrt((l+m+1)/(2l+1)) |+> Y_l^m + sqrt((l-m)/(2l+1)) |-> Y_l^{m+1} ]`
    /// for `-l-1 <= m <= l`, normalized by quadrature.
    pub fn multiplet(grid: SphericalGrid, l: usize, m: i64, hbar: f64) -> Result<Self> {
        let li = l as i64;
        if m < -li - 1 || m > li {
            return Err(Error::arg("m", format!("must lie in [{}, {li}]", -li - 1)));
        }
        check_degree(&grid, 2 * li + 1, 2 * m + 1)?;
        let up = Self::half_spin(grid.clone(), true, hbar)?;
        let down = Self::half_spin(grid.clone(), false, hbar)?;
        let y = |mm: i64| -> Result<Vec<Complex64>> {
            if mm.abs() > li {
                Ok(vec![Complex64::new(0.0, 0.0); grid.len()])
            } else {
                Ok(Self::spherical_harmonic(grid.clone(), l, mm, hbar)?.values)
            }
        };
        let a = (((li + m + 1) as f64) / (2 * l + 1) as f64).sqrt();
        let b = (((li - m) as f64) / (2 * l + 1) as f64).sqrt();
        let (ym, ym1) = (y(m)?, y(m + 1)?);
        let values = (0..grid.len())
            .map(|i| a * up.values[i] * ym[i] + b * down.values[i] * ym1[i])
            .collect();
        Self::new(grid, SpinWeight::Half, values, hbar)?.normalized()
    }

    pub fn grid(&self) -> &SphericalGrid {
        &self.grid
    }

    pub fn weight(&self) -> SpinWeight {
        self.weight
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.values)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::arg("field", "zero norm"));
        }
        self.values.iter_mut().for_each(|z| *z /= n);
        Ok(self)
    }

    pub fn inner(&self, other: &SpinField) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self.grid.inner(&self.values, &other.values))
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> SpinField {
        SpinField {
            grid: self.grid.clone(),
            weight: self.weight,
            values,
            hbar: self.hbar,
        }
    }

    pub(crate) fn check_compatible(&self, other: &SpinField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("spin fields on different sphere grids".into()));
        }
        if self.weight != other.weight {
            return Err(Error::GridMismatch("spin fields of different weight".into()));
        }
        Ok(())
    }

    /// `||self - other||` under quadrature.
    pub fn distance(&self, other: &SpinField) -> Result<f64> {
        self.check_compatible(other)?;
        let d: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(self.grid.norm(&d))
    }
}

fn check_degree(grid: &SphericalGrid, two_j: i64, two_m: i64) -> Result<()> {
    if two_j < 0 || two_m.abs() > two_j {
        return Err(Error::arg("m", "requires |m| <= j"));
    }
    if two_j > 2 * grid.l_max() as i64 + 1 {
        return Err(Error::arg(
            "j",
            format!("degree {} exceeds the grid band limit {}", two_j as f64 / 2.0, grid.l_max()),
        ));
    }
    Ok(())
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner small-d `d^j_{m'm}(beta)` with all indices doubled.
pub fn wigner_d(two_j: i64, two_mp: i64, two_m: i64, beta: f64) -> f64 {
    let (j_p_mp, j_m_mp) = ((two_j + two_mp) / 2, (two_j - two_mp) / 2);
    let (j_p_m, j_m_m) = ((two_j + two_m) / 2, (two_j - two_m) / 2);
    let mp_m = (two_mp - two_m) / 2;
    let pre = (factorial(j_p_mp) * factorial(j_m_mp) * factorial(j_p_m) * factorial(j_m_m)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let lo = 0.max(-mp_m);
    let hi = j_p_m.min(j_m_mp);
    let mut acc = 0.0;
    for k in lo..=hi {
        let sign = if (mp_m + k) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial(j_p_m - k) * factorial(k) * factorial(mp_m + k) * factorial(j_m_mp - k);
        let pc = two_j - mp_m - 2 * k;
        let ps = mp_m + 2 * k;
        acc += sign / den * c.powi(pc as i32) * s.powi(ps as i32);
    }
    pre * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wigner_d_known_values() {
        let b = 0.7f64;
        assert!((wigner_d(1, 1, 1, b) - (b / 2.0).cos()).abs() < 1e-15);
        assert!((wigner_d(1, -1, 1, b) - (b / 2.0).sin()).abs() < 1e-15);
        assert!((wigner_d(1, 1, -1, b) + (b / 2.0).sin()).abs() < 1e-15);
        assert!((wigner_d(2, 0, 0, b) - b.cos()).abs() < 1e-15);
        assert!((wigner_d(2, 2, 0, b) + b.sin() / 2f64.sqrt()).abs() < 1e-15);
        assert!((wigner_d(4, 0, 0, b) - 0.5 * (3.0 * b.cos().powi(2) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn harmonics_are_orthonormal() {
        let g = SphericalGrid::new(10).unwrap();
        let mut fields = Vec::new();
        for l in 0..=4usize {
            for m in -(l as i64)..=l as i64 {
                fields.push(SpinField::spherical_harmonic(g.clone(), l, m, 1.0).unwrap());
            }
        }
        for (a, fa) in fields.iter().enumerate() {
            for (b, fb) in fields.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((fa.inner(fb).unwrap() - want).norm() < 1e-12);
            }
        }
        let y11 = &fields[3];
        let (t, p) = g.node(5);
        let want = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11.values()[5] - want).norm() < 1e-14);
    }

    #[test]
    fn half_spin_states_match_half_harmonics() {
        let g = SphericalGrid::new(6).unwrap();
        let up = SpinField::half_spin(g.clone(), true, 1.0).unwrap();
        let down = SpinField::half_spin(g.clone(), false, 1.0).unwrap();
        assert!(up.distance(&SpinField::half_harmonic(g.clone(), 1, 1, 1.0).unwrap()).unwrap() < 1e-14);
        assert!(down.distance(&SpinField::half_harmonic(g.clone(), 1, -1, 1.0).unwrap()).unwrap() < 1e-14);
        assert!((up.norm() - 1.0).abs() < 1e-13);
        assert!(up.inner(&down).unwrap().norm() < 1e-14);
    }

    #[test]
    fn rejects_degree_beyond_grid() {
        let g = SphericalGrid::new(4).unwrap();
        assert!(SpinField::spherical_harmonic(g.clone(), 5, 0, 1.0).is_err());
        assert!(SpinField::spherical_harmonic(g.clone(), 2, 3, 1.0).is_err());
        assert!(SpinField::multiplet(g, 1, 2, 1.0).is_err());
    }
}
