//! The canonical Hamiltonian class
//! `H = 1/2 h^{ij} (p_i + A_i)(p_j + A_j) + U`, its derived quantities, the
//! Poisson bracket on phase-space grids and quadratic charge functions.

mod bracket;
mod profile;

pub use bracket::{poisson_bracket, phase_derivative, DerivativeScheme, PhaseField};
pub use profile::{Profile, Tabulated};

use crate::error::{Error, Result};
use crate::grid::{ConfigGrid, PhaseGrid};

/// `H(x, p) = 1/2 s(x) h^{ij} (p_i + A_i(x))(p_j + A_j(x)) + U(x)`.
///
/// `h` is a constant symmetric positive-definite matrix. The optional
/// conformal factor `s(x)` gives a position-dependent metric and is only
/// accepted by the classical layer.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSpec {
    metric: Vec<f64>,
    metric_scale: Option<Profile>,
    vector_potential: Option<Vec<Profile>>,
    potential: Profile,
}

impl HamiltonianSpec {
    /// `metric` is the row-major `dim x dim` inverse metric `h^{ij}`.
    pub fn new(metric: Vec<f64>, vector_potential: Option<Vec<Profile>>, potential: Profile) -> Result<Self> {
        let dim = match metric.len() {
            1 => 1,
            4 => 2,
            n => return Err(Error::arg("metric", format!("{n} entries, expected 1 or 4"))),
        };
        if metric.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric"));
        }
        if dim == 2 && (metric[1] - metric[2]).abs() > 1e-14 * (metric[1].abs() + 1.0) {
            return Err(Error::arg("metric", "not symmetric"));
        }
        let positive = if dim == 1 {
            metric[0] > 0.0
        } else {
            metric[0] > 0.0 && metric[0] * metric[3] - metric[1] * metric[2] > 0.0
        };
        if !positive {
            return Err(Error::arg("metric", "not positive-definite"));
        }
        if let Some(a) = &vector_potential {
            if a.len() != dim {
                return Err(Error::arg("vector_potential", format!("{} components for dim {dim}", a.len())));
            }
        }
        let vector_potential = vector_potential.filter(|a| !a.iter().all(Profile::is_zero));
        Ok(HamiltonianSpec {
            metric,
            metric_scale: None,
            vector_potential,
            potential,
        })
    }

    /// `1/2 |p|^2`.
    pub fn free(dim: usize) -> Self {
        Self::new(identity(dim), None, Profile::Zero).expect("identity metric is valid")
    }

    /// `1/2 |p|^2 + 1/2 omega^2 |x|^2`.
    pub fn harmonic(dim: usize, omega: f64) -> Self {
        Self::new(identity(dim), None, Profile::quadratic(vec![0.0; dim], omega * omega))
            .expect("identity metric is valid")
    }

    /// `1/2 |p|^2 + U(|x|)` with `U = sum coeffs[n] r^(2n)`.
    pub fn central(dim: usize, coeffs: Vec<f64>) -> Self {
        Self::new(
            identity(dim),
            None,
            Profile::Radial {
                center: vec![0.0; dim],
                coeffs,
            },
        )
        .expect("identity metric is valid")
    }

    /// Attaches a position-dependent conformal factor to the metric.
    pub fn with_metric_scale(mut self, scale: Profile) -> Self {
        self.metric_scale = Some(scale);
        self
    }

    pub fn dim(&self) -> usize {
        if self.metric.len() == 1 {
            1
        } else {
            2
        }
    }

    pub fn metric(&self) -> &[f64] {
        &self.metric
    }

    pub fn potential(&self) -> &Profile {
        &self.potential
    }

    pub fn vector_potential(&self) -> Option<&[Profile]> {
        self.vector_potential.as_deref()
    }

    pub fn metric_scale(&self) -> Option<&Profile> {
        self.metric_scale.as_ref()
    }

    pub fn has_constant_metric(&self) -> bool {
        self.metric_scale.as_ref().is_none_or(Profile::is_constant)
    }

    /// Constant vector potential, if `A` is absent or constant.
    pub fn constant_vector_potential(&self) -> Option<Vec<f64>> {
        match &self.vector_potential {
            None => Some(vec![0.0; self.dim()]),
            Some(a) => {
                if a.iter().all(Profile::is_constant) {
                    Some(a.iter().map(|c| c.value(&[0.0; 2][..self.dim()])).collect())
                } else {
                    None
                }
            }
        }
    }

    /// Kinetic and potential parts split cleanly (`A = 0`, constant metric).
    pub fn is_separable(&self) -> bool {
        self.vector_potential.is_none() && self.metric_scale.is_none()
    }

    #[inline]
    fn shifted_momentum(&self, x: &[f64], p: &[f64]) -> [f64; 2] {
        let mut q = [0.0; 2];
        for j in 0..p.len() {
            q[j] = p[j] + self.vector_potential.as_ref().map_or(0.0, |a| a[j].value(x));
        }
        q
    }

    #[inline]
    fn metric_apply(&self, v: &[f64; 2]) -> [f64; 2] {
        let d = self.dim();
        let mut out = [0.0; 2];
        for i in 0..d {
            for j in 0..d {
                out[i] += self.metric[i * d + j] * v[j];
            }
        }
        out
    }
}

fn identity(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

/// `H(x, p)`.
pub fn eval_hamiltonian(h: &HamiltonianSpec, x: &[f64], p: &[f64]) -> f64 {
    let s = h.metric_scale.as_ref().map_or(1.0, |s| s.value(x));
    let q = h.shifted_momentum(x, p);
    let hq = h.metric_apply(&q);
    let quad: f64 = (0..h.dim()).map(|j| q[j] * hq[j]).sum();
    0.5 * s * quad + h.potential.value(x)
}

/// `(dH/dp, dH/dx)` at a phase point.
pub fn hamiltonian_gradients(h: &HamiltonianSpec, x: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = h.dim();
    let mut dh_dp = vec![0.0; d];
    let mut dh_dx = vec![0.0; d];
    hamiltonian_gradients_into(h, x, p, &mut dh_dp, &mut dh_dx);
    (dh_dp, dh_dx)
}

/// Allocation-free form of [`hamiltonian_gradients`].
pub fn hamiltonian_gradients_into(h: &HamiltonianSpec, x: &[f64], p: &[f64], dh_dp: &mut [f64], dh_dx: &mut [f64]) {
    let d = h.dim();
    let q = h.shifted_momentum(x, p);
    let hq = h.metric_apply(&q);
    let mut grad = [0.0; 2];
    let s = match &h.metric_scale {
        None => 1.0,
        Some(sp) => {
            sp.gradient_into(x, &mut grad[..d]);
            sp.value(x)
        }
    };
    let quad: f64 = (0..d).map(|j| q[j] * hq[j]).sum();
    for j in 0..d {
        dh_dp[j] = s * hq[j];
    }
    let mut du = [0.0; 2];
    h.potential.gradient_into(x, &mut du[..d]);
    for k in 0..d {
        dh_dx[k] = du[k] + 0.5 * grad[k] * quad;
    }
    if let Some(a) = &h.vector_potential {
        let mut da = [0.0; 2];
        for (j, aj) in a.iter().enumerate() {
            aj.gradient_into(x, &mut da[..d]);
            for k in 0..d {
                dh_dx[k] += dh_dp[j] * da[k];
            }
        }
    }
}

/// Legendre-transformed Lagrangian `p . dH/dp - H`.
pub fn lagrangian_of(h: &HamiltonianSpec, x: &[f64], p: &[f64]) -> f64 {
    let (dp, _) = hamiltonian_gradients(h, x, p);
    p.iter().zip(&dp).map(|(a, b)| a * b).sum::<f64>() - eval_hamiltonian(h, x, p)
}

/// Hamiltonian data sampled once on a configuration grid so that repeated
/// evaluations at `(x_i, p)` avoid re-evaluating the profiles.
#[derive(Clone, Debug)]
pub struct SampledHamiltonian {
    dim: usize,
    metric: Vec<f64>,
    u: Vec<f64>,
    du: Vec<Vec<f64>>,
    a: Option<Vec<Vec<f64>>>,
    // da[j][k][i] = d_k A_j at node i
    da: Option<Vec<Vec<Vec<f64>>>>,
    s: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl SampledHamiltonian {
    pub fn new(h: &HamiltonianSpec, grid: &ConfigGrid) -> Result<Self> {
        if grid.dim() != h.dim() {
            return Err(Error::GridMismatch(format!(
                "{}-dimensional Hamiltonian on a {}-dimensional grid",
                h.dim(),
                grid.dim()
            )));
        }
        let (a, da) = match &h.vector_potential {
            None => (None, None),
            Some(ap) => (
                Some(ap.iter().map(|c| c.sample(grid)).collect()),
                Some(ap.iter().map(|c| c.sample_gradient(grid)).collect()),
            ),
        };
        Ok(SampledHamiltonian {
            dim: h.dim(),
            metric: h.metric.clone(),
            u: h.potential.sample(grid),
            du: h.potential.sample_gradient(grid),
            a,
            da,
            s: h.metric_scale.as_ref().map(|s| (s.sample(grid), s.sample_gradient(grid))),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn shifted(&self, i: usize, p: &[f64], q: &mut [f64; 2]) {
        for j in 0..self.dim {
            q[j] = p[j] + self.a.as_ref().map_or(0.0, |a| a[j][i]);
        }
    }

    #[inline]
    fn metric_apply(&self, q: &[f64; 2]) -> [f64; 2] {
        let d = self.dim;
        let mut out = [0.0; 2];
        for i in 0..d {
            for j in 0..d {
                out[i] += self.metric[i * d + j] * q[j];
            }
        }
        out
    }

    pub fn eval(&self, i: usize, p: &[f64]) -> f64 {
        let mut q = [0.0; 2];
        self.shifted(i, p, &mut q);
        let hq = self.metric_apply(&q);
        let s = self.s.as_ref().map_or(1.0, |s| s.0[i]);
        let quad: f64 = (0..self.dim).map(|j| q[j] * hq[j]).sum();
        0.5 * s * quad + self.u[i]
    }

    /// No vector potential and no metric scale.
    #[inline]
    fn is_plain(&self) -> bool {
        self.a.is_none() && self.s.is_none()
    }

    /// Inverse mass and `dU/dx` samples when `H = m p^2 / 2 + U(x)` in one
    /// dimension.
    pub fn plain_1d(&self) -> Option<(f64, &[f64])> {
        (self.dim == 1 && self.is_plain()).then(|| (self.metric[0], self.du[0].as_slice()))
    }

    /// Writes `dH/dp` and `dH/dx` at node `i` and momentum `p`.
    #[inline]
    pub fn gradients(&self, i: usize, p: &[f64], dh_dp: &mut [f64], dh_dx: &mut [f64]) {
        let d = self.dim;
        if d == 1 && self.is_plain() {
            dh_dp[0] = self.metric[0] * p[0];
            dh_dx[0] = self.du[0][i];
            return;
        }
        let mut q = [0.0; 2];
        self.shifted(i, p, &mut q);
        let hq = self.metric_apply(&q);
        let s = self.s.as_ref().map_or(1.0, |s| s.0[i]);
        for j in 0..d {
            dh_dp[j] = s * hq[j];
        }
        let quad: f64 = (0..d).map(|j| q[j] * hq[j]).sum();
        for k in 0..d {
            dh_dx[k] = self.du[k][i];
            if let Some((_, ds)) = &self.s {
                dh_dx[k] += 0.5 * ds[k][i] * quad;
            }
            if let Some(da) = &self.da {
                for j in 0..d {
                    dh_dx[k] += dh_dp[j] * da[j][k][i];
                }
            }
        }
    }

    /// Second derivatives `d2H/dp_j dp_l` and `d2H/dx_k dp_j` at node `i`.
    #[inline]
    pub fn hessian_blocks(&self, i: usize, p: &[f64], hpp: &mut [f64], hxp: &mut [f64]) {
        let d = self.dim;
        if self.is_plain() {
            hpp[..d * d].copy_from_slice(&self.metric);
            hxp[..d * d].iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let mut q = [0.0; 2];
        self.shifted(i, p, &mut q);
        let hq = self.metric_apply(&q);
        let s = self.s.as_ref().map_or(1.0, |s| s.0[i]);
        for j in 0..d {
            for l in 0..d {
                hpp[j * d + l] = s * self.metric[j * d + l];
            }
        }
        // hxp[k * d + j] = d/dx_k (dH/dp_j)
        for k in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                if let Some((_, ds)) = &self.s {
                    v += ds[k][i] * hq[j];
                }
                if let Some(da) = &self.da {
                    for l in 0..d {
                        v += s * self.metric[j * d + l] * da[l][k][i];
                    }
                }
                hxp[k * d + j] = v;
            }
        }
    }
}

/// Samples `H` on every node of a phase grid.
pub fn sample_on_phase_grid(h: &HamiltonianSpec, grid: &PhaseGrid) -> Result<PhaseField> {
    let sampled = SampledHamiltonian::new(h, grid.x())?;
    let p_len = grid.p_len();
    let mut values = vec![0.0; grid.len()];
    for (idx, v) in values.iter_mut().enumerate() {
        let (_, p) = grid.point(idx);
        *v = sampled.eval(idx / p_len, &p);
    }
    PhaseField::new(grid.clone(), values)
}

/// Quadratic charge `Q(x, p) = A^{ij} p_i p_j + B^i(x) p_i + C(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargeSpec {
    quadratic: Vec<f64>,
    linear: Vec<Profile>,
    scalar: Profile,
}

impl ChargeSpec {
    pub fn new(quadratic: Vec<f64>, linear: Vec<Profile>, scalar: Profile) -> Result<Self> {
        let dim = linear.len();
        if quadratic.len() != dim * dim {
            return Err(Error::arg("quadratic", "must be dim x dim"));
        }
        if dim == 2 && (quadratic[1] - quadratic[2]).abs() > 1e-14 {
            return Err(Error::arg("quadratic", "not symmetric"));
        }
        Ok(ChargeSpec {
            quadratic,
            linear,
            scalar,
        })
    }

    /// `L_3 = x p_y - y p_x` in two dimensions.
    pub fn angular_momentum_z() -> Self {
        ChargeSpec {
            quadratic: vec![0.0; 4],
            linear: vec![
                Profile::Linear {
                    gradient: vec![0.0, -1.0],
                    offset: 0.0,
                },
                Profile::Linear {
                    gradient: vec![1.0, 0.0],
                    offset: 0.0,
                },
            ],
            scalar: Profile::Zero,
        }
    }

    /// Momentum component `p_axis`.
    pub fn momentum(dim: usize, axis: usize) -> Self {
        let linear = (0..dim)
            .map(|a| if a == axis { Profile::Constant(1.0) } else { Profile::Zero })
            .collect();
        ChargeSpec {
            quadratic: vec![0.0; dim * dim],
            linear,
            scalar: Profile::Zero,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
        let d = self.dim();
        let mut q = self.scalar.value(x);
        for i in 0..d {
            q += self.linear[i].value(x) * p[i];
            for j in 0..d {
                q += self.quadratic[i * d + j] * p[i] * p[j];
            }
        }
        q
    }

    pub fn sample(&self, grid: &PhaseGrid) -> Result<PhaseField> {
        if grid.dim() != self.dim() {
            return Err(Error::GridMismatch("charge dimension differs from grid".into()));
        }
        let values = (0..grid.len())
            .map(|i| {
                let (x, p) = grid.point(i);
                self.eval(&x, &p)
            })
            .collect();
        PhaseField::new(grid.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_uniform_grid, Boundary, ScalarField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn evaluation_examples() {
        let free = HamiltonianSpec::free(1);
        assert_eq!(eval_hamiltonian(&free, &[0.3], &[2.0]), 2.0);
        let osc = HamiltonianSpec::harmonic(1, 1.0);
        assert_eq!(eval_hamiltonian(&osc, &[1.0], &[0.0]), 0.5);
        let coupled = HamiltonianSpec::new(vec![1.0], Some(vec![Profile::Constant(1.0)]), Profile::Zero).unwrap();
        assert_eq!(eval_hamiltonian(&coupled, &[0.7], &[-1.0]), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let (dp, dx) = hamiltonian_gradients(&HamiltonianSpec::free(1), &[0.0], &[3.0]);
        assert_eq!((dp[0], dx[0]), (3.0, 0.0));
        let (dp, dx) = hamiltonian_gradients(&HamiltonianSpec::harmonic(1, 1.0), &[2.0], &[0.0]);
        assert_eq!((dp[0], dx[0]), (0.0, 2.0));
    }

    #[test]
    fn tabulated_vector_potential_uses_spectral_derivative() {
        let g = make_uniform_grid(1, &[(0.0, 2.0 * PI)], 32, Boundary::Periodic).unwrap();
        let a = Profile::tabulated(ScalarField::from_fn(g.clone(), |x| x[0].sin())).unwrap();
        let h = HamiltonianSpec::new(vec![1.0], Some(vec![a]), Profile::Zero).unwrap();
        let (_, dx) = hamiltonian_gradients(&h, &[0.0], &[1.0]);
        assert!((dx[0] - 1.0).abs() < 1e-10);
        let sampled = SampledHamiltonian::new(&h, &g).unwrap();
        let (mut dp, mut dx) = ([0.0], [0.0]);
        sampled.gradients(0, &[1.0], &mut dp, &mut dx);
        assert!((dx[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(lagrangian_of(&HamiltonianSpec::free(1), &[0.0], &[2.0]), 2.0);
        let u5 = HamiltonianSpec::new(vec![1.0], None, Profile::Constant(5.0)).unwrap();
        assert_eq!(lagrangian_of(&u5, &[0.0], &[0.0]), -5.0);
        let coupled = HamiltonianSpec::new(vec![1.0], Some(vec![Profile::Constant(1.0)]), Profile::Zero).unwrap();
        assert_eq!(lagrangian_of(&coupled, &[0.0], &[1.0]), 0.0);
    }

    #[test]
    fn rejects_indefinite_metric() {
        assert!(HamiltonianSpec::new(vec![1.0, 2.0, 2.0, 1.0], None, Profile::Zero).is_err());
        assert!(HamiltonianSpec::new(vec![1.0, 0.5, 0.4, 1.0], None, Profile::Zero).is_err());
        assert!(HamiltonianSpec::new(vec![-1.0], None, Profile::Zero).is_err());
    }

    fn general_spec() -> HamiltonianSpec {
        HamiltonianSpec::new(
            vec![1.3, 0.2, 0.2, 0.8],
            Some(vec![
                Profile::Sinusoid {
                    amplitude: 0.4,
                    wavevector: vec![1.0, 0.5],
                    phase: 0.2,
                },
                Profile::Linear {
                    gradient: vec![0.3, -0.1],
                    offset: 0.05,
                },
            ]),
            Profile::Radial {
                center: vec![0.1, 0.0],
                coeffs: vec![0.0, 0.5, 0.05],
            },
        )
        .unwrap()
        .with_metric_scale(Profile::Radial {
            center: vec![0.0, 0.0],
            coeffs: vec![1.0, 0.1],
        })
    }

    #[test]
    fn gradients_match_centered_differences_at_random_points() {
        let h = general_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let step = 1e-4;
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (dp, dx) = hamiltonian_gradients(&h, &x, &p);
            for k in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += step;
                xm[k] -= step;
                let fd = (eval_hamiltonian(&h, &xp, &p) - eval_hamiltonian(&h, &xm, &p)) / (2.0 * step);
                assert!((fd - dx[k]).abs() < 1e-6, "x{k}: {fd} vs {}", dx[k]);
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[k] += step;
                pm[k] -= step;
                let fd = (eval_hamiltonian(&h, &x, &pp) - eval_hamiltonian(&h, &x, &pm)) / (2.0 * step);
                assert!((fd - dp[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sampled_hessian_matches_differences_of_gradients() {
        let h = general_spec();
        let g = make_uniform_grid(2, &[(-2.0, 2.0)], 8, Boundary::Periodic).unwrap();
        let sampled = SampledHamiltonian::new(&h, &g).unwrap();
        let i = 19;
        let x = g.point(i);
        let p = [0.4, -0.9];
        let mut hpp = [0.0; 4];
        let mut hxp = [0.0; 4];
        sampled.hessian_blocks(i, &p, &mut hpp, &mut hxp);
        let step = 1e-5;
        for k in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            let (gp, _) = hamiltonian_gradients(&h, &xp, &p);
            let (gm, _) = hamiltonian_gradients(&h, &xm, &p);
            for j in 0..2 {
                assert!(((gp[j] - gm[j]) / (2.0 * step) - hxp[k * 2 + j]).abs() < 1e-7);
            }
        }
    }
}
