use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre colatitudes (poles excluded) times uniform azimuths.
///
/// With `l_max + 2` colatitudes and `2 l_max + 3` azimuths the product rule
/// integrates every product of two fields band-limited to `l_max + 1/2`
/// exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalGrid {
    l_max: usize,
    theta: Vec<f64>,
    weights: Vec<f64>,
    phi: Vec<f64>,
}

impl SphericalGrid {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidGrid("l_max must be at least 1".into()));
        }
        let n_theta = l_max + 2;
        let n_phi = 2 * l_max + 3;
        let (x, w) = gauss_legendre(n_theta);
        // ascending theta means descending cos(theta)
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let weights: Vec<f64> = w.iter().rev().copied().collect();
        let phi = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        Ok(SphericalGrid {
            l_max,
            theta,
            weights,
            phi,
        })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Quadrature weights in `cos(theta)`.
    pub fn theta_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Node `(theta, phi)` of flat index `i = i_theta * n_phi + i_phi`.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let np = self.phi.len();
        (self.theta[i / np], self.phi[i % np])
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| {
                let (t, p) = self.node(i);
                f(t, p)
            })
            .collect()
    }

    /// Quadrature of `values` over the unit sphere.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        let np = self.phi.len();
        let dphi = 2.0 * PI / np as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (it, w) in self.weights.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for v in &values[it * np..(it + 1) * np] {
                row += v;
            }
            acc += row * (w * dphi);
        }
        acc
    }

    /// `<f|g>` under the quadrature inner product.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        let prod: Vec<Complex64> = f.iter().zip(g).map(|(a, b)| a.conj() * b).collect();
        self.integrate(&prod)
    }

    pub fn norm(&self, f: &[Complex64]) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }
}
