//! FFT plumbing: cached plans, wavenumber tables, periodic spectral
//! derivatives, finite-difference and finite-volume stencils, and strided
//! lane iteration over row-major arrays.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, PlanPair>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> PlanPair {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        if let Some(pair) = cache.get(&n) {
            return pair.clone();
        }
        let pair = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
        cache.insert(n, pair.clone());
        pair
    })
}

/// Unnormalized forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub fn fft(buf: &mut [Complex64]) {
    let (fwd, _) = plans(buf.len());
    fwd.process(buf);
}

/// Inverse DFT including the `1/n` factor.
pub fn ifft(buf: &mut [Complex64]) {
    let n = buf.len();
    let (_, inv) = plans(n);
    inv.process(buf);
    let scale = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Signed integer mode index of FFT bin `j` for an `n`-point transform.
#[inline]
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Angular wavenumbers `2 pi m / period` in FFT bin order.
pub fn wavenumbers(n: usize, period: f64) -> Vec<f64> {
    (0..n)
        .map(|j| 2.0 * PI * mode_index(j, n) as f64 / period)
        .collect()
}

/// True for the unpaired Nyquist bin of an even-length transform.
#[inline]
pub fn is_nyquist(j: usize, n: usize) -> bool {
    n % 2 == 0 && j == n / 2
}

/// In-place spectral derivative of a periodic sample lane.
///
/// Odd-order derivatives drop the Nyquist bin so that real input stays real
/// and the differentiation matrix stays antisymmetric.
pub fn differentiate_periodic(buf: &mut [Complex64], period: f64, order: u32) {
    let n = buf.len();
    if order == 0 {
        return;
    }
    let ks = wavenumbers(n, period);
    fft(buf);
    for (j, z) in buf.iter_mut().enumerate() {
        if order % 2 == 1 && is_nyquist(j, n) {
            *z = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, ks[j]);
        *z *= ik.powu(order);
    }
    ifft(buf);
}

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

/// Calls `f` on every 1-D lane of a row-major array along `axis`, writing the
/// (possibly modified) lane back. Lanes are visited in ascending base order.
pub fn for_each_lane<T: Copy, F>(values: &mut [T], shape: &[usize], axis: usize, mut f: F)
where
    F: FnMut(&mut Vec<T>),
{
    let st = strides(shape);
    let len = shape[axis];
    let stride = st[axis];
    let total: usize = shape.iter().product();
    let mut lane: Vec<T> = Vec::with_capacity(len);
    for base in 0..total {
        // base enumerates every flat index whose coordinate along `axis` is 0
        if (base / stride) % len != 0 {
            continue;
        }
        lane.clear();
        lane.extend((0..len).map(|i| values[base + i * stride]));
        f(&mut lane);
        for (i, v) in lane.iter().enumerate() {
            values[base + i * stride] = *v;
        }
    }
}

/// Spectral derivative along `axis` of a periodic real array.
///
/// The derivative maps real lanes to real lanes, so lanes are transformed
/// in pairs packed as `a + i b`.
pub fn derivative_real(values: &[f64], shape: &[usize], axis: usize, period: f64) -> Vec<f64> {
    let n = shape[axis];
    let stride = strides(shape)[axis];
    let total = values.len();
    let (fwd, inv) = plans(n);
    let ks = wavenumbers(n, period);
    let scale = 1.0 / n as f64;
    let mult: Vec<Complex64> = (0..n)
        .map(|j| if is_nyquist(j, n) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, ks[j] * scale) })
        .collect();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![0.0; total];
    let bases: Vec<usize> = (0..total / (n * stride))
        .flat_map(|outer| (0..stride).map(move |inner| outer * n * stride + inner))
        .collect();
    for pair in bases.chunks(2) {
        let (a, b) = (pair[0], pair.get(1).copied());
        for (i, z) in buf.iter_mut().enumerate() {
            let im = b.map_or(0.0, |b| values[b + i * stride]);
            *z = Complex64::new(values[a + i * stride], im);
        }
        fwd.process_with_scratch(&mut buf, &mut scratch);
        buf.iter_mut().zip(&mult).for_each(|(z, m)| *z *= m);
        inv.process_with_scratch(&mut buf, &mut scratch);
        for (i, z) in buf.iter().enumerate() {
            out[a + i * stride] = z.re;
            if let Some(b) = b {
                out[b + i * stride] = z.im;
            }
        }
    }
    out
}

/// Spectral derivative along `axis` of a periodic complex array.
pub fn derivative_complex(
    values: &[Complex64],
    shape: &[usize],
    axis: usize,
    period: f64,
    order: u32,
) -> Vec<Complex64> {
    let mut out = values.to_vec();
    for_each_lane(&mut out, shape, axis, |lane| {
        differentiate_periodic(lane, period, order);
    });
    out
}

/// Fourth-order finite-difference derivative of a non-periodic lane with
/// one-sided closures at both ends; exact on polynomials up to degree four.
pub fn fd4_lane(lane: &[f64], h: f64) -> Vec<f64> {
    let n = lane.len();
    assert!(n >= 5, "fourth-order stencil needs at least five points");
    let f = lane;
    let mut d = vec![0.0; n];
    let c = 1.0 / (12.0 * h);
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * c;
    d[n - 1] =
        (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * c;
    d
}

/// [`fd4_lane`] applied along `axis` of a row-major array.
pub fn derivative_fd4(values: &[f64], shape: &[usize], axis: usize, h: f64) -> Vec<f64> {
    if shape.len() == 1 {
        return fd4_lane(values, h);
    }
    let mut out = values.to_vec();
    for_each_lane(&mut out, shape, axis, |lane| {
        let d = fd4_lane(lane, h);
        lane.copy_from_slice(&d);
    });
    out
}

/// `d(v rho)/dx` along `axis` in conservative finite-difference form:
/// local Lax-Friedrichs splitting of the nodal flux `v rho`, each part
/// reconstructed at cell faces with the fifth-order upwind stencil.
///
/// Periodic lanes wrap; otherwise `rho` vanishes outside the lane and the
/// end faces carry no flux, so `sum(out) = 0` to rounding either way.
pub fn flux_divergence_upwind5(rho: &[f64], v: &[f64], shape: &[usize], axis: usize, h: f64, periodic: bool) -> Vec<f64> {
    const G: usize = 3;
    let st = strides(shape);
    let n = shape[axis];
    let s = st[axis];
    let mut out = vec![0.0; rho.len()];
    // lanes padded by G ghost nodes per side: wrapped, or zero outside
    let mut r = vec![0.0; n + 2 * G];
    let mut u = vec![0.0; n + 2 * G];
    let mut ur = vec![0.0; n + 2 * G];
    let mut flux = vec![0.0; n + 1];
    for base in 0..rho.len() {
        if (base / s) % n != 0 {
            continue;
        }
        for j in 0..n {
            r[G + j] = rho[base + j * s];
            u[G + j] = v[base + j * s];
        }
        if periodic {
            for g in 0..G {
                r[g] = r[n + g];
                u[g] = u[n + g];
                r[G + n + g] = r[G + g];
                u[G + n + g] = u[G + g];
            }
        }
        for k in 0..n + 2 * G {
            ur[k] = u[k] * r[k];
        }
        // face f sits between nodes f - 1 and f, padded index f + G
        for f in 0..=n {
            if !periodic && (f == 0 || f == n) {
                flux[f] = 0.0;
                continue;
            }
            let c = f + G;
            let uw: &[f64; 6] = u[c - 3..c + 3].try_into().unwrap();
            let rw: &[f64; 6] = r[c - 3..c + 3].try_into().unwrap();
            let fw: &[f64; 6] = ur[c - 3..c + 3].try_into().unwrap();
            let alpha = uw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            // window index k holds padded node c - 3 + k
            let up = |a: &[f64; 6]| 2.0 * a[0] - 13.0 * a[1] + 47.0 * a[2] + 27.0 * a[3] - 3.0 * a[4];
            let down = |a: &[f64; 6]| 2.0 * a[5] - 13.0 * a[4] + 47.0 * a[3] + 27.0 * a[2] - 3.0 * a[1];
            let fp = up(fw) + alpha * up(rw);
            let fm = down(fw) - alpha * down(rw);
            flux[f] = (fp + fm) / 120.0;
        }
        if periodic {
            flux[n] = flux[0];
        }
        for j in 0..n {
            out[base + j * s] = (flux[j + 1] - flux[j]) / h;
        }
    }
    out
}

/// Evaluates the trigonometric interpolant of periodic samples at `x`,
/// with samples taken at `x0 + j * period / n`.
pub fn trig_interpolate(coeffs: &[Complex64], x0: f64, period: f64, x: f64) -> Complex64 {
    // coeffs are the normalized DFT coefficients (fft / n)
    let n = coeffs.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let t = 2.0 * PI * (x - x0) / period;
    for (j, c) in coeffs.iter().enumerate() {
        if is_nyquist(j, n) {
            // split the Nyquist term symmetrically so real data interpolates to real values
            acc += c * (t * (n / 2) as f64).cos();
            continue;
        }
        let m = mode_index(j, n) as f64;
        acc += c * Complex64::from_polar(1.0, m * t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd4_is_exact_on_quartics() {
        let h = 0.1;
        let xs: Vec<f64> = (0..12).map(|i| -0.5 + i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.powi(4) - 2.0 * x * x + x).collect();
        let d = fd4_lane(&f, h);
        for (x, v) in xs.iter().zip(d) {
            let exact = 4.0 * x.powi(3) - 4.0 * x + 1.0;
            assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
        }
    }

    #[test]
    fn upwind_flux_conserves_and_converges() {
        let err = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let rho: Vec<f64> = xs.iter().map(|x| 1.0 + 0.5 * x.sin()).collect();
            let v: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
            let d = flux_divergence_upwind5(&rho, &v, &[n], 0, h, true);
            assert!(d.iter().sum::<f64>().abs() < 1e-12);
            xs.iter()
                .zip(&d)
                .map(|(x, dv)| {
                    // d/dx[(1 + sin/2) cos] = -sin + cos(2x)/2
                    (dv - (-x.sin() + 0.5 * (2.0 * x).cos())).abs()
                })
                .fold(0.0, f64::max)
        };
        let order = (err(32) / err(64)).log2();
        assert!(order > 4.5, "{order}");
        let rho = [0.0, 1.0, 2.0, 1.0, 0.0, 0.0];
        let v = [1.0, -1.0, 1.0, 1.0, -1.0, 0.5];
        let d = flux_divergence_upwind5(&rho, &v, &[6], 0, 0.1, false);
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn lanes_cover_every_element_once() {
        let shape = [3, 4, 5];
        for axis in 0..3 {
            let mut vals = vec![0u32; 60];
            for_each_lane(&mut vals, &shape, axis, |lane| {
                for v in lane.iter_mut() {
                    *v += 1;
                }
            });
            assert!(vals.iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn trig_interpolation_reproduces_band_limited() {
        let n = 16;
        let period = 2.0 * PI;
        let mut c: Vec<Complex64> = (0..n)
            .map(|j| {
                let x = j as f64 * period / n as f64;
                Complex64::new((3.0 * x).sin() + 0.5 * (x).cos(), 0.0)
            })
            .collect();
        fft(&mut c);
        for z in c.iter_mut() {
            *z /= n as f64;
        }
        let x = 0.3719;
        let v = trig_interpolate(&c, 0.0, period, x);
        assert!((v.re - ((3.0 * x).sin() + 0.5 * x.cos())).abs() < 1e-13);
        assert!(v.im.abs() < 1e-13);
    }
}
