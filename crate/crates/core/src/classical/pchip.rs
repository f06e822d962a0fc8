use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Fritsch-Carlson monotone cubic Hermite.
    MonotoneCubic,
    Linear,
}

/// Interpolates `(xs, ys)` at the sorted query points `queries`, writing
/// into `out`. Queries outside `[xs[0], xs[n-1]]` receive `None`.
///
/// `xs` must be strictly increasing.
pub fn pchip_interpolate(
    xs: &[f64],
    ys: &[f64],
    queries: &[f64],
    method: Interpolation,
    out: &mut [Option<f64>],
) -> Result<()> {
    let n = xs.len();
    if n != ys.len() || queries.len() != out.len() {
        return Err(Error::arg("pchip", "length mismatch"));
    }
    if n < 2 {
        return Err(Error::arg("pchip", "need at least two nodes"));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::arg("pchip", "nodes must be strictly increasing"));
    }
    let slopes = match method {
        Interpolation::MonotoneCubic => monotone_slopes(xs, ys),
        Interpolation::Linear => Vec::new(),
    };
    let mut seg = 0;
    for (q, o) in queries.iter().zip(out.iter_mut()) {
        if *q < xs[0] || *q > xs[n - 1] {
            *o = None;
            continue;
        }
        while seg + 2 < n && *q > xs[seg + 1] {
            seg += 1;
        }
        while seg > 0 && *q < xs[seg] {
            seg -= 1;
        }
        let h = xs[seg + 1] - xs[seg];
        let t = (q - xs[seg]) / h;
        *o = Some(match method {
            Interpolation::Linear => ys[seg] + t * (ys[seg + 1] - ys[seg]),
            Interpolation::MonotoneCubic => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * ys[seg] + h10 * h * slopes[seg] + h01 * ys[seg + 1] + h11 * h * slopes[seg + 1]
            }
        });
    }
    Ok(())
}

fn monotone_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = delta[0];
        m[1] = delta[0];
        return m;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            // weighted harmonic mean
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let xs = [0.0, 0.5, 1.7, 2.0, 3.1];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let q = [0.0, 0.25, 1.7, 2.9, 3.1, 3.2, -0.1];
        let mut out = [None; 7];
        pchip_interpolate(&xs, &ys, &q, Interpolation::MonotoneCubic, &mut out).unwrap();
        for (x, v) in q.iter().zip(&out).take(5) {
            assert!((v.unwrap() - (2.0 * x - 1.0)).abs() < 1e-14);
        }
        assert_eq!(out[5], None);
        assert_eq!(out[6], None);
    }

    #[test]
    fn preserves_monotonicity() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.0, 0.0, 1.0, 1.0, 1.0];
        let q: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let mut out = vec![None; q.len()];
        pchip_interpolate(&xs, &ys, &q, Interpolation::MonotoneCubic, &mut out).unwrap();
        let v: Vec<f64> = out.into_iter().map(Option::unwrap).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(v.iter().all(|&y| (0.0..=1.0).contains(&y)));
    }

    #[test]
    fn rejects_unsorted_nodes() {
        let mut out = [None];
        assert!(pchip_interpolate(&[0.0, 0.0], &[1.0, 2.0], &[0.0], Interpolation::Linear, &mut out).is_err());
    }
}
