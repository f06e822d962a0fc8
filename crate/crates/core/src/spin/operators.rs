use nalgebra::DMatrix;
use num_complex::Complex64;

use super::calculus::SphereCalculus;
use super::{SpinField, SpinWeight};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinOperator {
    L1,
    L2,
    L3,
    S1,
    S2,
    S3,
    SPlus,
    SMinus,
    LSquared,
    SSquared,
}

impl SpinOperator {
    pub fn name(self) -> &'static str {
        match self {
            SpinOperator::L1 => "L1",
            SpinOperator::L2 => "L2",
            SpinOperator::L3 => "L3",
            SpinOperator::S1 => "S1",
            SpinOperator::S2 => "S2",
            SpinOperator::S3 => "S3",
            SpinOperator::SPlus => "S+",
            SpinOperator::SMinus => "S-",
            SpinOperator::LSquared => "L^2",
            SpinOperator::SSquared => "S^2",
        }
    }

    pub fn is_hermitian(self) -> bool {
        !matches!(self, SpinOperator::SPlus | SpinOperator::SMinus)
    }
}

/// Applies the differential expression of `op` at the grid nodes.
///
/// `L_j = (hbar/i) Lhat_j` with
/// `Lhat_1 = -sin(phi) d_theta - cot(theta) cos(phi) d_phi`,
/// `Lhat_2 = cos(phi) d_theta - cot(theta) sin(phi) d_phi`,
/// `Lhat_3 = d_phi`;
/// `S_1 = L_1 + hbar s cos(phi)/sin(theta)`,
/// `S_2 = L_2 + hbar s sin(phi)/sin(theta)`, `S_3 = L_3`;
/// `S_pm = hbar e^{pm i phi} (pm d_theta + i cot(theta) d_phi + s/sin(theta))`.
///
/// `L_1` and `L_2` leave the weight-1/2 representation, so `L^2` is
/// rejected on weight-1/2 fields.
pub fn apply_angular_operator(op: SpinOperator, f: &SpinField) -> Result<SpinField> {
    let calc = SphereCalculus::new(f.grid(), f.weight())?;
    apply_with(&calc, op, f)
}

pub(crate) fn apply_with(calc: &SphereCalculus, op: SpinOperator, f: &SpinField) -> Result<SpinField> {
    use SpinOperator::*;
    let hbar = f.hbar();
    let s = f.weight().value();
    let grid = f.grid();
    let v = f.values();
    let values = match op {
        L3 | S3 => calc.d_phi(v).into_iter().map(|z| z * (-I * hbar)).collect(),
        L1 | L2 | S1 | S2 | SPlus | SMinus => {
            let dt = calc.d_theta(v);
            let dp = calc.d_phi(v);
            (0..v.len())
                .map(|i| {
                    let (t, p) = grid.node(i);
                    let (st, ct) = t.sin_cos();
                    let (sp, cp) = p.sin_cos();
                    let cot = ct / st;
                    match op {
                        L1 | S1 => {
                            let l = (-sp * dt[i] - cot * cp * dp[i]) * (-I * hbar);
                            if op == S1 {
                                l + v[i] * (hbar * s * cp / st)
                            } else {
                                l
                            }
                        }
                        L2 | S2 => {
                            let l = (cp * dt[i] - cot * sp * dp[i]) * (-I * hbar);
                            if op == S2 {
                                l + v[i] * (hbar * s * sp / st)
                            } else {
                                l
                            }
                        }
                        _ => {
                            let sign = if op == SPlus { 1.0 } else { -1.0 };
                            Complex64::from_polar(hbar, sign * p) * (sign * dt[i] + I * cot * dp[i] + v[i] * (s / st))
                        }
                    }
                })
                .collect()
        }
        LSquared | SSquared => {
            if op == LSquared && f.weight() == SpinWeight::Half {
                return Err(Error::Unsupported("L^2 on weight-1/2 fields".into()));
            }
            let (a, b, c) = if op == LSquared { (L1, L2, L3) } else { (S1, S2, S3) };
            let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
            for k in [a, b, c] {
                let once = apply_with(calc, k, f)?;
                let twice = apply_with(calc, k, &once)?;
                acc.iter_mut().zip(twice.values()).for_each(|(x, y)| *x += y);
            }
            acc
        }
    };
    Ok(f.with_values(values))
}

/// Matrix `<basis_i | op | basis_j>` under the quadrature inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinMatrixRep {
    pub basis: Vec<SpinField>,
    pub matrix: DMatrix<Complex64>,
}

impl SpinMatrixRep {
    pub fn new(op: SpinOperator, basis: Vec<SpinField>) -> Result<Self> {
        let first = basis.first().ok_or_else(|| Error::arg("basis", "must not be empty"))?;
        let calc = SphereCalculus::new(first.grid(), first.weight())?;
        let n = basis.len();
        let images = basis
            .iter()
            .map(|b| {
                first.check_compatible(b)?;
                apply_with(&calc, op, b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                matrix[(i, j)] = basis[i].inner(&images[j])?;
            }
        }
        Ok(SpinMatrixRep { basis, matrix })
    }

    pub fn hermitian_residual(&self) -> f64 {
        crate::quantum::hermitian_residual(&self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphericalGrid;

    fn close(a: &SpinField, b: &SpinField, tol: f64) {
        let d = a.distance(b).unwrap();
        assert!(d < tol, "{d}");
    }

    fn scaled(f: &SpinField, c: Complex64) -> SpinField {
        f.with_values(f.values().iter().map(|z| z * c).collect())
    }

    #[test]
    fn l3_on_y11_and_s3_on_up() {
        let g = SphericalGrid::new(6).unwrap();
        let hbar = 0.7;
        let y = SpinField::spherical_harmonic(g.clone(), 1, 1, hbar).unwrap();
        close(&apply_angular_operator(SpinOperator::L3, &y).unwrap(), &scaled(&y, hbar.into()), 1e-8);
        let up = SpinField::half_spin(g.clone(), true, hbar).unwrap();
        let down = SpinField::half_spin(g, false, hbar).unwrap();
        close(&apply_angular_operator(SpinOperator::S3, &up).unwrap(), &scaled(&up, (hbar / 2.0).into()), 1e-8);
        let zero = scaled(&up, 0.0.into());
        close(&apply_angular_operator(SpinOperator::SPlus, &up).unwrap(), &zero, 1e-8);
        close(&apply_angular_operator(SpinOperator::SMinus, &down).unwrap(), &zero, 1e-8);
        // ladder constant hbar
        close(&apply_angular_operator(SpinOperator::SPlus, &down).unwrap(), &scaled(&up, hbar.into()), 1e-8);
    }

    #[test]
    fn ladder_equals_s1_plus_i_s2() {
        let g = SphericalGrid::new(8).unwrap();
        let f = SpinField::multiplet(g.clone(), 2, -1, 1.3).unwrap();
        let s1 = apply_angular_operator(SpinOperator::S1, &f).unwrap();
        let s2 = apply_angular_operator(SpinOperator::S2, &f).unwrap();
        for (op, sign) in [(SpinOperator::SPlus, 1.0), (SpinOperator::SMinus, -1.0)] {
            let want: Vec<Complex64> = s1.values().iter().zip(s2.values()).map(|(a, b)| a + I * sign * b).collect();
            let got = apply_angular_operator(op, &f).unwrap();
            let d = got.distance(&f.with_values(want)).unwrap();
            assert!(d < 1e-10, "{d}");
        }
    }

    #[test]
    fn reduction_adds_the_weight_correction() {
        let g = SphericalGrid::new(8).unwrap();
        let f = SpinField::half_harmonic(g.clone(), 3, -1, 1.0).unwrap();
        for (s_op, l_op, trig) in [
            (SpinOperator::S1, SpinOperator::L1, f64::cos as fn(f64) -> f64),
            (SpinOperator::S2, SpinOperator::L2, f64::sin),
        ] {
            let s = apply_angular_operator(s_op, &f).unwrap();
            let l = apply_angular_operator(l_op, &f).unwrap();
            for i in 0..g.len() {
                let (t, p) = g.node(i);
                let corr = f.values()[i] * (0.5 * trig(p) / t.sin());
                assert!((s.values()[i] - l.values()[i] - corr).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn l_squared_rejected_on_half_weight() {
        let g = SphericalGrid::new(4).unwrap();
        let up = SpinField::half_spin(g, true, 1.0).unwrap();
        assert!(matches!(
            apply_angular_operator(SpinOperator::LSquared, &up),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn representations_are_hermitian() {
        let g = SphericalGrid::new(12).unwrap();
        let mut basis = Vec::new();
        for l in 0..=5usize {
            for m in -(l as i64)..=l as i64 {
                basis.push(SpinField::spherical_harmonic(g.clone(), l, m, 1.0).unwrap());
            }
        }
        for op in [SpinOperator::L1, SpinOperator::L2, SpinOperator::L3, SpinOperator::LSquared] {
            let rep = SpinMatrixRep::new(op, basis.clone()).unwrap();
            assert!(rep.hermitian_residual() < 1e-8, "{op:?}");
        }
        let mut half = Vec::new();
        for tj in (1..=9).step_by(2) {
            for tm in (-tj..=tj).step_by(2) {
                half.push(SpinField::half_harmonic(g.clone(), tj, tm, 1.0).unwrap());
            }
        }
        for op in [SpinOperator::S1, SpinOperator::S2, SpinOperator::S3, SpinOperator::SSquared] {
            let rep = SpinMatrixRep::new(op, half.clone()).unwrap();
            assert!(rep.hermitian_residual() < 1e-8, "{op:?}");
        }
    }
}
