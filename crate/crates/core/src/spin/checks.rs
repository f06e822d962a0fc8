use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::calculus::SphereCalculus;
use super::operators::{apply_with, SpinMatrixRep, SpinOperator};
use super::{SpinField, SpinWeight};
use crate::error::{Error, Result};
use crate::grid::SphericalGrid;

/// Largest accepted weight of `S_j |+-|>` outside `span{|+>, |->}`.
pub const PAULI_LEAKAGE_LIMIT: f64 = 1e-6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const NORM_TOLERANCE: f64 = 1e-8;

/// Rayleigh quotients of the Casimir and `S_3` with residual norms
/// `||A f - lambda f||`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eigencheck {
    pub casimir: f64,
    pub z_component: f64,
    pub casimir_residual: f64,
    pub z_residual: f64,
}

fn check_normalized(state: &SpinField) -> Result<()> {
    let n = state.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::arg("state", format!("norm {n} is not 1")));
    }
    Ok(())
}

fn rayleigh(f: &SpinField, af: &SpinField) -> Result<(f64, f64)> {
    let lambda = f.inner(af)?.re;
    let resid: Vec<Complex64> = af.values().iter().zip(f.values()).map(|(a, v)| a - v * lambda).collect();
    Ok((lambda, f.grid().norm(&resid)))
}

/// `<S.S>` (equal to `<L.L>` at weight 0) and `<S_3>` of a normalized state.
pub fn spin_eigencheck(state: &SpinField) -> Result<Eigencheck> {
    check_normalized(state)?;
    let calc = SphereCalculus::new(state.grid(), state.weight())?;
    let (casimir, casimir_residual) = rayleigh(state, &apply_with(&calc, SpinOperator::SSquared, state)?)?;
    let (z_component, z_residual) = rayleigh(state, &apply_with(&calc, SpinOperator::S3, state)?)?;
    Ok(Eigencheck {
        casimir,
        z_component,
        casimir_residual,
        z_residual,
    })
}

/// Spin operators in the `{|+>, |->}` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliReport {
    /// `(2/hbar) <a|S_j|b>`.
    pub sigma: [Matrix2<Complex64>; 3],
    /// `<a|S_pm|b> / hbar`.
    pub sigma_plus: Matrix2<Complex64>,
    pub sigma_minus: Matrix2<Complex64>,
    /// `<+|S_+|->`, the factor in `S_+ |-> = c |+>`.
    pub ladder_constant: Complex64,
    /// Largest norm of an image component outside the basis.
    pub leakage: f64,
    /// Largest entry deviation from the standard Pauli matrices.
    pub max_deviation: f64,
}

fn pauli_matrices() -> [Matrix2<Complex64>; 5] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    [
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -I, I, z),
        Matrix2::new(o, z, z, -o),
        Matrix2::new(z, o, z, z),
        Matrix2::new(z, z, o, z),
    ]
}

fn block(grid: &SphericalGrid, hbar: f64, op: SpinOperator) -> Result<(Matrix2<Complex64>, f64)> {
    let basis = [
        SpinField::half_spin(grid.clone(), true, hbar)?,
        SpinField::half_spin(grid.clone(), false, hbar)?,
    ];
    let calc = SphereCalculus::new(grid, SpinWeight::Half)?;
    let mut m = Matrix2::zeros();
    let mut leakage = 0.0f64;
    for (j, b) in basis.iter().enumerate() {
        let image = apply_with(&calc, op, b)?;
        let mut rest = image.values().to_vec();
        for (i, a) in basis.iter().enumerate() {
            let c = a.inner(&image)?;
            m[(i, j)] = c;
            rest.iter_mut().zip(a.values()).for_each(|(r, v)| *r -= c * v);
        }
        leakage = leakage.max(grid.norm(&rest));
    }
    Ok((m, leakage))
}

/// Represents `S_1, S_2, S_3, S_pm` on `{|+>, |->}`.
pub fn pauli_reconstruct(grid: &SphericalGrid, hbar: f64) -> Result<PauliReport> {
    crate::quantum::check_hbar(hbar)?;
    let ops = [
        SpinOperator::S1,
        SpinOperator::S2,
        SpinOperator::S3,
        SpinOperator::SPlus,
        SpinOperator::SMinus,
    ];
    let mut reps = Vec::with_capacity(ops.len());
    let mut leakage = 0.0f64;
    for op in ops {
        let (m, leak) = block(grid, hbar, op)?;
        leakage = leakage.max(leak);
        reps.push(m);
    }
    if leakage > PAULI_LEAKAGE_LIMIT {
        return Err(Error::Quadrature(format!(
            "spin operators leak {leakage:.3e} out of the half-spin block"
        )));
    }
    let two = Complex64::new(2.0 / hbar, 0.0);
    let one = Complex64::new(1.0 / hbar, 0.0);
    let sigma = [reps[0] * two, reps[1] * two, reps[2] * two];
    let sigma_plus = reps[3] * one;
    let sigma_minus = reps[4] * one;
    let printed = pauli_matrices();
    let mut max_deviation = 0.0f64;
    for (got, want) in sigma.iter().chain([&sigma_plus, &sigma_minus]).zip(&printed) {
        max_deviation = max_deviation.max((got - want).iter().fold(0.0f64, |m, z| m.max(z.norm())));
    }
    Ok(PauliReport {
        sigma,
        sigma_plus,
        sigma_minus,
        ladder_constant: reps[3][(0, 1)],
        leakage,
        max_deviation,
    })
}

/// `count` random normalized fields with Gaussian coefficients on every
/// harmonic of degree at most `degree`.
pub fn random_probes(
    grid: &SphericalGrid,
    weight: SpinWeight,
    degree: usize,
    count: usize,
    seed: u64,
    hbar: f64,
) -> Result<Vec<SpinField>> {
    let mut basis = Vec::new();
    match weight {
        SpinWeight::Zero => {
            for l in 0..=degree {
                for m in -(l as i64)..=l as i64 {
                    basis.push(SpinField::spherical_harmonic(grid.clone(), l, m, hbar)?);
                }
            }
        }
        SpinWeight::Half => {
            for tj in (1..=2 * degree as i64 + 1).step_by(2) {
                for tm in (-tj..=tj).step_by(2) {
                    basis.push(SpinField::half_harmonic(grid.clone(), tj, tm, hbar)?);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
            for b in &basis {
                let c = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                values.iter_mut().zip(b.values()).for_each(|(v, y)| *v += c * y);
            }
            SpinField::new(grid.clone(), weight, values, hbar)?.normalized()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorFamily {
    L,
    S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorRow {
    pub commutator: String,
    /// `max_f ||([A, B] - i hbar C) f|| / ||f||` over the probes.
    pub residual: f64,
}

/// `[A_1, A_2] - i hbar A_3` and cyclic, plus `[A.A, A_3]`, on each probe.
pub fn commutator_table(family: OperatorFamily, probes: &[SpinField]) -> Result<Vec<CommutatorRow>> {
    let first = probes.first().ok_or_else(|| Error::arg("probes", "must not be empty"))?;
    let ops = match family {
        OperatorFamily::L => [SpinOperator::L1, SpinOperator::L2, SpinOperator::L3, SpinOperator::LSquared],
        OperatorFamily::S => [SpinOperator::S1, SpinOperator::S2, SpinOperator::S3, SpinOperator::SSquared],
    };
    if family == OperatorFamily::L && first.weight() == SpinWeight::Half {
        return Err(Error::Unsupported("L commutators on weight-1/2 probes".into()));
    }
    let calc = SphereCalculus::new(first.grid(), first.weight())?;
    let triples = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
    let per_probe = probes
        .par_iter()
        .map(|f| {
            first.check_compatible(f)?;
            let hbar = f.hbar();
            let norm = f.norm();
            let apply = |op, g: &SpinField| apply_with(&calc, op, g);
            let mut out = [0.0; 4];
            for (slot, &(a, b, c)) in triples.iter().enumerate() {
                let ab = apply(ops[a], &apply(ops[b], f)?)?;
                let ba = apply(ops[b], &apply(ops[a], f)?)?;
                let cf = apply(ops[c], f)?;
                let r: Vec<Complex64> = (0..f.values().len())
                    .map(|i| ab.values()[i] - ba.values()[i] - I * hbar * cf.values()[i])
                    .collect();
                out[slot] = f.grid().norm(&r) / norm;
            }
            let c3 = apply(ops[3], &apply(ops[2], f)?)?;
            let c3b = apply(ops[2], &apply(ops[3], f)?)?;
            let r: Vec<Complex64> = c3.values().iter().zip(c3b.values()).map(|(a, b)| a - b).collect();
            out[3] = f.grid().norm(&r) / norm;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let names = [
        format!("[{},{}]", ops[0].name(), ops[1].name()),
        format!("[{},{}]", ops[1].name(), ops[2].name()),
        format!("[{},{}]", ops[2].name(), ops[0].name()),
        format!("[{},{}]", ops[3].name(), ops[2].name()),
    ];
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(k, commutator)| CommutatorRow {
            commutator,
            residual: per_probe.iter().fold(0.0f64, |m, r| m.max(r[k])),
        })
        .collect())
}

/// `<I^{-1} S.S + (S.B + B.S)/2>` for a normalized state; with constant
/// `B` the symmetrized term is `B.<S>`.
pub fn rotor_hamiltonian_expectation(b: [f64; 3], inertia: f64, state: &SpinField) -> Result<f64> {
    if !(inertia > 0.0 && inertia.is_finite()) {
        return Err(Error::arg("inertia", "must be positive"));
    }
    check_normalized(state)?;
    let calc = SphereCalculus::new(state.grid(), state.weight())?;
    let expect = |op| -> Result<f64> { Ok(state.inner(&apply_with(&calc, op, state)?)?.re) };
    let mut e = expect(SpinOperator::SSquared)? / inertia;
    for (bj, op) in b.iter().zip([SpinOperator::S1, SpinOperator::S2, SpinOperator::S3]) {
        if *bj != 0.0 {
            e += bj * expect(op)?;
        }
    }
    Ok(e)
}

/// Rotor Hamiltonian represented on `{|+>, |->}`.
pub fn rotor_block(grid: &SphericalGrid, hbar: f64, b: [f64; 3], inertia: f64) -> Result<Matrix2<Complex64>> {
    if !(inertia > 0.0 && inertia.is_finite()) {
        return Err(Error::arg("inertia", "must be positive"));
    }
    let basis = vec![
        SpinField::half_spin(grid.clone(), true, hbar)?,
        SpinField::half_spin(grid.clone(), false, hbar)?,
    ];
    let to2 = |op| -> Result<Matrix2<Complex64>> {
        let m = SpinMatrixRep::new(op, basis.clone())?.matrix;
        Ok(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
    };
    let mut h = to2(SpinOperator::SSquared)? * Complex64::new(1.0 / inertia, 0.0);
    for (bj, op) in b.iter().zip([SpinOperator::S1, SpinOperator::S2, SpinOperator::S3]) {
        h += to2(op)? * Complex64::new(*bj, 0.0);
    }
    Ok(h)
}

/// `exp(-i h t / hbar) c0` by eigendecomposition of the hermitian part.
pub fn rotor_evolve(h: &Matrix2<Complex64>, hbar: f64, c0: Vector2<Complex64>, t: f64) -> Vector2<Complex64> {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let v = eig.eigenvectors;
    let mut w = v.adjoint() * c0;
    for (z, e) in w.iter_mut().zip(eig.eigenvalues.iter()) {
        *z *= Complex64::from_polar(1.0, -e * t / hbar);
    }
    v * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_spin_eigenvalues() {
        let g = SphericalGrid::new(16).unwrap();
        for hbar in [1.0, 0.3] {
            for (up, sign) in [(true, 1.0), (false, -1.0)] {
                let e = spin_eigencheck(&SpinField::half_spin(g.clone(), up, hbar).unwrap()).unwrap();
                assert!((e.casimir - 0.75 * hbar * hbar).abs() < 1e-10);
                assert!((e.z_component - sign * hbar / 2.0).abs() < 1e-12);
                assert!(e.casimir_residual < 1e-6 && e.z_residual < 1e-6, "{e:?}");
            }
        }
    }

    #[test]
    fn harmonic_eigenvalues() {
        let g = SphericalGrid::new(16).unwrap();
        let e = spin_eigencheck(&SpinField::spherical_harmonic(g.clone(), 2, 1, 1.0).unwrap()).unwrap();
        assert!((e.casimir - 6.0).abs() < 1e-9 && (e.z_component - 1.0).abs() < 1e-12);
        for l in 0..=8usize {
            for m in [-(l as i64), 0, l as i64] {
                let e = spin_eigencheck(&SpinField::spherical_harmonic(g.clone(), l, m, 1.0).unwrap()).unwrap();
                assert!((e.casimir - (l * (l + 1)) as f64).abs() < 1e-7);
                assert!(e.casimir_residual < 1e-7, "{l} {m} {e:?}");
            }
        }
    }

    #[test]
    fn multiplet_states_are_eigenstates() {
        let g = SphericalGrid::new(12).unwrap();
        for l in 0..=4usize {
            for m in -(l as i64) - 1..=l as i64 {
                let f = SpinField::multiplet(g.clone(), l, m, 1.0).unwrap();
                let e = spin_eigencheck(&f).unwrap();
                let j = l as f64 + 0.5;
                assert!((e.casimir - j * (j + 1.0)).abs() < 1e-5, "{l} {m} {e:?}");
                assert!((e.z_component - (m as f64 + 0.5)).abs() < 1e-10);
                assert!(e.casimir_residual < 1e-5);
            }
        }
    }

    #[test]
    fn pauli_block() {
        let g = SphericalGrid::new(6).unwrap();
        let hbar = 0.8;
        let r = pauli_reconstruct(&g, hbar).unwrap();
        assert!(r.max_deviation < 1e-8, "{r:?}");
        assert!(r.leakage < 1e-10);
        assert!((r.ladder_constant - hbar).norm() < 1e-10);
        let anti = r.sigma_plus * r.sigma_minus + r.sigma_minus * r.sigma_plus;
        assert!((anti - Matrix2::identity()).iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn commutators_close_on_probes() {
        let g = SphericalGrid::new(12).unwrap();
        let zero = random_probes(&g, SpinWeight::Zero, 5, 4, 0, 1.0).unwrap();
        let half = random_probes(&g, SpinWeight::Half, 5, 4, 0, 1.0).unwrap();
        for (fam, probes) in [(OperatorFamily::L, &zero), (OperatorFamily::S, &half), (OperatorFamily::S, &zero)] {
            for row in commutator_table(fam, probes).unwrap() {
                assert!(row.residual < 1e-7, "{row:?}");
            }
        }
        assert!(commutator_table(OperatorFamily::L, &half).is_err());
    }

    #[test]
    fn probes_are_deterministic() {
        let g = SphericalGrid::new(6).unwrap();
        let a = random_probes(&g, SpinWeight::Half, 2, 3, 0, 1.0).unwrap();
        let b = random_probes(&g, SpinWeight::Half, 2, 3, 0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rotor_expectations() {
        let g = SphericalGrid::new(6).unwrap();
        let hbar = 1.0;
        let up = SpinField::half_spin(g.clone(), true, hbar).unwrap();
        let down = SpinField::half_spin(g.clone(), false, hbar).unwrap();
        let e = rotor_hamiltonian_expectation([0.0, 0.0, 1.0], 1.0, &up).unwrap();
        assert!((e - 1.25).abs() < 1e-10);
        for s in [&up, &down] {
            assert!((rotor_hamiltonian_expectation([0.0; 3], 2.0, s).unwrap() - 0.375).abs() < 1e-10);
        }
        let e = rotor_hamiltonian_expectation([1.0, 0.0, 0.0], 1.0, &up).unwrap();
        assert!((e - 0.75).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn larmor_precession(b1 in 0.1f64..3.0, t in 0.0f64..10.0, hbar in 0.2f64..2.0) {
            let g = SphericalGrid::new(4).unwrap();
            let h = rotor_block(&g, hbar, [b1, 0.0, 0.0], 1.5).unwrap();
            let c = rotor_evolve(&h, hbar, Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), t);
            let s3 = (c[0].norm_sqr() - c[1].norm_sqr()) * hbar / 2.0;
            prop_assert!((s3 - hbar / 2.0 * (b1 * t).cos()).abs() < 1e-6);
        }
    }
}
