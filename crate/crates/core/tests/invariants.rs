use std::f64::consts::PI;

use phaselab::classical::{integrate_trajectory, LiouvilleOptions, LiouvilleSolver, PhaseSpaceDensity};
use phaselab::grid::{
    integrate, make_uniform_grid, momentum_of_synchronicity, spectral_derivative, Boundary, ConfigGrid, PhaseGrid,
    ScalarField, SphericalGrid, SynchronicityField,
};
use phaselab::hamiltonian::HamiltonianSpec;
use phaselab::quantum::{
    momentum_operator, picture_gap, position_operator, DensityMatrix, OperatorRep, SchrodingerStepper, WaveFunction,
};
use phaselab::spin::{apply_angular_operator, random_probes, SpinMatrixRep, SpinOperator, SpinWeight};
use phaselab::Complex64;
use proptest::prelude::*;

fn periodic(points: usize, lo: f64, len: f64) -> ConfigGrid {
    make_uniform_grid(1, &[(lo, lo + len)], points, Boundary::Periodic).unwrap()
}

/// `sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)` for `t = (x - lo) / len`.
fn fourier(coeffs: &[(f64, f64)], lo: f64, len: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let t = 2.0 * PI * (x - lo) / len;
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
            .sum()
    }
}

fn fourier_derivative(coeffs: &[(f64, f64)], lo: f64, len: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let w = 2.0 * PI / len;
        let t = w * (x - lo);
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| k as f64 * w * (b * (k as f64 * t).cos() - a * (k as f64 * t).sin()))
            .sum()
    }
}

fn coeffs(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_integrates_to_zero(c in coeffs(6), points in 16usize..80, lo in -5.0..5.0f64, len in 1.0..20.0f64) {
        let g = periodic(points, lo, len);
        let f = fourier(&c, lo, len);
        let field = ScalarField::from_fn(g, |x| f(x[0]));
        let d = spectral_derivative(&field, 0).unwrap();
        prop_assert!(integrate(&d).abs() <= 1e-12);
    }

    #[test]
    fn synchronicity_momentum_is_linear_and_shift_invariant(
        c1 in coeffs(5),
        c2 in coeffs(5),
        (w1, w2) in (-3i32..=3, -3i32..=3),
        (a, b) in (-2i32..=2, -2i32..=2),
        shift in -10.0..10.0f64,
        hbar in 0.1..2.0f64,
    ) {
        let (lo, len, n) = (-3.0, 6.0, 128);
        let g = periodic(n, lo, len);
        let xs = g.coords(0);
        // windings are multiples of pi so that exp(2 i phase) is periodic
        let phase = |c: &[(f64, f64)], w: i32| -> Vec<f64> {
            let f = fourier(c, lo, len);
            xs.iter().map(|&x| f(x) + w as f64 * PI * (x - lo) / len).collect()
        };
        let p = |values: Vec<f64>| {
            let eta = SynchronicityField::new(g.clone(), values, hbar).unwrap();
            momentum_of_synchronicity(&eta).unwrap().component(0).to_vec()
        };
        let (f1, f2) = (phase(&c1, w1), phase(&c2, w2));
        let combined: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| a as f64 * x + b as f64 * y).collect();
        let (p1, p2) = (p(f1.clone()), p(f2));
        let linear: Vec<f64> = p1.iter().zip(&p2).map(|(x, y)| a as f64 * x + b as f64 * y).collect();
        prop_assert!(max_abs(&p(combined), &linear) <= 1e-10);
        let shifted = p(f1.iter().map(|v| v + shift).collect());
        prop_assert!(max_abs(&shifted, &p1) <= 1e-12);
    }

    #[test]
    fn grid_construction_is_bit_reproducible(dim in 1usize..=2, points in 8usize..40, lo in -10.0..0.0f64, len in 0.5..20.0f64) {
        let extents = vec![(lo, lo + len); dim];
        let a = make_uniform_grid(dim, &extents, points, Boundary::Periodic).unwrap();
        let b = make_uniform_grid(dim, &extents, points, Boundary::Periodic).unwrap();
        let bits = |g: &ConfigGrid| g.points().concat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn characteristic_flow_conserves_commuting_charge(
        quartic in 0.0..0.2f64,
        x in prop::array::uniform2(-3.0..3.0f64),
        p in prop::array::uniform2(-2.0..2.0f64),
    ) {
        let h = HamiltonianSpec::central(2, vec![0.0, 0.5, quartic]);
        let t_end = 5.0;
        let tr = integrate_trajectory(&h, &x, &p, t_end, 1e-3, 50).unwrap();
        let l3 = |x: &[f64], p: &[f64]| x[0] * p[1] - x[1] * p[0];
        let l0 = l3(&x, &p);
        let drift = tr.samples().iter().map(|s| (l3(&s.x, &s.p) - l0).abs()).fold(0.0, f64::max);
        prop_assert!(drift / t_end < 1e-8);
    }
}

fn phase_grid(n: usize) -> PhaseGrid {
    let x = make_uniform_grid(1, &[(-7.0, 7.0)], n, Boundary::Periodic).unwrap();
    PhaseGrid::symmetric(x, 7.0, n).unwrap()
}

fn gaussian(x: f64, p: f64, c: (f64, f64), w: (f64, f64)) -> f64 {
    (-0.5 * (((x - c.0) / w.0).powi(2) + ((p - c.1) / w.1).powi(2))).exp() / (2.0 * PI * w.0 * w.1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn liouville_step_conserves_mass(cx in -1.5..1.5f64, cp in -1.5..1.5f64, wx in 0.7..1.3f64, wp in 0.7..1.3f64, omega in 0.0..1.5f64) {
        let g = phase_grid(64);
        let rho = PhaseSpaceDensity::gaussian(g.clone(), &[cx], &[cp], &[wx, wp]).unwrap();
        let h = HamiltonianSpec::harmonic(1, omega);
        let solver = LiouvilleSolver::new(&h, &g, LiouvilleOptions::default()).unwrap();
        let next = solver.step(&rho, solver.dt_max()).unwrap();
        prop_assert!((next.mass() - rho.mass()).abs() <= 1e-10);
    }

    #[test]
    fn density_is_constant_along_harmonic_characteristics(cx in -1.0..1.0f64, cp in -1.0..1.0f64, wx in 0.9..1.2f64, wp in 0.9..1.2f64) {
        let g = phase_grid(128);
        let h = HamiltonianSpec::harmonic(1, 1.0);
        let (c, w) = ((cx, cp), (wx, wp));
        let rho0 = PhaseSpaceDensity::from_fn(g.clone(), |x, p| gaussian(x[0], p[0], c, w)).unwrap();
        let t = 1.0;
        let rho = LiouvilleSolver::new(&h, &g, LiouvilleOptions::default()).unwrap().advance(&rho0, t).unwrap();
        let mut err = 0.0f64;
        for idx in (0..g.len()).step_by(97) {
            let (x, p) = g.point(idx);
            // H is even in p, so the backward flow is the forward flow of (x, -p) reflected
            let tr = integrate_trajectory(&h, &x, &[-p[0]], t, 1e-3, usize::MAX).unwrap();
            let z0 = tr.last();
            err = err.max((rho.values()[idx] - gaussian(z0.x[0], -z0.p[0], c, w)).abs());
        }
        prop_assert!(err <= 1e-6, "pointwise deviation {err:e}");
    }
}

fn apply(op: &OperatorRep, psi: &[Complex64]) -> Vec<Complex64> {
    op.apply(psi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evolution_is_unitary_and_pictures_agree(
        center in -2.0..2.0f64,
        momentum in -1.5..1.5f64,
        sigma in 0.7..1.4f64,
        omega in 0.5..1.5f64,
    ) {
        let hbar = 1.0;
        let g = periodic(64, -10.0, 20.0);
        let h = HamiltonianSpec::harmonic(1, omega);
        let psi0 = WaveFunction::gaussian_packet(g.clone(), hbar, &[center], &[momentum], sigma).unwrap();
        let steps = 1000;
        let stepper = SchrodingerStepper::new(&h, &g, hbar, 1e-3).unwrap();
        let psi = stepper.advance(&psi0, steps).unwrap();
        prop_assert!((psi.norm_squared() - 1.0).abs() < 1e-10);
        let mut rho = DensityMatrix::pure(&psi0).unwrap();
        for _ in 0..steps {
            rho = stepper.conjugate(&rho).unwrap();
        }
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.hermitian_residual() < 1e-10);
        let projector = DensityMatrix::pure(&psi).unwrap();
        prop_assert!(rho.max_entry_distance(&projector).unwrap() <= 1e-8);
        let x = position_operator(&g, 0).unwrap();
        let (heis, schr) = picture_gap(&h, &x, &psi0, steps as f64 * 1e-3).unwrap();
        prop_assert!((heis - schr).abs() <= 1e-9);
    }

    #[test]
    fn momentum_commutator_is_a_derivative(fc in coeffs(3), pc in coeffs(3), qc in coeffs(3), hbar in 0.2..2.0f64) {
        let (lo, len) = (0.0, 2.0 * PI);
        let g = periodic(32, lo, len);
        let xs = g.coords(0);
        let (f, df) = (fourier(&fc, lo, len), fourier_derivative(&fc, lo, len));
        let (re, im) = (fourier(&pc, lo, len), fourier(&qc, lo, len));
        let psi: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(re(x), im(x))).collect();
        let fv: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let fop = OperatorRep::from_diagonal(&fv);
        let p = momentum_operator(&g, hbar, 0).unwrap();
        let lhs: Vec<Complex64> = apply(&p, &apply(&fop, &psi))
            .iter()
            .zip(apply(&fop, &apply(&p, &psi)))
            .map(|(a, b)| a - b)
            .collect();
        let scale = psi.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let err = xs
            .iter()
            .zip(&lhs)
            .zip(&psi)
            .map(|((&x, l), s)| (l - Complex64::new(0.0, -hbar * df(x)) * s).norm())
            .fold(0.0, f64::max);
        prop_assert!(err / scale <= 1e-10, "{err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn angular_operators_are_hermitian_on_band_limited_fields(seed in any::<u64>()) {
        let l_max = 12;
        let grid = SphericalGrid::new(l_max).unwrap();
        let whole = random_probes(&grid, SpinWeight::Zero, l_max / 2, 6, seed, 1.0).unwrap();
        for op in [SpinOperator::L1, SpinOperator::L2, SpinOperator::L3] {
            prop_assert!(SpinMatrixRep::new(op, whole.clone()).unwrap().hermitian_residual() <= 1e-8);
        }
        let half = random_probes(&grid, SpinWeight::Half, l_max / 2 - 1, 6, seed, 1.0).unwrap();
        for op in [SpinOperator::S1, SpinOperator::S2, SpinOperator::S3] {
            prop_assert!(SpinMatrixRep::new(op, half.clone()).unwrap().hermitian_residual() <= 1e-8);
        }
    }

    #[test]
    fn ladder_operators_are_s1_plus_minus_i_s2(seed in any::<u64>()) {
        let grid = SphericalGrid::new(12).unwrap();
        let i = Complex64::new(0.0, 1.0);
        for f in random_probes(&grid, SpinWeight::Half, 4, 3, seed, 1.0).unwrap() {
            let s1 = apply_angular_operator(SpinOperator::S1, &f).unwrap();
            let s2 = apply_angular_operator(SpinOperator::S2, &f).unwrap();
            for (op, sign) in [(SpinOperator::SPlus, 1.0), (SpinOperator::SMinus, -1.0)] {
                let lad = apply_angular_operator(op, &f).unwrap();
                let diff: Vec<Complex64> = lad
                    .values()
                    .iter()
                    .zip(s1.values().iter().zip(s2.values()))
                    .map(|(l, (a, b))| l - (a + sign * i * b))
                    .collect();
                prop_assert!(grid.norm(&diff) <= 1e-10);
            }
        }
    }
}
