use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::check_hbar;
use super::kinetic::{effective_metric, KineticSpectrum};
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid};
use crate::hamiltonian::HamiltonianSpec;

/// Largest node count for dense operator matrices.
pub(crate) const DENSE_LIMIT: usize = 1024;

/// Relative hermiticity tolerance for the `hermitian` flag.
const HERMITIAN_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dense operator matrix in the orthonormal grid basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorRep {
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl OperatorRep {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::arg("operator", "matrix must be square"));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("operator matrix"));
        }
        let scale = matrix.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let hermitian = hermitian_residual(&matrix) <= HERMITIAN_TOLERANCE * scale;
        Ok(OperatorRep { matrix, hermitian })
    }

    pub fn identity(n: usize) -> Self {
        OperatorRep {
            matrix: DMatrix::identity(n, n),
            hermitian: true,
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let d = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|v| Complex64::new(*v, 0.0)));
        OperatorRep {
            matrix: DMatrix::from_diagonal(&d),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `max |A - A^dagger|`.
    pub fn hermitian_residual(&self) -> f64 {
        hermitian_residual(&self.matrix)
    }

    pub fn apply(&self, c: &[Complex64]) -> Result<Vec<Complex64>> {
        if c.len() != self.dim() {
            return Err(Error::GridMismatch(format!("{} coefficients for a {}-dim operator", c.len(), self.dim())));
        }
        let v = nalgebra::DVector::from_column_slice(c);
        Ok((&self.matrix * v).as_slice().to_vec())
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.check_dim(other)?;
        OperatorRep::new(&self.matrix * &other.matrix - &other.matrix * &self.matrix)
    }

    /// `[A, B]_+ = AB + BA`.
    pub fn anticommutator(&self, other: &OperatorRep) -> Result<OperatorRep> {
        self.check_dim(other)?;
        OperatorRep::new(&self.matrix * &other.matrix + &other.matrix * &self.matrix)
    }

    fn check_dim(&self, other: &OperatorRep) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::arg("operator", "dimension mismatch"));
        }
        Ok(())
    }
}

pub(crate) fn hermitian_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut r = 0.0f64;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// `(M + M^dagger) / 2`.
pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).scale(0.5)
}

fn check_dense(grid: &ConfigGrid) -> Result<()> {
    if grid.len() > DENSE_LIMIT {
        return Err(Error::Unsupported(format!(
            "dense operators on {} nodes (limit {DENSE_LIMIT})",
            grid.len()
        )));
    }
    Ok(())
}

/// Periodic spectral differentiation matrix (Nyquist mode dropped) along
/// `axis`, built from its closed form so it is exactly antisymmetric.
fn derivative_matrix(grid: &ConfigGrid, axis: usize) -> DMatrix<f64> {
    let shape = grid.shape();
    let n = shape[axis];
    let period = grid.period(axis);
    let total = grid.len();
    let stride: usize = shape[axis + 1..].iter().product();
    let mut lane = vec![0.0; n];
    for (k, v) in lane.iter_mut().enumerate().skip(1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let t = PI * k as f64 / n as f64;
        let kernel = if n % 2 == 0 { t.cos() / t.sin() } else { 1.0 / t.sin() };
        *v = sign * kernel * PI / period;
    }
    let mut d = DMatrix::zeros(total, total);
    for i in 0..total {
        let ji = (i / stride) % n;
        let base = i - ji * stride;
        for jj in 0..n {
            if jj > ji {
                let v = lane[jj - ji];
                // D_{ij} depends on i - j only; f'(x_i) ~ sum_j D_ij f_j
                d[(i, base + jj * stride)] = -v;
                d[(base + jj * stride, i)] = v;
            }
        }
    }
    d
}

/// `p_axis = -i hbar d/dx_axis` on a periodic grid.
pub fn momentum_operator(grid: &ConfigGrid, hbar: f64, axis: usize) -> Result<OperatorRep> {
    check_hbar(hbar)?;
    check_dense(grid)?;
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::Unsupported("momentum operator on box grids".into()));
    }
    let d = derivative_matrix(grid, axis);
    Ok(OperatorRep {
        matrix: d.map(|v| Complex64::new(0.0, -hbar * v)),
        hermitian: true,
    })
}

/// Multiplication by `x_axis`.
pub fn position_operator(grid: &ConfigGrid, axis: usize) -> Result<OperatorRep> {
    check_dense(grid)?;
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    let x: Vec<f64> = (0..grid.len()).map(|i| grid.point(i)[axis]).collect();
    Ok(OperatorRep::from_diagonal(&x))
}

/// One term `[f, p_axis^order]_+` of an observable polynomial, with `f`
/// sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableTerm {
    pub order: u32,
    pub axis: usize,
    pub weight: Vec<Complex64>,
}

impl ObservableTerm {
    pub fn real(order: u32, axis: usize, weight: &[f64]) -> Self {
        ObservableTerm {
            order,
            axis,
            weight: weight.iter().map(|v| Complex64::new(*v, 0.0)).collect(),
        }
    }
}

/// `sum_n [f_n, p^n]_+`, with the order-0 term taken as `f_0` itself.
/// Orders above four and complex weights are rejected.
pub fn build_observable(grid: &ConfigGrid, hbar: f64, terms: &[ObservableTerm]) -> Result<OperatorRep> {
    check_hbar(hbar)?;
    check_dense(grid)?;
    let n = grid.len();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for t in terms {
        if t.order > 4 {
            return Err(Error::arg("order", format!("{} exceeds 4", t.order)));
        }
        if t.weight.len() != n {
            return Err(Error::GridMismatch("weight samples differ from node count".into()));
        }
        let scale = t.weight.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        if t.weight.iter().any(|z| z.im.abs() > 1e-12 * scale) {
            return Err(Error::arg("weight", "must be real-valued"));
        }
        let f: Vec<f64> = t.weight.iter().map(|z| z.re).collect();
        if t.order == 0 {
            for i in 0..n {
                acc[(i, i)] += f[i];
            }
            continue;
        }
        let p = momentum_operator(grid, hbar, t.axis)?;
        let mut pn = p.matrix.clone();
        for _ in 1..t.order {
            pn = &pn * &p.matrix;
        }
        pn = hermitian_part(&pn);
        // f p^n + p^n f = M + M^dagger with M = diag(f) p^n
        let mut m = pn;
        for i in 0..n {
            m.row_mut(i).scale_mut(f[i]);
        }
        acc += &m + m.adjoint();
    }
    OperatorRep::new(acc)
}

/// The Hamiltonian operator `1/2 (p + A) h (p + A) + U` as a dense matrix.
///
/// A constant `A` uses the exact Fourier-diagonal kinetic term (the same
/// multiplier as the split-step propagator); a non-constant `A` uses the
/// symmetric product of spectral momentum matrices.
pub fn hamiltonian_operator(h: &HamiltonianSpec, grid: &ConfigGrid, hbar: f64) -> Result<OperatorRep> {
    check_hbar(hbar)?;
    check_dense(grid)?;
    if h.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!("{}-D Hamiltonian on a {}-D grid", h.dim(), grid.dim())));
    }
    let n = grid.len();
    let u = h.potential().sample(grid);
    let mut m = if h.constant_vector_potential().is_some() {
        let kin = KineticSpectrum::new(h, grid, hbar)?;
        let mult: Vec<Complex64> = kin.energies().iter().map(|e| Complex64::new(*e, 0.0)).collect();
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            col.iter_mut().for_each(|z| *z = ZERO);
            col[j] = Complex64::new(1.0, 0.0);
            kin.apply(&mut col, &mult);
            k.column_mut(j).copy_from_slice(&col);
        }
        hermitian_part(&k)
    } else {
        if grid.boundary() != Boundary::Periodic {
            return Err(Error::Unsupported("vector potential on a box grid".into()));
        }
        let metric = effective_metric(h)?;
        let d = grid.dim();
        let a = h.vector_potential().expect("non-constant A is present");
        let shifted: Vec<DMatrix<Complex64>> = (0..d)
            .map(|ax| {
                let mut p = momentum_operator(grid, hbar, ax)?.matrix;
                let av = a[ax].sample(grid);
                for i in 0..n {
                    p[(i, i)] += av[i];
                }
                Ok(p)
            })
            .collect::<Result<_>>()?;
        let mut k = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                let w = metric[i * d + j];
                if w != 0.0 {
                    k += (&shifted[i] * &shifted[j]).scale(0.5 * w);
                }
            }
        }
        hermitian_part(&k)
    };
    for i in 0..n {
        m[(i, i)] += u[i];
    }
    Ok(OperatorRep { matrix: m, hermitian: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_uniform_grid;
    use crate::hamiltonian::Profile;
    use rand::{Rng, SeedableRng};

    fn line(n: usize) -> ConfigGrid {
        make_uniform_grid(1, &[(0.0, 2.0 * PI)], n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn position_operator_eigenvalues_are_nodes() {
        let g = line(16);
        let x: Vec<f64> = g.coords(0);
        let op = build_observable(&g, 1.0, &[ObservableTerm::real(0, 0, &x)]).unwrap();
        assert!(op.is_hermitian());
        for i in 0..16 {
            assert!((op.matrix()[(i, i)].re - x[i]).abs() < 1e-15);
        }
        assert_eq!(op, position_operator(&g, 0).unwrap());
    }

    #[test]
    fn plane_waves_are_momentum_eigenvectors() {
        let g = line(32);
        let hbar = 0.7;
        let p = build_observable(&g, hbar, &[ObservableTerm::real(1, 0, &[0.5; 32])]).unwrap();
        for k in [-5i32, 1, 3, 15] {
            let c: Vec<Complex64> = g.coords(0).iter().map(|x| Complex64::from_polar(1.0, k as f64 * x)).collect();
            let pc = p.apply(&c).unwrap();
            for (a, b) in pc.iter().zip(&c) {
                assert!((a - b * (hbar * k as f64)).norm() < 1e-11, "k = {k}");
            }
        }
    }

    #[test]
    fn canonical_commutator_on_random_states() {
        let g = line(64);
        let hbar = 1.3;
        let x = g.coords(0);
        let f: Vec<f64> = x.iter().map(|x| x.sin() + 0.5 * (2.0 * x).cos()).collect();
        let df: Vec<f64> = x.iter().map(|x| x.cos() - (2.0 * x).sin()).collect();
        let p = momentum_operator(&g, hbar, 0).unwrap();
        let comm = p.commutator(&OperatorRep::from_diagonal(&f)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        // band-limited random state
        let modes: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let psi: Vec<Complex64> = x
            .iter()
            .map(|x| {
                modes
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| Complex64::new(*a, *b) * Complex64::from_polar(1.0, (k as f64 - 4.0) * x))
                    .sum()
            })
            .collect();
        let lhs = comm.apply(&psi).unwrap();
        for i in 0..64 {
            let rhs = Complex64::new(0.0, -hbar) * df[i] * psi[i];
            assert!((lhs[i] - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_matrix_matches_symmetric_form() {
        let g = line(32);
        let h = HamiltonianSpec::new(vec![1.0], Some(vec![Profile::Constant(0.4)]), Profile::quadratic(vec![3.0], 1.0)).unwrap();
        let fourier = hamiltonian_operator(&h, &g, 1.0).unwrap();
        let p = momentum_operator(&g, 1.0, 0).unwrap();
        let u = h.potential().sample(&g);
        let x: Vec<f64> = g.coords(0);
        // smooth test vector
        let c: Vec<Complex64> = x.iter().map(|x| Complex64::new((x - 3.0).cos(), (2.0 * x).sin())).collect();
        let hc = fourier.apply(&c).unwrap();
        let pc = p.apply(&c).unwrap();
        let ppc = p.apply(&pc).unwrap();
        for i in 0..32 {
            let expect = 0.5 * ppc[i] + pc[i] * 0.4 + c[i] * (0.5 * 0.16 + u[i]);
            assert!((hc[i] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_complex_weights_and_high_orders() {
        let g = line(16);
        let mut t = ObservableTerm::real(1, 0, &[1.0; 16]);
        t.weight[3].im = 0.1;
        assert!(build_observable(&g, 1.0, &[t]).is_err());
        assert!(build_observable(&g, 1.0, &[ObservableTerm::real(5, 0, &[1.0; 16])]).is_err());
    }
}
