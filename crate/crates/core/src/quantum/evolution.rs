use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::kinetic::KineticSpectrum;
use super::operators::{hamiltonian_operator, hermitian_part, OperatorRep};
use super::{check_hbar, DensityMatrix, WaveFunction};
use crate::error::{Error, Result};
use crate::grid::ConfigGrid;
use crate::hamiltonian::HamiltonianSpec;

/// Residual above which a density matrix is rejected as non-hermitian.
const INPUT_HERMITIAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
enum Scheme {
    /// Strang splitting: half potential, full kinetic, half potential.
    Split {
        kinetic: KineticSpectrum,
        kinetic_phase: Vec<Complex64>,
        potential_half: Vec<Complex64>,
    },
    /// Cayley form `(1 + i dt H / 2 hbar)^{-1} (1 - i dt H / 2 hbar)`.
    CrankNicolson { propagator: DMatrix<Complex64> },
}

/// One-step propagator for fixed `(H, grid, hbar, dt)`, reusable across
/// steps and across the columns of a density matrix.
#[derive(Clone, Debug)]
pub struct SchrodingerStepper {
    grid: ConfigGrid,
    hbar: f64,
    dt: f64,
    scheme: Scheme,
}

impl SchrodingerStepper {
    /// Split-step when `A` is constant, Crank-Nicolson on the dense
    /// Hamiltonian otherwise. A position-dependent metric is rejected.
    pub fn new(h: &HamiltonianSpec, grid: &ConfigGrid, hbar: f64, dt: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::arg("dt", "must be finite and non-negative"));
        }
        let scheme = if h.constant_vector_potential().is_some() {
            let kinetic = KineticSpectrum::new(h, grid, hbar)?;
            let kinetic_phase = kinetic
                .energies()
                .iter()
                .map(|e| Complex64::from_polar(1.0, -e * dt / hbar))
                .collect();
            let potential_half = h
                .potential()
                .sample(grid)
                .iter()
                .map(|u| Complex64::from_polar(1.0, -0.5 * u * dt / hbar))
                .collect();
            Scheme::Split {
                kinetic,
                kinetic_phase,
                potential_half,
            }
        } else {
            let hm = hamiltonian_operator(h, grid, hbar)?.into_matrix();
            let n = hm.nrows();
            let half = Complex64::new(0.0, 0.5 * dt / hbar);
            let id = DMatrix::<Complex64>::identity(n, n);
            let a = &id + &hm * half;
            let b = &id - &hm * half;
            let propagator = a
                .lu()
                .solve(&b)
                .ok_or_else(|| Error::arg("dt", "Crank-Nicolson system is singular"))?;
            Scheme::CrankNicolson { propagator }
        };
        Ok(SchrodingerStepper {
            grid: grid.clone(),
            hbar,
            dt,
            scheme,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    /// Advances grid samples (or basis coefficients) in place.
    pub fn apply(&self, v: &mut [Complex64]) {
        if self.dt == 0.0 {
            return;
        }
        match &self.scheme {
            Scheme::Split {
                kinetic,
                kinetic_phase,
                potential_half,
            } => {
                for (z, f) in v.iter_mut().zip(potential_half) {
                    *z *= f;
                }
                kinetic.apply(v, kinetic_phase);
                for (z, f) in v.iter_mut().zip(potential_half) {
                    *z *= f;
                }
            }
            Scheme::CrankNicolson { propagator } => {
                let out = propagator * DVector::from_column_slice(v);
                v.copy_from_slice(out.as_slice());
            }
        }
    }

    pub fn step(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check_state(psi.grid(), psi.hbar())?;
        let mut v = psi.values().to_vec();
        self.apply(&mut v);
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("Schrodinger step"));
        }
        WaveFunction::unchecked(psi.grid().clone(), v, psi.hbar())
    }

    /// `steps` consecutive steps.
    pub fn advance(&self, psi: &WaveFunction, steps: usize) -> Result<WaveFunction> {
        self.check_state(psi.grid(), psi.hbar())?;
        let mut v = psi.values().to_vec();
        for _ in 0..steps {
            self.apply(&mut v);
        }
        WaveFunction::unchecked(psi.grid().clone(), v, psi.hbar())
    }

    /// `rho -> U rho U^dagger`, parallel over columns.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_state(rho.grid(), rho.hbar())?;
        let residual = rho.hermitian_residual();
        if residual > INPUT_HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        let n = rho.dim();
        let mut m = rho.matrix().clone();
        m.as_mut_slice().par_chunks_mut(n).for_each(|col| self.apply(col));
        // U (U rho)^dagger = U rho U^dagger for hermitian rho
        let mut m = m.adjoint();
        m.as_mut_slice().par_chunks_mut(n).for_each(|col| self.apply(col));
        DensityMatrix::from_parts(rho.grid().clone(), hermitian_part(&m), rho.hbar())
    }

    fn check_state(&self, grid: &ConfigGrid, hbar: f64) -> Result<()> {
        self.grid.ensure_same(grid)?;
        if hbar != self.hbar {
            return Err(Error::arg("hbar", "state and propagator disagree"));
        }
        Ok(())
    }
}

/// One Strang split step (Crank-Nicolson for non-constant `A`).
pub fn step_schrodinger(h: &HamiltonianSpec, psi: &WaveFunction, dt: f64) -> Result<WaveFunction> {
    SchrodingerStepper::new(h, psi.grid(), psi.hbar(), dt)?.step(psi)
}

/// One step of `d rho/dt = [rho, H] / (-i hbar)` by conjugation with the
/// split-step propagator.
pub fn step_quantum_liouville(h: &HamiltonianSpec, rho: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    SchrodingerStepper::new(h, rho.grid(), rho.hbar(), dt)?.conjugate(rho)
}

/// `exp(-i H t / hbar)` from the eigendecomposition of the dense Hamiltonian.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    hamiltonian: OperatorRep,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
    hbar: f64,
}

impl ExactPropagator {
    pub fn new(h: &HamiltonianSpec, grid: &ConfigGrid, hbar: f64) -> Result<Self> {
        let hamiltonian = hamiltonian_operator(h, grid, hbar)?;
        let eig = SymmetricEigen::new(hamiltonian.matrix().clone());
        Ok(ExactPropagator {
            hamiltonian,
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            hbar,
        })
    }

    pub fn hamiltonian(&self) -> &OperatorRep {
        &self.hamiltonian
    }

    /// Unsorted eigenvalues of the Hamiltonian.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let mut vp = self.vectors.clone();
        for (j, e) in self.energies.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, -e * t / self.hbar);
            vp.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
        vp * self.vectors.adjoint()
    }

    /// Evolves basis coefficients by `t`.
    pub fn evolve(&self, c: &[Complex64], t: f64) -> Vec<Complex64> {
        let v = DVector::from_column_slice(c);
        let mut w = self.vectors.adjoint() * v;
        for (z, e) in w.iter_mut().zip(&self.energies) {
            *z *= Complex64::from_polar(1.0, -e * t / self.hbar);
        }
        (&self.vectors * w).as_slice().to_vec()
    }

    /// `U rho U^dagger`.
    pub fn evolve_density(&self, rho: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        let u = self.unitary(t);
        hermitian_part(&(&u * rho * u.adjoint()))
    }
}
