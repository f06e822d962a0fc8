//! Numerical laboratory for classical phase-space transport, Lie-Poisson
//! leaf dynamics and quantum density-matrix evolution.
//!
//! The crate is organized by layer:
//!
//! * [`grid`]: configuration, phase and sphere grids, fields, quadrature and
//!   spectral derivatives.
//! * [`hamiltonian`]: the canonical Hamiltonian class, its gradients, the
//!   Poisson bracket and charge functions.
//! * [`classical`]: grid Liouville solver, symplectic characteristics and
//!   Lie-Poisson transport of foliation leaves.
//! * [`quantum`]: wave functions, density matrices, split-step propagation
//!   and moment/picture checks.
//! * [`spin`]: Euler-angle angular-momentum and spin operators on the sphere.
//! * [`scenario`]: scenario configuration, dispatch and reports.

pub mod error;
pub mod grid;
pub mod classical;
pub mod hamiltonian;
pub mod quantum;
pub mod scenario;
pub mod spin;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
