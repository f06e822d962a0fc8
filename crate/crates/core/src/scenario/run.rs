use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::config::{HamiltonianPreset, InitialPreset, Layer, ScenarioConfig};
use super::report::{Check, RunReport, Table};
use crate::classical::{
    verify_classical_equivalence, EquivalenceOptions, LiouvilleOptions, LiouvilleSolver, PhaseSpaceDensity,
};
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid, PhaseGrid, SphericalGrid};
use crate::hamiltonian::{poisson_bracket, sample_on_phase_grid, ChargeSpec, DerivativeScheme, HamiltonianSpec};
use crate::quantum::{
    angular_momentum_expectation, box_eigenstates, box_wall_density, hamiltonian_operator, madelung_fields,
    picture_gap, position_operator, read_state, verify_moment_equations, DensityMatrix, QuantumSeriesRow,
    SchrodingerStepper, WaveFunction, MAX_BASIS,
};
use crate::spin::{
    commutator_table, pauli_reconstruct, random_probes, rotor_block, spin_eigencheck, Eigencheck, OperatorFamily,
    SpinField,
};
use crate::spin::SpinWeight;

/// Collects checks; a failing group becomes one failed check.
struct Collector {
    checks: Vec<Check>,
    tables: Vec<Table>,
}

impl Collector {
    fn group(&mut self, name: &str, tolerance: f64, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(Check::failed(name, tolerance, &e));
        }
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }
}

/// Checks that do not depend on time evolution.
const STATIC_CHECKS: &[&str] = &["charge_bracket_l3", "momentum_field", "box_wall_density", "box_energy"];

/// Runs every check of the configured layer.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunReport {
    let start = Instant::now();
    let mut c = Collector {
        checks: Vec::new(),
        tables: Vec::new(),
    };
    match cfg.layer {
        Layer::Classical | Layer::Equivalence => classical(cfg, &mut c),
        Layer::Quantum => quantum(cfg, &mut c),
        Layer::Spin => spin(cfg, &mut c),
    }
    let degenerate = cfg.is_degenerate();
    if degenerate {
        for check in c.checks.iter_mut() {
            if check.note.is_empty() && !STATIC_CHECKS.contains(&check.name.as_str()) {
                check.note = "degenerate".into();
            }
        }
    }
    RunReport {
        scenario: cfg.name.clone(),
        config_hash: cfg.hash(),
        degenerate,
        checks: c.checks,
        tables: c.tables,
        wall_time: start.elapsed(),
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: format!("{t:?}: {e}"),
            })
        })
        .collect()
}

fn classical(cfg: &ScenarioConfig, c: &mut Collector) {
    let tol = &cfg.tolerances;
    let equivalence = cfg.layer == Layer::Equivalence;
    c.group("classical_equivalence", tol.l1, |c| {
        let grids = cfg.phase_grids()?;
        let finest = grids.last().expect("levels >= 1");
        let h = cfg.hamiltonian_spec(finest.x())?;
        let ini = &cfg.initial;
        let tabulated = match (ini.preset, &ini.path) {
            (InitialPreset::Tabulated, Some(p)) => Some(read_samples(p)?),
            (InitialPreset::Gaussian, _) => None,
            (p, _) => return Err(Error::Unsupported(format!("classical initial preset {p:?}"))),
        };
        let initial = |g: &PhaseGrid| -> Result<PhaseSpaceDensity> {
            match &tabulated {
                Some(v) => PhaseSpaceDensity::new(g.clone(), v.clone())?.normalized(),
                None => PhaseSpaceDensity::gaussian(g.clone(), &ini.center, &ini.momentum, &ini.widths),
            }
        };
        let dt = cfg.dt();
        let mut options = EquivalenceOptions {
            samples: cfg.integrator.samples,
            leaves: equivalence,
            ..EquivalenceOptions::default()
        };
        if dt > 0.0 {
            let bound = LiouvilleSolver::new(&h, finest, options.liouville)?.dt_max();
            options.liouville = LiouvilleOptions {
                cfl: options.liouville.cfl * (dt / bound).min(1.0),
                ..options.liouville
            };
        }
        let t_final = if cfg.is_degenerate() { 0.0 } else { cfg.integrator.t_final };
        let report = verify_classical_equivalence(&h, &initial, t_final, &grids, &options)?;
        let fine = report.finest();
        c.push(Check::new("l1_liouville_characteristics", fine.l1_liouville_characteristics, tol.l1));
        if equivalence {
            let why = match (fine.caustic_time, grids[0].dim()) {
                (Some(t), _) => format!("leaf transport stopped at a caustic, t = {t}"),
                (None, 1) => String::new(),
                (None, _) => "leaf transport needs one dimension".into(),
            };
            for (name, v) in [
                ("l1_liouville_leaves", fine.l1_liouville_leaves),
                ("l1_characteristics_leaves", fine.l1_characteristics_leaves),
            ] {
                let check = Check::new(name, v.unwrap_or(f64::NAN), tol.l1);
                c.push(match v {
                    Some(_) if fine.relabels > 0 => check.note(format!("{} relabels", fine.relabels)),
                    Some(_) => check,
                    None => check.note(why.clone()),
                });
            }
        }
        let m0 = fine.series[0].mass;
        let drift = fine.series.iter().fold(0.0f64, |m, r| m.max((r.mass - m0).abs() / m0));
        c.push(Check::new("mass_drift", drift, tol.mass));
        if let Some(r) = tol.return_l1 {
            c.push(Check::new("l1_return", fine.l1_liouville_initial, r));
        }
        if let (Some(want), Some(got)) = (tol.min_order, report.min_order()) {
            let orders: Vec<String> = report.orders.iter().map(|o| format!("{o:.3}")).collect();
            c.push(Check::new("order_shortfall", want - got, 0.0).note(format!("observed orders {}", orders.join(" "))));
        }
        c.tables.push(Table::from_rows("series.csv", &fine.series)?);
        Ok(())
    });
    if cfg.grid.dim == 2 && matches!(cfg.hamiltonian.preset, HamiltonianPreset::Central | HamiltonianPreset::Harmonic)
    {
        c.group("charge_bracket_l3", tol.charge, |c| {
            let grid = &cfg.phase_grids()?[0];
            c.push(Check::new("charge_bracket_l3", charge_bracket_residual(&cfg.hamiltonian_spec(grid.x())?, grid)?, tol.charge));
            Ok(())
        });
    }
}

/// `max |{H, L_3}| / max(|H| |L_3|)` with fourth-order differences.
pub fn charge_bracket_residual(h: &HamiltonianSpec, grid: &PhaseGrid) -> Result<f64> {
    let hf = sample_on_phase_grid(h, grid)?;
    let l3 = ChargeSpec::angular_momentum_z().sample(grid)?;
    let b = poisson_bracket(&hf, &l3, DerivativeScheme::FiniteDifference)?;
    Ok(b.max_abs() / (hf.max_abs() * l3.max_abs()))
}

fn initial_wave(cfg: &ScenarioConfig, grid: &ConfigGrid) -> Result<WaveFunction> {
    let ini = &cfg.initial;
    let hbar = cfg.hbar;
    match ini.preset {
        InitialPreset::Gaussian => WaveFunction::gaussian_packet(grid.clone(), hbar, &ini.center, &ini.momentum, ini.sigma),
        InitialPreset::Coherent => {
            WaveFunction::coherent_state(grid.clone(), hbar, cfg.hamiltonian.omega, &ini.center, &ini.momentum)
        }
        InitialPreset::PlaneWave => WaveFunction::plane_wave(grid.clone(), hbar, &ini.wavenumber),
        InitialPreset::BoxEigenstate => Ok(box_eigenstates(grid, hbar, ini.n)?.pop().expect("n >= 1")),
        InitialPreset::Tabulated => {
            let psi = read_state(ini.path.as_deref().expect("validated"))?;
            grid.ensure_same(psi.grid())?;
            if psi.hbar() != hbar {
                return Err(Error::Validation {
                    key: "hbar".into(),
                    reason: format!("state file carries hbar = {}", psi.hbar()),
                });
            }
            Ok(psi)
        }
    }
}

/// Expected Madelung momentum of the initial presets, when known.
fn expected_momentum(cfg: &ScenarioConfig) -> Option<Vec<f64>> {
    let ini = &cfg.initial;
    match ini.preset {
        InitialPreset::Gaussian | InitialPreset::Coherent => Some(ini.momentum.clone()),
        InitialPreset::PlaneWave => Some(ini.wavenumber.iter().map(|k| cfg.hbar * k).collect()),
        // higher eigenstates change sign, so their phase jumps at the nodes
        InitialPreset::BoxEigenstate if ini.n == 1 => Some(vec![0.0; cfg.grid.dim]),
        InitialPreset::BoxEigenstate => None,
        InitialPreset::Tabulated => None,
    }
}

fn projector(psi: &WaveFunction) -> Result<DMatrix<Complex64>> {
    Ok(DensityMatrix::pure(psi)?.matrix().clone())
}

fn max_entry(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

fn quantum(cfg: &ScenarioConfig, c: &mut Collector) {
    let tol = &cfg.tolerances;
    let hbar = cfg.hbar;
    let setup = || -> Result<(ConfigGrid, HamiltonianSpec, WaveFunction)> {
        let grid = cfg.config_grid(cfg.grid.points)?;
        let h = cfg.hamiltonian_spec(&grid)?;
        let psi = initial_wave(cfg, &grid)?;
        Ok((grid, h, psi))
    };
    let (grid, h, psi0) = match setup() {
        Ok(s) => s,
        Err(e) => {
            c.push(Check::failed("quantum_setup", 0.0, &e));
            return;
        }
    };
    let dense = grid.len() <= MAX_BASIS;
    // momentum operators need a periodic grid
    let periodic = grid.boundary() == Boundary::Periodic;
    let t_final = cfg.integrator.t_final;
    let steps = if cfg.is_degenerate() {
        0
    } else {
        (t_final / cfg.dt()).round() as usize
    };
    let per_thousand = 1000.0 / steps.max(1000) as f64;

    c.group("evolution", tol.norm, |c| {
        let stepper = SchrodingerStepper::new(&h, &grid, hbar, cfg.dt())?;
        let x = if dense { Some(position_operator(&grid, 0)?) } else { None };
        let samples = cfg.integrator.samples.min(steps.max(1));
        let mut psi = psi0.clone();
        let mut rho = if dense { Some(DensityMatrix::pure(&psi0)?) } else { None };
        let mut rows = Vec::with_capacity(samples + 1);
        let mut done = 0;
        for s in 0..=samples {
            let target = s * steps / samples;
            psi = stepper.advance(&psi, target - done)?;
            if let Some(r) = rho.as_mut() {
                for _ in done..target {
                    *r = stepper.conjugate(r)?;
                }
            }
            done = target;
            let t = if steps == 0 { 0.0 } else { t_final * target as f64 / steps as f64 };
            let (trace, herm, gap, moment) = match (&rho, &x) {
                (Some(r), Some(x)) => {
                    let (heis, schr) = picture_gap(&h, x, &psi0, t)?;
                    let moment = if periodic {
                        verify_moment_equations(&h, r, cfg.integrator.moment_dt)?.max_residual()
                    } else {
                        f64::NAN
                    };
                    (r.trace().re, r.hermitian_residual(), (heis - schr).abs(), moment)
                }
                _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            rows.push(QuantumSeriesRow {
                t,
                norm: psi.norm_squared(),
                trace,
                herm_residual: herm,
                picture_gap: gap,
                moment_residual: moment,
            });
        }
        let last = rows.last().expect("at least one row");
        c.push(Check::new("norm_drift", (last.norm - 1.0).abs() * per_thousand, tol.norm));
        if let Some(r) = &rho {
            c.push(Check::new("trace_drift", (last.trace - 1.0).abs() * per_thousand, tol.trace));
            let err = max_entry(r.matrix(), &projector(&psi)?);
            c.push(Check::new("density_matrix_vs_projector", err, tol.density_matrix));
            c.push(Check::new("density_matrix_hermiticity", last.herm_residual, tol.density_matrix));
            let gap = rows.iter().fold(0.0f64, |m, r| m.max(r.picture_gap));
            c.push(Check::new("picture_gap", gap, tol.picture));
        }
        if cfg.grid.dim == 2 && periodic {
            let l0 = angular_momentum_expectation(&psi0)?;
            let l1 = angular_momentum_expectation(&psi)?;
            let rate = if steps == 0 { 0.0 } else { (l1 - l0).abs() / t_final };
            c.push(Check::new("l3_drift_rate", rate, tol.energy).note(format!("<L3> = {l0}")));
        }
        c.tables.push(Table::from_rows("series.csv", &rows)?);
        Ok(())
    });

    if dense && periodic {
        c.group("moment_ratio", tol.moment_ratio, |c| {
            let rho = DensityMatrix::pure(&psi0)?;
            let dt = cfg.integrator.moment_dt;
            let coarse = verify_moment_equations(&h, &rho, dt)?.max_residual();
            let fine = verify_moment_equations(&h, &rho, dt / 2.0)?.max_residual();
            let check = if coarse < 1e-11 {
                Check::new("moment_ratio", 0.0, tol.moment_ratio).note(format!("residual {coarse:e} at rounding level"))
            } else {
                let ratio = coarse / fine;
                Check::new("moment_ratio", (ratio - 4.0).abs(), tol.moment_ratio).note(format!("ratio {ratio}"))
            };
            c.push(check);
            Ok(())
        });
    }

    if let Some(p) = expected_momentum(cfg) {
        c.group("momentum_field", tol.momentum, |c| {
            let m = madelung_fields(&psi0)?;
            let rho = m.density.values();
            let peak = rho.iter().fold(0.0f64, |a, b| a.max(*b));
            let mut err = 0.0f64;
            for i in 0..rho.len() {
                if m.mask[i] {
                    let at = m.momentum.at(i);
                    let d = at.iter().zip(&p).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
                    err = err.max(d * rho[i] / peak);
                }
            }
            c.push(Check::new("momentum_field", err, tol.momentum).note(format!("{} nodes masked", m.masked_nodes())));
            Ok(())
        });
    }

    if cfg.hamiltonian.preset == HamiltonianPreset::Box {
        c.group("box_spectrum", tol.energy, |c| {
            let hm = hamiltonian_operator(&h, &grid, hbar)?;
            let len = grid.axis(0).length();
            let (mut walls, mut energy) = (0.0f64, 0.0f64);
            for (k, psi) in box_eigenstates(&grid, hbar, 4)?.iter().enumerate() {
                let n = (k + 1) as f64;
                let want = (n * PI * hbar / len).powi(2) / 2.0;
                energy = energy.max((psi.expectation(&hm)? - want).abs());
                walls = walls.max(box_wall_density(psi)?.into_iter().fold(0.0, f64::max));
            }
            c.push(Check::new("box_wall_density", walls, tol.wall));
            c.push(Check::new("box_energy", energy, tol.energy));
            Ok(())
        });
    }
}

fn spin(cfg: &ScenarioConfig, c: &mut Collector) {
    let tol = &cfg.tolerances;
    let hbar = cfg.hbar;
    let grid = match SphericalGrid::new(cfg.grid.l_max) {
        Ok(g) => g,
        Err(e) => {
            c.push(Check::failed("sphere_grid", 0.0, &e));
            return;
        }
    };
    let mut eigen_rows: Vec<(String, Eigencheck)> = Vec::new();
    c.group("half_spin", tol.eigen, |c| {
        for (label, up, sign) in [("up", true, 1.0), ("down", false, -1.0)] {
            let e = spin_eigencheck(&SpinField::half_spin(grid.clone(), up, hbar)?)?;
            let name = |s: &str| format!("spin_{label}_{s}");
            c.push(Check::new(name("casimir"), (e.casimir - 0.75 * hbar * hbar).abs(), tol.eigen).note(format!("S.S = {}", e.casimir)));
            c.push(Check::new(name("casimir_residual"), e.casimir_residual, tol.eigen));
            c.push(Check::new(name("s3"), (e.z_component - sign * hbar / 2.0).abs(), tol.eigen).note(format!("S3 = {}", e.z_component)));
            c.push(Check::new(name("s3_residual"), e.z_residual, tol.eigen));
            eigen_rows.push((label.to_string(), e));
        }
        Ok(())
    });
    c.group("harmonics", tol.harmonic, |c| {
        let (mut value, mut resid) = (0.0f64, 0.0f64);
        for l in 0..=cfg.spin.l_check {
            for m in -(l as i64)..=l as i64 {
                let e = spin_eigencheck(&SpinField::spherical_harmonic(grid.clone(), l, m, hbar)?)?;
                value = value.max((e.casimir - hbar * hbar * (l * (l + 1)) as f64).abs());
                value = value.max((e.z_component - m as f64 * hbar).abs());
                resid = resid.max(e.casimir_residual).max(e.z_residual);
                eigen_rows.push((format!("Y_{l}^{m}"), e));
            }
        }
        c.push(Check::new("harmonic_eigenvalues", value, tol.harmonic).note(format!("l <= {}", cfg.spin.l_check)));
        c.push(Check::new("harmonic_residual", resid, tol.harmonic));
        Ok(())
    });
    c.group("pauli", tol.pauli, |c| {
        let p = pauli_reconstruct(&grid, hbar)?;
        c.push(Check::new("pauli_deviation", p.max_deviation, tol.pauli).note(format!("leakage {:e}", p.leakage)));
        let k = p.ladder_constant;
        c.push(Check::new("ladder_constant", (k - hbar).norm(), tol.pauli).note(format!("S+|-> = ({} + {}i)|+>", k.re, k.im)));
        Ok(())
    });
    for (family, weight, tag) in [(OperatorFamily::L, SpinWeight::Zero, "L"), (OperatorFamily::S, SpinWeight::Half, "S")] {
        c.group(&format!("commutators_{tag}"), tol.commutator, |c| {
            let probes = random_probes(&grid, weight, cfg.spin.probe_degree, cfg.spin.probes, cfg.seed, hbar)?;
            let rows = commutator_table(family, &probes)?;
            for r in &rows {
                c.push(Check::new(format!("commutator_{}", r.commutator), r.residual, tol.commutator));
            }
            c.tables.push(Table::from_rows(&format!("commutators_{tag}.csv"), &rows)?);
            Ok(())
        });
    }
    c.group("rotor_spectrum", tol.pauli, |c| {
        let b = cfg.spin.field;
        let inertia = cfg.spin.inertia;
        let block = rotor_block(&grid, hbar, b, inertia)?;
        let eig = nalgebra::SymmetricEigen::new((block + block.adjoint()) * Complex64::new(0.5, 0.0));
        let mut got: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        got.sort_by(f64::total_cmp);
        let centre = 0.75 * hbar * hbar / inertia;
        let split = hbar * b.iter().map(|x| x * x).sum::<f64>().sqrt() / 2.0;
        let dev = (got[0] - (centre - split)).abs().max((got[1] - (centre + split)).abs());
        c.push(Check::new("rotor_spectrum", dev, tol.pauli));
        Ok(())
    });
    if !eigen_rows.is_empty() {
        #[derive(serde::Serialize)]
        struct Row<'a> {
            state: &'a str,
            casimir: f64,
            z_component: f64,
            casimir_residual: f64,
            z_residual: f64,
        }
        let rows: Vec<Row> = eigen_rows
            .iter()
            .map(|(s, e)| Row {
                state: s,
                casimir: e.casimir,
                z_component: e.z_component,
                casimir_residual: e.casimir_residual,
                z_residual: e.z_residual,
            })
            .collect();
        c.group("eigencheck_table", 0.0, |c| {
            c.tables.push(Table::from_rows("eigencheck.csv", &rows)?);
            Ok(())
        });
    }
}
