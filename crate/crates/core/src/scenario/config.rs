use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{LiouvilleOptions, LiouvilleSolver};
use crate::error::{Error, Result};
use crate::grid::{make_uniform_grid, Boundary, ConfigGrid, PhaseGrid, ScalarField};
use crate::hamiltonian::{HamiltonianSpec, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Classical,
    Quantum,
    Spin,
    Equivalence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianPreset {
    Free,
    Harmonic,
    Box,
    VectorPotential,
    Central,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPreset {
    Gaussian,
    Coherent,
    PlaneWave,
    BoxEigenstate,
    Tabulated,
}

/// `1/2 h^{ij}(p_i + A_i)(p_j + A_j) + U(x)` from a named preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub preset: HamiltonianPreset,
    /// Harmonic frequency.
    #[serde(default = "one")]
    pub omega: f64,
    /// Central potential `sum coeffs[n] r^(2n)`.
    #[serde(default)]
    pub coeffs: Vec<f64>,
    /// Vector potential `offset + amplitude sin(wavenumber x_a)` per axis.
    #[serde(default)]
    pub a_offset: f64,
    #[serde(default)]
    pub a_amplitude: f64,
    #[serde(default = "one")]
    pub a_wavenumber: f64,
    /// Tabulated `U` on the configuration grid, row-major; replaces the
    /// preset potential when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_samples: Option<Vec<f64>>,
    /// Tabulated `A_0` on the configuration grid (1-D only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_potential_samples: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one_usize")]
    pub dim: usize,
    /// Configuration points per axis at the coarsest level.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Number of resolutions, each doubling the previous.
    #[serde(default = "one_usize")]
    pub levels: usize,
    #[serde(default = "default_extent")]
    pub extent: [f64; 2],
    /// Momentum points per axis; defaults to `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_points: Option<usize>,
    /// Momentum half-width.
    #[serde(default = "default_half_width")]
    pub p_extent: f64,
    /// Sphere band limit for the spin layer.
    #[serde(default = "default_l_max")]
    pub l_max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Step size. Classical default: the grid Liouville CFL bound. Quantum
    /// default: `t_final / 1000`. The resolved value divides `t_final`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "one")]
    pub t_final: f64,
    /// Number of recorded series intervals.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Time step of the moment-equation difference quotient.
    #[serde(default = "default_moment_dt")]
    pub moment_dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "default_initial")]
    pub preset: InitialPreset,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default)]
    pub momentum: Vec<f64>,
    /// Classical Gaussian standard deviations, x axes then p axes.
    #[serde(default)]
    pub widths: Vec<f64>,
    /// Quantum Gaussian width.
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub wavenumber: Vec<f64>,
    #[serde(default = "one_usize")]
    pub n: usize,
    /// Classical: whitespace or comma separated phase-density samples.
    /// Quantum: binary state file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinConfig {
    /// Largest degree of the harmonics checked for `L.L`.
    #[serde(default = "default_l_check")]
    pub l_check: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_probe_degree")]
    pub probe_degree: usize,
    #[serde(default = "default_field")]
    pub field: [f64; 3],
    #[serde(default = "one")]
    pub inertia: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "tol_l1")]
    pub l1: f64,
    /// When set, the grid solution must return to the initial density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_l1: Option<f64>,
    /// When set, the observed convergence order must reach this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_order: Option<f64>,
    #[serde(default = "tol_tight")]
    pub mass: f64,
    #[serde(default = "tol_tight")]
    pub norm: f64,
    #[serde(default = "tol_tight")]
    pub trace: f64,
    #[serde(default = "tol_density")]
    pub density_matrix: f64,
    #[serde(default = "tol_picture")]
    pub picture: f64,
    /// Accepted `|ratio - 4|` of moment residuals when `dt` halves.
    #[serde(default = "tol_ratio")]
    pub moment_ratio: f64,
    #[serde(default = "tol_tight")]
    pub momentum: f64,
    #[serde(default = "tol_wall")]
    pub wall: f64,
    #[serde(default = "tol_density")]
    pub energy: f64,
    #[serde(default = "tol_eigen")]
    pub eigen: f64,
    #[serde(default = "tol_density")]
    pub pauli: f64,
    #[serde(default = "tol_commutator")]
    pub commutator: f64,
    /// `L.L` eigenvalue checks on spherical harmonics.
    #[serde(default = "tol_commutator")]
    pub harmonic: f64,
    /// Grid Poisson bracket of `H` with a conserved charge.
    #[serde(default = "tol_tight")]
    pub charge: f64,
}

/// A fully resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub layer: Layer,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_hamiltonian")]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default = "default_grid")]
    pub grid: GridConfig,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_initial_config")]
    pub initial: InitialConfig,
    #[serde(default = "default_spin")]
    pub spin: SpinConfig,
    #[serde(default = "default_tolerances")]
    pub tolerances: Tolerances,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn default_points() -> usize {
    128
}
fn default_extent() -> [f64; 2] {
    [-8.0, 8.0]
}
fn default_half_width() -> f64 {
    8.0
}
fn default_l_max() -> usize {
    16
}
fn default_samples() -> usize {
    8
}
fn default_moment_dt() -> f64 {
    0.05
}
fn default_initial() -> InitialPreset {
    InitialPreset::Gaussian
}
fn default_l_check() -> usize {
    8
}
fn default_probes() -> usize {
    10
}
fn default_probe_degree() -> usize {
    6
}
fn default_field() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn tol_l1() -> f64 {
    5e-3
}
fn tol_tight() -> f64 {
    1e-10
}
fn tol_density() -> f64 {
    1e-8
}
fn tol_picture() -> f64 {
    1e-9
}
fn tol_ratio() -> f64 {
    0.5
}
fn tol_wall() -> f64 {
    1e-12
}
fn tol_eigen() -> f64 {
    1e-6
}
fn tol_commutator() -> f64 {
    1e-7
}
fn default_hamiltonian() -> HamiltonianConfig {
    HamiltonianConfig {
        preset: HamiltonianPreset::Harmonic,
        omega: 1.0,
        coeffs: Vec::new(),
        a_offset: 0.0,
        a_amplitude: 0.0,
        a_wavenumber: 1.0,
        potential_samples: None,
        vector_potential_samples: None,
    }
}
fn default_grid() -> GridConfig {
    GridConfig {
        dim: 1,
        points: default_points(),
        levels: 1,
        extent: default_extent(),
        p_points: None,
        p_extent: default_half_width(),
        l_max: default_l_max(),
    }
}
fn default_integrator() -> IntegratorConfig {
    IntegratorConfig {
        dt: None,
        t_final: 1.0,
        samples: default_samples(),
        moment_dt: default_moment_dt(),
    }
}
fn default_initial_config() -> InitialConfig {
    InitialConfig {
        preset: default_initial(),
        center: Vec::new(),
        momentum: Vec::new(),
        widths: Vec::new(),
        sigma: 1.0,
        wavenumber: Vec::new(),
        n: 1,
        path: None,
    }
}
fn default_spin() -> SpinConfig {
    SpinConfig {
        l_check: default_l_check(),
        probes: default_probes(),
        probe_degree: default_probe_degree(),
        field: default_field(),
        inertia: 1.0,
    }
}
fn default_tolerances() -> Tolerances {
    Tolerances {
        l1: tol_l1(),
        return_l1: None,
        min_order: None,
        mass: tol_tight(),
        norm: tol_tight(),
        trace: tol_tight(),
        density_matrix: tol_density(),
        picture: tol_picture(),
        moment_ratio: tol_ratio(),
        momentum: tol_tight(),
        wall: tol_wall(),
        energy: tol_density(),
        eigen: tol_eigen(),
        pauli: tol_density(),
        commutator: tol_commutator(),
        harmonic: tol_commutator(),
        charge: tol_tight(),
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("{v} must be positive and finite")))
    }
}

fn finite(key: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn fill(key: &str, v: &mut Vec<f64>, len: usize, default: f64) -> Result<()> {
    if v.is_empty() {
        *v = vec![default; len];
    }
    if v.len() != len {
        return Err(invalid(key, format!("{} entries, expected {len}", v.len())));
    }
    finite(key, v)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parses, validates and resolves defaults.
pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig> {
    let raw: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    raw.resolve()
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario_str(&text)
}

impl ScenarioConfig {
    /// Validates every field and writes the documented defaults back.
    pub fn resolve(mut self) -> Result<Self> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(invalid("name", "must be non-empty and use [A-Za-z0-9-_.]"));
        }
        positive("hbar", self.hbar)?;
        let d = self.grid.dim;
        if !(1..=2).contains(&d) {
            return Err(invalid("grid.dim", "must be 1 or 2"));
        }
        if self.grid.points < 4 {
            return Err(invalid("grid.points", "must be at least 4"));
        }
        if !(1..=4).contains(&self.grid.levels) {
            return Err(invalid("grid.levels", "must lie in 1..=4"));
        }
        finite("grid.extent", &self.grid.extent)?;
        if self.grid.extent[1] <= self.grid.extent[0] {
            return Err(invalid("grid.extent", "upper bound must exceed lower bound"));
        }
        positive("grid.p_extent", self.grid.p_extent)?;
        let p_points = *self.grid.p_points.get_or_insert(self.grid.points);
        if p_points < 4 {
            return Err(invalid("grid.p_points", "must be at least 4"));
        }
        if self.grid.l_max == 0 {
            return Err(invalid("grid.l_max", "must be positive"));
        }

        let h = &mut self.hamiltonian;
        positive("hamiltonian.omega", h.omega)?;
        finite("hamiltonian.coeffs", &h.coeffs)?;
        if h.preset == HamiltonianPreset::Central && h.coeffs.is_empty() {
            h.coeffs = vec![0.0, 0.5];
        }
        finite("hamiltonian.a_offset", &[h.a_offset, h.a_amplitude, h.a_wavenumber])?;
        let nodes = self.grid.points.pow(d as u32);
        for (key, s) in [
            ("hamiltonian.potential_samples", &h.potential_samples),
            ("hamiltonian.vector_potential_samples", &h.vector_potential_samples),
        ] {
            if let Some(s) = s {
                if s.len() != nodes {
                    return Err(invalid(key, format!("{} samples, expected {nodes}", s.len())));
                }
                finite(key, s)?;
            }
        }
        if h.vector_potential_samples.is_some() && d != 1 {
            return Err(invalid("hamiltonian.vector_potential_samples", "only 1-D grids"));
        }

        let it = &mut self.integrator;
        if !(it.t_final >= 0.0 && it.t_final.is_finite()) {
            return Err(invalid("integrator.t_final", "must be finite and non-negative"));
        }
        if it.samples == 0 {
            return Err(invalid("integrator.samples", "must be positive"));
        }
        positive("integrator.moment_dt", it.moment_dt)?;
        if let Some(dt) = it.dt {
            if !(dt >= 0.0 && dt.is_finite()) {
                return Err(invalid("dt", format!("{dt} must be finite and non-negative")));
            }
        }

        let ini = &mut self.initial;
        positive("initial.sigma", ini.sigma)?;
        fill("initial.center", &mut ini.center, d, 0.0)?;
        fill("initial.momentum", &mut ini.momentum, d, 0.0)?;
        fill("initial.widths", &mut ini.widths, 2 * d, 1.0)?;
        fill("initial.wavenumber", &mut ini.wavenumber, d, 1.0)?;
        if ini.widths.iter().any(|w| *w <= 0.0) {
            return Err(invalid("initial.widths", "must be positive"));
        }
        if ini.n == 0 {
            return Err(invalid("initial.n", "must be positive"));
        }
        if ini.preset == InitialPreset::Tabulated && ini.path.is_none() {
            return Err(invalid("initial.path", "required by the tabulated preset"));
        }

        positive("spin.inertia", self.spin.inertia)?;
        finite("spin.field", &self.spin.field)?;
        if self.spin.l_check + 1 >= self.grid.l_max || self.spin.probe_degree + 1 >= self.grid.l_max {
            return Err(invalid("spin.l_check", "degrees need one degree of headroom below grid.l_max"));
        }

        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.l1", t.l1),
            ("tolerances.mass", t.mass),
            ("tolerances.norm", t.norm),
            ("tolerances.trace", t.trace),
            ("tolerances.density_matrix", t.density_matrix),
            ("tolerances.picture", t.picture),
            ("tolerances.moment_ratio", t.moment_ratio),
            ("tolerances.momentum", t.momentum),
            ("tolerances.wall", t.wall),
            ("tolerances.energy", t.energy),
            ("tolerances.eigen", t.eigen),
            ("tolerances.pauli", t.pauli),
            ("tolerances.commutator", t.commutator),
            ("tolerances.harmonic", t.harmonic),
            ("tolerances.charge", t.charge),
        ] {
            positive(key, v)?;
        }
        if let Some(v) = t.return_l1 {
            positive("tolerances.return_l1", v)?;
        }
        if let Some(v) = t.min_order {
            finite("tolerances.min_order", &[v])?;
        }

        self.resolve_dt()?;
        Ok(self)
    }

    fn resolve_dt(&mut self) -> Result<()> {
        let t_final = self.integrator.t_final;
        let requested = match (self.integrator.dt, self.layer) {
            (Some(dt), _) => dt,
            (None, Layer::Spin) => 0.0,
            (None, Layer::Quantum) => t_final / 1000.0,
            (None, Layer::Classical | Layer::Equivalence) => {
                let grids = self.phase_grids()?;
                let h = self.hamiltonian_spec(grids.last().expect("levels >= 1").x())?;
                let finest = grids.last().expect("levels >= 1");
                LiouvilleSolver::new(&h, finest, LiouvilleOptions::default())
                    .map(|s| s.dt_max())
                    .unwrap_or(t_final / 1000.0)
                    .min(t_final.max(f64::MIN_POSITIVE))
            }
        };
        let dt = if requested > 0.0 && t_final > 0.0 {
            t_final / (t_final / requested).ceil()
        } else {
            requested
        };
        self.integrator.dt = Some(dt);
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.integrator.dt.unwrap_or(0.0)
    }

    /// `dt = 0` or `t_final = 0`: nothing evolves.
    pub fn is_degenerate(&self) -> bool {
        self.layer != Layer::Spin && (self.dt() == 0.0 || self.integrator.t_final == 0.0)
    }

    pub fn boundary(&self) -> Boundary {
        if self.hamiltonian.preset == HamiltonianPreset::Box {
            Boundary::BoxDoubled
        } else {
            Boundary::Periodic
        }
    }

    pub fn config_grid(&self, points: usize) -> Result<ConfigGrid> {
        let [lo, hi] = self.grid.extent;
        make_uniform_grid(self.grid.dim, &[(lo, hi)], points, self.boundary())
    }

    /// Phase grids from coarse to fine, doubling both axes per level.
    pub fn phase_grids(&self) -> Result<Vec<PhaseGrid>> {
        let p_points = self.grid.p_points.unwrap_or(self.grid.points);
        (0..self.grid.levels)
            .map(|l| {
                let x = self.config_grid(self.grid.points << l)?;
                PhaseGrid::symmetric(x, self.grid.p_extent, p_points << l)
            })
            .collect()
    }

    /// The Hamiltonian on `grid`; tabulated samples refer to the coarsest
    /// configuration grid.
    pub fn hamiltonian_spec(&self, grid: &ConfigGrid) -> Result<HamiltonianSpec> {
        let d = self.grid.dim;
        let h = &self.hamiltonian;
        let identity = if d == 1 { vec![1.0] } else { vec![1.0, 0.0, 0.0, 1.0] };
        let base = self.config_grid(self.grid.points)?;
        let tabulated = |s: &Vec<f64>| -> Result<Profile> {
            Profile::tabulated(ScalarField::new(base.clone(), s.clone())?)
        };
        let potential = match (&h.potential_samples, h.preset) {
            (Some(s), _) => tabulated(s)?,
            (None, HamiltonianPreset::Harmonic) => Profile::quadratic(vec![0.0; d], h.omega * h.omega),
            (None, HamiltonianPreset::Central) => Profile::Radial {
                center: vec![0.0; d],
                coeffs: h.coeffs.clone(),
            },
            (None, _) => Profile::Zero,
        };
        let vector_potential = match (&h.vector_potential_samples, h.preset) {
            (Some(s), _) => Some(vec![tabulated(s)?]),
            (None, HamiltonianPreset::VectorPotential) => Some(
                (0..d)
                    .map(|a| self.vector_potential_component(grid, a))
                    .collect::<Result<Vec<_>>>()?,
            ),
            (None, _) => None,
        };
        HamiltonianSpec::new(identity, vector_potential, potential)
    }

    /// `A_a = offset + amplitude sin(wavenumber x_a)`.
    fn vector_potential_component(&self, grid: &ConfigGrid, a: usize) -> Result<Profile> {
        let h = &self.hamiltonian;
        let d = self.grid.dim;
        if h.a_amplitude == 0.0 {
            return Ok(Profile::Constant(h.a_offset));
        }
        let mut k = vec![0.0; d];
        k[a] = h.a_wavenumber;
        if h.a_offset == 0.0 {
            return Ok(Profile::Sinusoid {
                amplitude: h.a_amplitude,
                wavevector: k,
                phase: 0.0,
            });
        }
        let field = ScalarField::from_fn(grid.clone(), |x| h.a_offset + h.a_amplitude * (h.a_wavenumber * x[a]).sin());
        Profile::tabulated(field)
    }

    /// SHA-256 of the canonical resolved config without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = None;
        let text = toml::to_string(&c).expect("resolved configs serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved configs serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "name = \"ho\"\nlayer = \"classical\"\n\n[hamiltonian]\npreset = \"harmonic\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(c.hbar, 1.0);
        assert_eq!(c.grid.p_points, Some(128));
        let dt = c.dt();
        assert!(dt > 0.0 && dt <= 1.0);
        // the CFL bound on the default grid
        let g = &c.phase_grids().unwrap()[0];
        let bound = LiouvilleSolver::new(&HamiltonianSpec::harmonic(1, 1.0), g, LiouvilleOptions::default())
            .unwrap()
            .dt_max();
        assert!(dt <= bound);
        assert!(((c.integrator.t_final / dt).round() * dt - c.integrator.t_final).abs() < 1e-12);
        // resolving twice is a fixed point
        assert_eq!(parse_scenario_str(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn negative_dt_names_the_key() {
        let text = format!("{MINIMAL}\n[integrator]\ndt = -0.1\n");
        match parse_scenario_str(&text) {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "dt"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_syntax_errors_report_lines() {
        let text = format!("{MINIMAL}\n[grid]\npoints = 64\nbogus = 1\n");
        match parse_scenario_str(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        match parse_scenario_str("name = \"x\"\nlayer = \"spin\"\nhbar = = 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equivalence_layer_parses() {
        let text = "name = \"eq\"\nlayer = \"equivalence\"\n[hamiltonian]\npreset = \"harmonic\"\n";
        assert_eq!(parse_scenario_str(text).unwrap().layer, Layer::Equivalence);
    }

    #[test]
    fn hash_ignores_output_but_not_seed() {
        let a = parse_scenario_str(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 3;
        assert_ne!(a.hash(), b.hash());
    }
}
