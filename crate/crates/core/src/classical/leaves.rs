use std::f64::consts::PI;

use rayon::prelude::*;

use super::pchip::{pchip_interpolate, Interpolation};
use super::PhaseSpaceDensity;
use crate::error::{Error, Result};
use crate::grid::{Boundary, ConfigGrid, CovectorField, PhaseGrid, ScalarField};
use crate::hamiltonian::{HamiltonianSpec, SampledHamiltonian};
use crate::spectral;

/// Edge density, relative to the peak, above which missing coverage is an error.
const COVERAGE_TOLERANCE: f64 = 1e-6;

/// One momentum field `p[k](x)` of a Lagrange foliation with its density.
///
/// `tangent` holds `Q_ij = d p_i / d k_j` per node (row-major in `ij`), so
/// the Jacobian is `sigma = det Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationLeaf {
    label: Vec<f64>,
    momentum: CovectorField,
    density: ScalarField,
    tangent: Vec<Vec<f64>>,
}

impl FoliationLeaf {
    pub fn new(label: Vec<f64>, momentum: CovectorField, density: ScalarField, tangent: Vec<Vec<f64>>) -> Result<Self> {
        let grid = momentum.grid();
        let d = grid.dim();
        if label.len() != d {
            return Err(Error::arg("label", "length must equal the dimension"));
        }
        grid.ensure_same(density.grid())?;
        if tangent.len() != d * d || tangent.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("tangent must have dim^2 components per node".into()));
        }
        Ok(FoliationLeaf {
            label,
            momentum,
            density,
            tangent,
        })
    }

    /// Flat leaf `p[k](x) = k` with identity tangent.
    pub fn horizontal(grid: ConfigGrid, label: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let d = grid.dim();
        let n = grid.len();
        let momentum = CovectorField::new(grid.clone(), label.iter().map(|&k| vec![k; n]).collect())?;
        let tangent = (0..d * d)
            .map(|ij| vec![if ij / d == ij % d { 1.0 } else { 0.0 }; n])
            .collect();
        Self::new(label, momentum, ScalarField::new(grid, density)?, tangent)
    }

    pub fn label(&self) -> &[f64] {
        &self.label
    }

    pub fn momentum(&self) -> &CovectorField {
        &self.momentum
    }

    pub fn density(&self) -> &ScalarField {
        &self.density
    }

    pub fn tangent(&self) -> &[Vec<f64>] {
        &self.tangent
    }

    pub fn grid(&self) -> &ConfigGrid {
        self.momentum.grid()
    }

    /// `sigma = det(d p_i / d k_j)` at every node.
    pub fn sigma(&self) -> ScalarField {
        let n = self.grid().len();
        let q = &self.tangent;
        let values = match self.label.len() {
            1 => q[0].clone(),
            _ => (0..n).map(|i| q[0][i] * q[3][i] - q[1][i] * q[2][i]).collect(),
        };
        ScalarField::new(self.grid().clone(), values).expect("sigma shares the leaf grid")
    }

    /// `int rho_bar dx`.
    pub fn mass(&self) -> f64 {
        crate::grid::integrate(&self.density)
    }
}

/// The dual-space pair `(rho_bar p_bar, rho_bar)` of a leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct EmergenceMomentum {
    pub current: CovectorField,
    pub density: ScalarField,
}

impl EmergenceMomentum {
    pub fn from_leaf(leaf: &FoliationLeaf) -> Self {
        let rho = leaf.density.values();
        let comps = leaf
            .momentum
            .components()
            .iter()
            .map(|c| c.iter().zip(rho).map(|(p, r)| p * r).collect())
            .collect();
        EmergenceMomentum {
            current: CovectorField::new(leaf.grid().clone(), comps).expect("components match the leaf grid"),
            density: leaf.density.clone(),
        }
    }
}

/// Leaves sharing a configuration grid, labelled on a regular `k` lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Foliation {
    leaves: Vec<FoliationLeaf>,
    label_cell: f64,
    labeling_time: f64,
}

impl Foliation {
    /// `label_cell` is the `k`-space volume carried by each leaf.
    pub fn new(leaves: Vec<FoliationLeaf>, label_cell: f64, labeling_time: f64) -> Result<Self> {
        let first = leaves.first().ok_or_else(|| Error::arg("leaves", "empty foliation"))?;
        for leaf in &leaves[1..] {
            first.grid().ensure_same(leaf.grid())?;
        }
        if !(label_cell > 0.0 && label_cell.is_finite()) {
            return Err(Error::arg("label_cell", "must be positive"));
        }
        Ok(Foliation {
            leaves,
            label_cell,
            labeling_time,
        })
    }

    /// Horizontal slicing `p[k] = k`, one leaf per momentum node.
    pub fn slice(rho: &PhaseSpaceDensity, labeling_time: f64) -> Result<Self> {
        let grid = rho.grid();
        let p_len = grid.p_len();
        let n = grid.x().len();
        let leaves = (0..p_len)
            .map(|pk| {
                let (_, k) = grid.point(pk);
                let dens = (0..n).map(|i| rho.values()[i * p_len + pk]).collect();
                FoliationLeaf::horizontal(grid.x().clone(), k, dens)
            })
            .collect::<Result<Vec<_>>>()?;
        let label_cell = (0..grid.dim()).map(|a| grid.p_spacing(a)).product();
        Self::new(leaves, label_cell, labeling_time)
    }

    pub fn leaves(&self) -> &[FoliationLeaf] {
        &self.leaves
    }

    pub fn labeling_time(&self) -> f64 {
        self.labeling_time
    }

    pub fn label_cell(&self) -> f64 {
        self.label_cell
    }

    /// `sum_k int rho_bar[k] dx dk`.
    pub fn mass(&self) -> f64 {
        self.leaves.iter().map(FoliationLeaf::mass).sum::<f64>() * self.label_cell
    }

    pub fn min_sigma(&self) -> f64 {
        self.leaves
            .iter()
            .map(|l| l.sigma().values().iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|sigma - 1|` over all leaves.
    pub fn max_sigma_deviation(&self) -> f64 {
        self.leaves
            .iter()
            .map(|l| l.sigma().values().iter().fold(0.0f64, |m, s| m.max((s - 1.0).abs())))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafOptions {
    /// Transport stops once `sigma` leaves `[floor, 1 / floor]`.
    pub caustic_floor: f64,
    /// Re-slice horizontally once `max |sigma - 1|` exceeds this.
    pub relabel_threshold: Option<f64>,
    pub cfl: f64,
    /// Volume density of the configuration metric; 1 on flat grids.
    pub volume_density: f64,
}

impl Default for LeafOptions {
    fn default() -> Self {
        LeafOptions {
            caustic_floor: 1e-3,
            relabel_threshold: None,
            cfl: 3.0,
            volume_density: 1.0,
        }
    }
}

struct LeafContext<'a> {
    sampled: &'a SampledHamiltonian,
    grid: &'a ConfigGrid,
    shape: Vec<usize>,
}

impl LeafContext<'_> {
    fn derivative_fd(&self, v: &[f64], axis: usize) -> Vec<f64> {
        spectral::derivative_fd4(v, &self.shape, axis, self.grid.spacing(axis))
    }

    fn flux_divergence(&self, rho: &[f64], v: &[f64], axis: usize) -> Vec<f64> {
        let periodic = self.grid.boundary() == Boundary::Periodic;
        spectral::flux_divergence_upwind5(rho, v, &self.shape, axis, self.grid.spacing(axis), periodic)
    }

    /// State layout: `d` momentum components, density, `d^2` tangent
    /// components, each `n` long.
    ///
    /// The density uses an upwind finite-volume flux: `v = H_p(x, p(x))`
    /// changes sign across the periodic seam, where a global spectral
    /// derivative is unstable.
    fn rhs(&self, state: &[f64], out: &mut [f64]) {
        let d = self.grid.dim();
        let n = self.grid.len();
        if d == 1 {
            return self.rhs_1d(state, out);
        }
        let comp = |c: usize| &state[c * n..(c + 1) * n];
        let mut dpbar = Vec::with_capacity(d * d);
        for i in 0..d {
            for l in 0..d {
                dpbar.push(self.derivative_fd(comp(i), l));
            }
        }
        let mut dq = Vec::with_capacity(d * d * d);
        for ij in 0..d * d {
            for l in 0..d {
                dq.push(self.derivative_fd(comp(d + 1 + ij), l));
            }
        }
        let rho = comp(d);
        let mut vel = vec![vec![0.0; n]; d];
        let (mut hp, mut hx) = ([0.0; 2], [0.0; 2]);
        let (mut hpp, mut hxp) = ([0.0; 4], [0.0; 4]);
        let mut p = [0.0; 2];
        for node in 0..n {
            for i in 0..d {
                p[i] = state[i * n + node];
            }
            self.sampled.gradients(node, &p[..d], &mut hp[..d], &mut hx[..d]);
            self.sampled
                .hessian_blocks(node, &p[..d], &mut hpp[..d * d], &mut hxp[..d * d]);
            for i in 0..d {
                let mut v = -hx[i];
                for l in 0..d {
                    v -= hp[l] * dpbar[i * d + l][node];
                }
                out[i * n + node] = v;
            }
            for j in 0..d {
                vel[j][node] = hp[j];
            }
            for i in 0..d {
                for j in 0..d {
                    let mut v = 0.0;
                    for m in 0..d {
                        let qmj = state[(d + 1 + m * d + j) * n + node];
                        v -= hxp[i * d + m] * qmj;
                        for l in 0..d {
                            v -= hpp[l * d + m] * qmj * dpbar[i * d + l][node];
                        }
                    }
                    for l in 0..d {
                        v -= hp[l] * dq[(i * d + j) * d + l][node];
                    }
                    out[(d + 1 + i * d + j) * n + node] = v;
                }
            }
        }
        out[d * n..(d + 1) * n].iter_mut().for_each(|v| *v = 0.0);
        for (j, v) in vel.iter().enumerate() {
            let div = self.flux_divergence(rho, v, j);
            for node in 0..n {
                out[d * n + node] -= div[node];
            }
        }
    }

    fn rhs_1d(&self, state: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        let (p, rest) = state.split_at(n);
        let (rho, q) = rest.split_at(n);
        let dp = self.derivative_fd(p, 0);
        let dq = self.derivative_fd(q, 0);
        let mut vel = vec![0.0; n];
        let (out_p, rest) = out.split_at_mut(n);
        let (out_rho, out_q) = rest.split_at_mut(n);
        if let Some((m, du)) = self.sampled.plain_1d() {
            for node in 0..n {
                let (pn, qn, dpn) = (p[node], q[node], dp[node]);
                out_p[node] = -du[node] - m * pn * dpn;
                out_q[node] = -m * (qn * dpn + pn * dq[node]);
                vel[node] = m * pn;
            }
            let div = self.flux_divergence(rho, &vel, 0);
            out_rho.iter_mut().zip(&div).for_each(|(o, d)| *o = -d);
            return;
        }
        let (mut hp, mut hx, mut hpp, mut hxp) = ([0.0], [0.0], [0.0], [0.0]);
        for node in 0..n {
            self.sampled.gradients(node, &p[node..node + 1], &mut hp, &mut hx);
            self.sampled.hessian_blocks(node, &p[node..node + 1], &mut hpp, &mut hxp);
            out_p[node] = -hx[0] - hp[0] * dp[node];
            out_q[node] = -hxp[0] * q[node] - hpp[0] * q[node] * dp[node] - hp[0] * dq[node];
            vel[node] = hp[0];
        }
        let div = self.flux_divergence(rho, &vel, 0);
        out_rho.iter_mut().zip(&div).for_each(|(o, d)| *o = -d);
    }

    /// Largest transport rate `sum_l max|H_p_l| pi / h_l` over the leaf.
    fn rate(&self, leaf: &FoliationLeaf) -> f64 {
        let d = self.grid.dim();
        let mut vmax = [0.0f64; 2];
        let (mut hp, mut hx) = ([0.0; 2], [0.0; 2]);
        let mut p = [0.0; 2];
        for node in 0..self.grid.len() {
            for i in 0..d {
                p[i] = leaf.momentum.component(i)[node];
            }
            self.sampled.gradients(node, &p[..d], &mut hp[..d], &mut hx[..d]);
            for l in 0..d {
                vmax[l] = vmax[l].max(hp[l].abs());
            }
        }
        (0..d).map(|l| vmax[l] * PI / self.grid.spacing(l)).sum()
    }

    fn step(&self, leaf: &FoliationLeaf, dt: f64) -> Result<FoliationLeaf> {
        let d = self.grid.dim();
        let n = self.grid.len();
        let mut y0 = Vec::with_capacity((d + 1 + d * d) * n);
        for c in leaf.momentum.components() {
            y0.extend_from_slice(c);
        }
        y0.extend_from_slice(leaf.density.values());
        for c in &leaf.tangent {
            y0.extend_from_slice(c);
        }
        let len = y0.len();
        let mut k = vec![0.0; len];
        let mut stage = vec![0.0; len];
        let mut acc = y0.clone();
        for (s, (frac, weight)) in [(0.0, 1.0), (0.5, 2.0), (0.5, 2.0), (1.0, 1.0)].into_iter().enumerate() {
            if s == 0 {
                self.rhs(&y0, &mut k);
            } else {
                for i in 0..len {
                    stage[i] = y0[i] + frac * dt * k[i];
                }
                self.rhs(&stage, &mut k);
            }
            for i in 0..len {
                acc[i] += dt * weight / 6.0 * k[i];
            }
        }
        if acc.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("leaf transport"));
        }
        let chunk = |c: usize| acc[c * n..(c + 1) * n].to_vec();
        Ok(FoliationLeaf {
            label: leaf.label.clone(),
            momentum: CovectorField::new(self.grid.clone(), (0..d).map(chunk).collect())?,
            density: ScalarField::with_parity(self.grid.clone(), chunk(d), leaf.density.parity())?,
            tangent: (0..d * d).map(|ij| chunk(d + 1 + ij)).collect(),
        })
    }
}

fn check_sigma(leaf: &FoliationLeaf, floor: f64, time: f64) -> Result<()> {
    let sigma = leaf.sigma();
    let lo = sigma.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sigma.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo >= floor && hi <= 1.0 / floor) {
        return Err(Error::Caustic {
            time,
            min_sigma: lo,
            floor,
        });
    }
    Ok(())
}

/// One RK4 step of leaf transport:
/// `dp/dt = -H_x - H_p . grad p`, `d rho/dt = -div(H_p rho)`, and the
/// linearized equation for `dp/dk`. A caustic error reports `time = dt`.
pub fn step_lie_poisson_leaf(h: &HamiltonianSpec, leaf: &FoliationLeaf, dt: f64) -> Result<FoliationLeaf> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::arg("dt", "must be finite and non-negative"));
    }
    if dt == 0.0 {
        return Ok(leaf.clone());
    }
    let sampled = SampledHamiltonian::new(h, leaf.grid())?;
    let ctx = LeafContext {
        sampled: &sampled,
        grid: leaf.grid(),
        shape: leaf.grid().shape(),
    };
    let next = ctx.step(leaf, dt)?;
    check_sigma(&next, LeafOptions::default().caustic_floor, dt)?;
    Ok(next)
}

/// Reconstructed density and the factor applied to restore unit mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub density: PhaseSpaceDensity,
    pub renormalization: f64,
}

/// `rho(x, p[k](x)) = rho_bar[k](x) / (sqrt(g) sigma[k](x))`, resampled
/// along `p` on every configuration column of `target`.
///
/// Target nodes outside the span of the leaves are set to zero when the
/// edge leaves carry negligible density and rejected otherwise.
pub fn reconstruct_phase_density(
    foliation: &Foliation,
    target: &PhaseGrid,
    options: &LeafOptions,
    time: f64,
) -> Result<Reconstruction> {
    let first = &foliation.leaves[0];
    target.x().ensure_same(first.grid())?;
    if target.dim() != 1 {
        return Err(Error::Unsupported("reconstruction onto two-dimensional momentum grids".into()));
    }
    let floor = options.caustic_floor;
    let sigmas: Vec<ScalarField> = foliation.leaves.iter().map(FoliationLeaf::sigma).collect();
    let nk = foliation.leaves.len();
    let n = target.x().len();
    let mut ps = vec![0.0; nk];
    let mut vals = vec![0.0; nk];
    let mut peak: f64 = 0.0;
    for (leaf, s) in foliation.leaves.iter().zip(&sigmas) {
        for (r, sg) in leaf.density.values().iter().zip(s.values()) {
            peak = peak.max((r / (options.volume_density * sg)).abs());
        }
    }
    let pc = target.p_coords(0);
    let p_len = pc.len();
    let mut out = vec![0.0; target.len()];
    let mut column = vec![None; p_len];
    for i in 0..n {
        let mut min_sigma = f64::INFINITY;
        for (k, (leaf, s)) in foliation.leaves.iter().zip(&sigmas).enumerate() {
            let sg = s.values()[i];
            if !(sg > floor) {
                return Err(Error::Caustic {
                    time,
                    min_sigma: sg,
                    floor,
                });
            }
            min_sigma = min_sigma.min(sg);
            ps[k] = leaf.momentum.component(0)[i];
            vals[k] = leaf.density.values()[i] / (options.volume_density * sg);
        }
        if ps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Caustic {
                time,
                min_sigma,
                floor,
            });
        }
        let method = if min_sigma < 10.0 * floor {
            Interpolation::Linear
        } else {
            Interpolation::MonotoneCubic
        };
        pchip_interpolate(&ps, &vals, &pc, method, &mut column)?;
        for (j, v) in column.iter().enumerate() {
            out[i * p_len + j] = match v {
                Some(v) => *v,
                None => {
                    let edge = if pc[j] < ps[0] { vals[0] } else { vals[nk - 1] };
                    if edge.abs() > COVERAGE_TOLERANCE * peak {
                        return Err(Error::Coverage {
                            x: target.x().point(i)[0],
                            edge_density: edge,
                        });
                    }
                    0.0
                }
            };
        }
    }
    let raw = PhaseSpaceDensity::from_solver(target.clone(), out);
    let mass = raw.mass();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::arg("foliation", "reconstructed mass is not positive"));
    }
    let values = raw.into_values().into_iter().map(|v| v / mass).collect();
    Ok(Reconstruction {
        density: PhaseSpaceDensity::from_solver(target.clone(), values),
        renormalization: 1.0 / mass,
    })
}

/// Leaf transport of a sliced initial density, with optional periodic
/// relabelling to keep the foliation regular.
#[derive(Clone, Debug)]
pub struct LeafTransport {
    sampled: SampledHamiltonian,
    target: PhaseGrid,
    foliation: Foliation,
    options: LeafOptions,
    time: f64,
    relabels: usize,
    min_sigma_seen: f64,
}

impl LeafTransport {
    pub fn new(h: &HamiltonianSpec, rho0: &PhaseSpaceDensity, options: LeafOptions) -> Result<Self> {
        if !(options.caustic_floor > 0.0 && options.caustic_floor < 1.0) {
            return Err(Error::arg("caustic_floor", "must lie in (0, 1)"));
        }
        if !(options.cfl > 0.0 && options.cfl.is_finite()) {
            return Err(Error::arg("cfl", "must be positive"));
        }
        Ok(LeafTransport {
            sampled: SampledHamiltonian::new(h, rho0.grid().x())?,
            target: rho0.grid().clone(),
            foliation: Foliation::slice(rho0, 0.0)?,
            options,
            time: 0.0,
            relabels: 0,
            min_sigma_seen: 1.0,
        })
    }

    pub fn foliation(&self) -> &Foliation {
        &self.foliation
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn relabel_count(&self) -> usize {
        self.relabels
    }

    /// Smallest `sigma` encountered since the start.
    pub fn min_sigma_seen(&self) -> f64 {
        self.min_sigma_seen
    }

    fn context(&self) -> LeafContext<'_> {
        let grid = self.foliation.leaves[0].grid();
        LeafContext {
            sampled: &self.sampled,
            grid,
            shape: grid.shape(),
        }
    }

    fn dt_max(&self) -> f64 {
        let ctx = self.context();
        let rate = self
            .foliation
            .leaves
            .par_iter()
            .map(|l| ctx.rate(l))
            .reduce(|| 0.0, f64::max);
        if rate > 0.0 {
            self.options.cfl / rate
        } else {
            f64::INFINITY
        }
    }

    /// Advances all leaves by `duration`.
    pub fn advance(&mut self, duration: f64) -> Result<()> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::arg("duration", "must be finite and non-negative"));
        }
        let end = self.time + duration;
        let mut remaining = duration;
        while remaining > 0.0 {
            let dt_max = self.dt_max();
            let steps = (remaining / dt_max).ceil().max(1.0);
            let dt = remaining / steps;
            let t_next = if steps == 1.0 { end } else { self.time + dt };
            let ctx = self.context();
            let floor = self.options.caustic_floor;
            let leaves = self
                .foliation
                .leaves
                .par_iter()
                .map(|l| {
                    let next = ctx.step(l, dt)?;
                    check_sigma(&next, floor, t_next)?;
                    Ok(next)
                })
                .collect::<Result<Vec<_>>>()?;
            self.foliation.leaves = leaves;
            self.time = t_next;
            remaining = end - self.time;
            self.min_sigma_seen = self.min_sigma_seen.min(self.foliation.min_sigma());
            if let Some(threshold) = self.options.relabel_threshold {
                if self.foliation.max_sigma_deviation() > threshold {
                    self.relabel()?;
                }
            }
        }
        Ok(())
    }

    /// Rebuilds the phase density and slices it horizontally at the
    /// current time, which becomes the new labeling time.
    pub fn relabel(&mut self) -> Result<()> {
        let rec = self.reconstruct()?;
        self.foliation = Foliation::slice(&rec.density, self.time)?;
        self.relabels += 1;
        Ok(())
    }

    pub fn reconstruct(&self) -> Result<Reconstruction> {
        reconstruct_phase_density(&self.foliation, &self.target, &self.options, self.time)
    }
}
