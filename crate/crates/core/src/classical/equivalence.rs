use super::{CharacteristicsEnsemble, LeafOptions, LeafTransport, LiouvilleOptions, LiouvilleSolver, PhaseSpaceDensity};
use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::hamiltonian::HamiltonianSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceOptions {
    pub liouville: LiouvilleOptions,
    pub leaf: LeafOptions,
    /// Largest leapfrog step for the characteristics ensemble.
    pub characteristic_dt: f64,
    /// Number of equal intervals at which the series is recorded.
    pub samples: usize,
    /// Skip leaf transport (it is only available in one dimension).
    pub leaves: bool,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions {
            liouville: LiouvilleOptions::default(),
            leaf: LeafOptions {
                relabel_threshold: Some(0.4),
                ..LeafOptions::default()
            },
            characteristic_dt: 1e-2,
            samples: 8,
            leaves: true,
        }
    }
}

/// One row of the per-run series. `l1_vs_reference` compares the grid
/// Liouville solution with the leaf reconstruction, or with the deposited
/// ensemble when leaves are unavailable.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ClassicalSeriesRow {
    pub t: f64,
    pub mass: f64,
    pub energy_mean: f64,
    pub l1_vs_reference: f64,
    pub min_sigma: f64,
}

/// Outcome at one resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolutionResult {
    pub shape: Vec<usize>,
    pub liouville: PhaseSpaceDensity,
    pub characteristics: PhaseSpaceDensity,
    pub leaves: Option<PhaseSpaceDensity>,
    pub l1_liouville_characteristics: f64,
    pub l1_liouville_leaves: Option<f64>,
    pub l1_characteristics_leaves: Option<f64>,
    pub l1_liouville_initial: f64,
    pub caustic_time: Option<f64>,
    pub relabels: usize,
    pub renormalization: Option<f64>,
    pub series: Vec<ClassicalSeriesRow>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub results: Vec<ResolutionResult>,
    /// Observed order of the Liouville/characteristics distance between
    /// consecutive resolutions.
    pub orders: Vec<f64>,
}

impl EquivalenceReport {
    pub fn finest(&self) -> &ResolutionResult {
        self.results.last().expect("at least one resolution")
    }

    pub fn min_order(&self) -> Option<f64> {
        self.orders.iter().copied().reduce(f64::min)
    }
}

/// Evolves `initial` for `t_end` by the grid Liouville equation, the
/// characteristics ensemble with kernel re-deposition, and leaf transport
/// with reconstruction, on each of `grids` (coarse to fine).
///
/// A zero duration returns the sampled initial density from every method.
pub fn verify_classical_equivalence(
    h: &HamiltonianSpec,
    initial: &dyn Fn(&PhaseGrid) -> Result<PhaseSpaceDensity>,
    t_end: f64,
    grids: &[PhaseGrid],
    options: &EquivalenceOptions,
) -> Result<EquivalenceReport> {
    if grids.is_empty() {
        return Err(Error::arg("grids", "need at least one resolution"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::arg("t_end", "must be finite and non-negative"));
    }
    if !(options.characteristic_dt > 0.0) || options.samples == 0 {
        return Err(Error::arg("options", "characteristic_dt and samples must be positive"));
    }
    let results = grids
        .iter()
        .map(|g| run_resolution(h, initial, t_end, g, options))
        .collect::<Result<Vec<_>>>()?;
    let orders = results
        .windows(2)
        .map(|w| {
            let ratio = w[1].shape[0] as f64 / w[0].shape[0] as f64;
            (w[0].l1_liouville_characteristics / w[1].l1_liouville_characteristics).ln() / ratio.ln()
        })
        .collect();
    Ok(EquivalenceReport { results, orders })
}

fn run_resolution(
    h: &HamiltonianSpec,
    initial: &dyn Fn(&PhaseGrid) -> Result<PhaseSpaceDensity>,
    t_end: f64,
    grid: &PhaseGrid,
    options: &EquivalenceOptions,
) -> Result<ResolutionResult> {
    let rho0 = initial(grid)?;
    grid.ensure_same(rho0.grid())?;
    let solver = LiouvilleSolver::new(h, grid, options.liouville)?;
    let mut ensemble = CharacteristicsEnsemble::from_density(&rho0);
    let mut transport = if options.leaves && grid.dim() == 1 {
        Some(LeafTransport::new(h, &rho0, options.leaf)?)
    } else {
        None
    };
    let mut caustic_time = None;
    let mut rho = rho0.clone();
    let mut series = Vec::with_capacity(options.samples + 1);
    let reference = |transport: &Option<LeafTransport>, ensemble: &CharacteristicsEnsemble, moved: bool| {
        match transport {
            Some(tr) => tr.reconstruct().map(|r| (r.density, tr.foliation().min_sigma(), Some(r.renormalization))),
            None if moved => ensemble.deposit(grid).map(|d| (d, f64::NAN, None)),
            None => Ok((rho0.clone(), f64::NAN, None)),
        }
    };
    let (ref0, sigma0, _) = reference(&transport, &ensemble, false)?;
    series.push(ClassicalSeriesRow {
        t: 0.0,
        mass: rho.mass(),
        energy_mean: rho.energy_mean(h)?,
        l1_vs_reference: rho.l1_distance(&ref0)?,
        min_sigma: sigma0,
    });
    let moved = t_end > 0.0;
    let mut renormalization = None;
    let mut last_reference = ref0;
    if moved {
        let interval = t_end / options.samples as f64;
        let substeps = (interval / options.characteristic_dt).ceil().max(1.0) as usize;
        let dt_char = interval / substeps as f64;
        for s in 1..=options.samples {
            rho = solver.advance(&rho, interval)?;
            for _ in 0..substeps {
                ensemble.step(h, dt_char)?;
            }
            if let Some(tr) = transport.as_mut() {
                match tr.advance(interval) {
                    Ok(()) => {}
                    Err(Error::Caustic { time, .. }) => {
                        caustic_time = Some(time);
                        transport = None;
                    }
                    Err(e) => return Err(e),
                }
            }
            let (r, sigma, renorm) = reference(&transport, &ensemble, true)?;
            renormalization = renorm;
            series.push(ClassicalSeriesRow {
                t: if s == options.samples { t_end } else { s as f64 * interval },
                mass: rho.mass(),
                energy_mean: rho.energy_mean(h)?,
                l1_vs_reference: rho.l1_distance(&r)?,
                min_sigma: sigma,
            });
            last_reference = r;
        }
    }
    let characteristics = if moved { ensemble.deposit(grid)? } else { rho0.clone() };
    let leaves = match &transport {
        Some(_) => Some(if moved { last_reference } else { rho0.clone() }),
        None => None,
    };
    let l1 = |a: &PhaseSpaceDensity, b: &PhaseSpaceDensity| a.l1_distance(b);
    Ok(ResolutionResult {
        shape: grid.shape(),
        l1_liouville_characteristics: l1(&rho, &characteristics)?,
        l1_liouville_leaves: leaves.as_ref().map(|lv| l1(&rho, lv)).transpose()?,
        l1_characteristics_leaves: leaves.as_ref().map(|lv| l1(&characteristics, lv)).transpose()?,
        l1_liouville_initial: l1(&rho, &rho0)?,
        caustic_time,
        relabels: transport.as_ref().map_or(0, LeafTransport::relabel_count),
        renormalization,
        liouville: rho,
        characteristics,
        leaves,
        series,
    })
}
