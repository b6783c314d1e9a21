use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::bootstrap::{
    bias_estimate, bootstrap_statistics, confidence_interval, variance_estimate, BootstrapConfig, IntervalMethod,
    Statistic,
};
use crate::datagen::{build_sigma_factor, generate_with_factor, CovarianceModel, EllipticalLaw, SigmaFactor};
use crate::error::{Error, Result};
use crate::rng::{tag, RngStream};
use crate::spectral::{top_eigenvalues, CovarianceOptions, DataMatrix};

/// One `(r, c)` grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub ratio: f64,
    pub multiplier: f64,
    pub p: usize,
    /// `1 + c √r`.
    pub lambda1: f64,
}

impl Cell {
    /// Root of every stream used for this cell.
    pub fn stream(&self, master_seed: u64) -> RngStream {
        RngStream::new(master_seed)
            .child(tag::CELL)
            .child(self.ratio.to_bits())
            .child(self.multiplier.to_bits())
    }

    /// Population spectrum `{λ₁, 1, …, 1}`.
    pub fn population_spectrum(&self) -> Vec<f64> {
        let mut s = vec![1.0; self.p];
        s[0] = self.lambda1;
        s
    }
}

/// Cells in ratio-major order.
pub fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    cfg.ratios
        .iter()
        .flat_map(|&ratio| {
            cfg.spike_multipliers.iter().map(move |&multiplier| Cell {
                ratio,
                multiplier,
                p: cfg.dimension(ratio),
                lambda1: 1.0 + multiplier * ratio.sqrt(),
            })
        })
        .collect()
}

/// Population value a statistic is compared with; `None` when undefined.
pub fn true_value(stat: Statistic, cell: &Cell) -> Option<f64> {
    stat.population_value(&cell.population_spectrum()[..cell.p.min(3)])
}

/// Value under the null `Σ = I`: 1 for `λ₁`, 0 for the gap.
pub fn null_value(stat: Statistic) -> Option<f64> {
    match stat {
        Statistic::TopEigenvalue => Some(1.0),
        Statistic::Gap => Some(0.0),
        Statistic::GapRatio => None,
    }
}

/// Per-simulation outcome for one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub law: EllipticalLaw,
    pub ratio: f64,
    pub multiplier: f64,
    pub p: usize,
    pub lambda1: f64,
    pub statistic: Statistic,
    pub simulation: usize,
    pub point_estimate: f64,
    pub true_value: Option<f64>,
    pub null_value: Option<f64>,
    pub boot_bias: f64,
    /// Absent when `B = 1`.
    pub boot_variance: Option<f64>,
    pub percentile: Option<(f64, f64)>,
    pub normal: Option<(f64, f64)>,
    pub bias_corrected: Option<(f64, f64)>,
    pub bc_fallback: bool,
}

impl SimulationRecord {
    pub fn interval(&self, method: IntervalMethod) -> Option<(f64, f64)> {
        match method {
            IntervalMethod::Percentile => self.percentile,
            IntervalMethod::Normal => self.normal,
            IntervalMethod::BiasCorrected => self.bias_corrected,
        }
    }
}

/// Bootstrap replicates of one simulation, kept for density plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub law: EllipticalLaw,
    pub ratio: f64,
    pub multiplier: f64,
    pub statistic: Statistic,
    pub simulation: usize,
    pub point_estimate: f64,
    pub replicates: Vec<f64>,
}

/// Point estimate from a simulation without bootstrap, for truth runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub ratio: f64,
    pub multiplier: f64,
    pub statistic: Statistic,
    pub simulation: usize,
    pub point_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub ratio: f64,
    pub multiplier: f64,
    /// `None` when the whole cell failed before any simulation ran.
    pub simulation: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub records: Vec<SimulationRecord>,
    pub samples: Vec<SampleSet>,
    pub truth: Vec<TruthRecord>,
    pub failures: Vec<CellFailure>,
}

fn cell_factor(cfg: &ExperimentConfig, cell: &Cell) -> Result<SigmaFactor> {
    let model = CovarianceModel::new(cell.p, cell.lambda1, cfg.basis)?;
    build_sigma_factor(&model, &cell.stream(cfg.master_seed))
}

/// A per-simulation factor when the basis is redrawn for every simulation.
fn simulation_factor(cfg: &ExperimentConfig, cell: &Cell, stream: &RngStream) -> Result<Option<SigmaFactor>> {
    if !cfg.redraw_basis_per_simulation {
        return Ok(None);
    }
    let model = CovarianceModel::new(cell.p, cell.lambda1, cfg.basis)?;
    build_sigma_factor(&model, stream).map(Some)
}

fn centered(x: &DataMatrix) -> Result<DataMatrix> {
    let (n, p) = (x.n(), x.p());
    let m = x.as_mat();
    let means: Vec<f64> = (0..p)
        .map(|j| (0..n).map(|i| m[(i, j)]).sum::<f64>() / n as f64)
        .collect();
    DataMatrix::new(Mat::from_fn(n, p, |i, j| m[(i, j)] - means[j]))
}

type SimulationOutput = (Vec<SimulationRecord>, Vec<SampleSet>);

fn simulate(cfg: &ExperimentConfig, cell: &Cell, factor: &SigmaFactor, s: usize) -> Result<SimulationOutput> {
    let stream = cell.stream(cfg.master_seed).sub(tag::SIMULATION, s as u64);
    let own = simulation_factor(cfg, cell, &stream)?;
    let factor = own.as_ref().unwrap_or(factor);
    let mut x = generate_with_factor(factor, cfg.law, cfg.n, &stream)?;
    let mut opts = cfg.covariance_options();
    if opts.center && !cfg.recenter_bootstrap {
        x = centered(&x)?;
        opts = CovarianceOptions {
            center: false,
            divisor: opts.divisor,
        };
    }
    let boot = BootstrapConfig::new(cfg.replicates, stream.child(tag::BOOTSTRAP));
    let dists = bootstrap_statistics(&x, &cfg.statistics, &boot, opts)?;

    let mut records = Vec::with_capacity(dists.len());
    let mut samples = Vec::new();
    for (&stat, dist) in cfg.statistics.iter().zip(dists) {
        let (boot_variance, percentile, normal, bias_corrected, bc_fallback) = if dist.len() >= 2 {
            let ci = |m| confidence_interval(&dist, m, cfg.ci_level);
            let bc = ci(IntervalMethod::BiasCorrected)?;
            let pct = ci(IntervalMethod::Percentile)?;
            let nrm = ci(IntervalMethod::Normal)?;
            (
                Some(variance_estimate(&dist)?),
                Some((pct.lower, pct.upper)),
                Some((nrm.lower, nrm.upper)),
                Some((bc.lower, bc.upper)),
                bc.fell_back,
            )
        } else {
            (None, None, None, None, false)
        };
        records.push(SimulationRecord {
            law: cfg.law,
            ratio: cell.ratio,
            multiplier: cell.multiplier,
            p: cell.p,
            lambda1: cell.lambda1,
            statistic: stat,
            simulation: s,
            point_estimate: dist.point_estimate,
            true_value: true_value(stat, cell),
            null_value: null_value(stat),
            boot_bias: bias_estimate(&dist),
            boot_variance,
            percentile,
            normal,
            bias_corrected,
            bc_fallback,
        });
        if s < cfg.density_simulations {
            samples.push(SampleSet {
                law: cfg.law,
                ratio: cell.ratio,
                multiplier: cell.multiplier,
                statistic: stat,
                simulation: s,
                point_estimate: dist.point_estimate,
                replicates: dist.replicates,
            });
        }
    }
    Ok((records, samples))
}

fn truth_point(cfg: &ExperimentConfig, cell: &Cell, factor: &SigmaFactor, s: usize) -> Result<Vec<TruthRecord>> {
    let stream = cell.stream(cfg.master_seed).sub(tag::TRUTH, s as u64);
    let own = simulation_factor(cfg, cell, &stream)?;
    let factor = own.as_ref().unwrap_or(factor);
    let x = generate_with_factor(factor, cfg.law, cfg.n, &stream)?;
    let k = cfg
        .statistics
        .iter()
        .map(|st| st.eigenvalues_needed())
        .max()
        .unwrap_or(1);
    let summary = top_eigenvalues(&x, k, cfg.covariance_options())?;
    cfg.statistics
        .iter()
        .map(|&stat| {
            Ok(TruthRecord {
                ratio: cell.ratio,
                multiplier: cell.multiplier,
                statistic: stat,
                simulation: s,
                point_estimate: stat.evaluate(&summary)?,
            })
        })
        .collect()
}

/// Runs `f` for every `(cell, simulation)` pair in parallel, collecting in
/// grid order. Failures are recorded per unit.
fn for_each_unit<T: Send>(
    cfg: &ExperimentConfig,
    sims: usize,
    failures: &mut Vec<CellFailure>,
    f: impl Fn(&Cell, &SigmaFactor, usize) -> Result<T> + Sync,
) -> Vec<T> {
    let grid = cells(cfg);
    let factors: Vec<Result<SigmaFactor>> = grid.iter().map(|c| cell_factor(cfg, c)).collect();
    let units: Vec<(usize, usize)> = (0..grid.len())
        .filter(|&i| factors[i].is_ok())
        .flat_map(|i| (0..sims).map(move |s| (i, s)))
        .collect();
    for (cell, factor) in grid.iter().zip(&factors) {
        if let Err(e) = factor {
            failures.push(CellFailure {
                ratio: cell.ratio,
                multiplier: cell.multiplier,
                simulation: None,
                message: e.to_string(),
            });
        }
    }
    let outcomes: Vec<Result<T>> = units
        .par_iter()
        .map(|&(i, s)| f(&grid[i], factors[i].as_ref().expect("filtered"), s))
        .collect();
    let mut out = Vec::with_capacity(outcomes.len());
    for (&(i, s), outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok(v) => out.push(v),
            Err(e) => failures.push(CellFailure {
                ratio: grid[i].ratio,
                multiplier: grid[i].multiplier,
                simulation: Some(s),
                message: e.to_string(),
            }),
        }
    }
    out
}

/// Runs the Monte-Carlo study. Results depend only on the config: every
/// simulation draws from the stream `(master_seed, cell, s)` and outputs are
/// collected in grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let mut failures = Vec::new();
    let outputs = for_each_unit(cfg, cfg.nsim, &mut failures, |cell, factor, s| {
        simulate(cfg, cell, factor, s)
    });
    let (mut records, mut samples) = (Vec::new(), Vec::new());
    for (r, smp) in outputs {
        records.extend(r);
        samples.extend(smp);
    }
    let truth = match cfg.truth_simulations {
        Some(count) => run_truth(cfg, count, &mut failures),
        None => Vec::new(),
    };
    Ok(ExperimentResults {
        config: cfg.clone(),
        records,
        samples,
        truth,
        failures,
    })
}

fn run_truth(cfg: &ExperimentConfig, count: usize, failures: &mut Vec<CellFailure>) -> Vec<TruthRecord> {
    for_each_unit(cfg, count, failures, |cell, factor, s| {
        truth_point(cfg, cell, factor, s)
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Point estimates from `count` independent simulations per cell, without
/// bootstrap; streams are disjoint from those of [`run_experiment`].
pub fn simulate_point_estimates(cfg: &ExperimentConfig, count: usize) -> Result<(Vec<TruthRecord>, Vec<CellFailure>)> {
    cfg.validate()?;
    if count == 0 {
        return Err(Error::invalid("need at least one simulation"));
    }
    let mut failures = Vec::new();
    let truth = run_truth(cfg, count, &mut failures);
    Ok((truth, failures))
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("workers must be positive")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
