//! Checks of the concentration and spiked-model consistency results.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_statistic, multinomial_weights, BootstrapConfig, Statistic};
use crate::datagen::{generate_dataset, Basis, CovarianceModel, EllipticalLaw};
use crate::error::{Error, Result};
use crate::rmt::{azuma_bound, scaled_wielandt_gap_bound, wielandt_gap_bound};
use crate::rng::{tag, RngStream};
use crate::spectral::{
    empirical_stieltjes, matrix_spectrum, sample_covariance, top_eigenvalues, weighted_full_spectrum,
    CovarianceOptions, DataMatrix, SpectralSummary, MIN_IMAG,
};
use crate::stats::{ks_two_sample, mean, median};

/// Thresholds `t` at which exceedance is compared with the bound:
/// 41 log-spaced values from 1e−4 to 1.
pub fn concentration_t_grid() -> Vec<f64> {
    (0..=40).map(|j| 10f64.powf(-4.0 + 0.1 * j as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of replicates with `|m_b − mean| > t`.
    pub empirical: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub p: usize,
    pub z: Complex64,
    pub replicates: usize,
    pub mean_stieltjes: Complex64,
    pub max_deviation: f64,
    pub tail: Vec<TailRow>,
    /// Some empirical exceedance probability is above the bound.
    pub violated: bool,
}

/// Spread of the Stieltjes transform of the bootstrapped covariance
/// `(1/n) Σ w_i X_i X_iᵀ` over `replicates` multinomial weight draws,
/// against the Azuma bound at `v = Im z`.
pub fn concentration_check(
    x: &DataMatrix,
    z: Complex64,
    replicates: usize,
    rng: &RngStream,
) -> Result<ConcentrationReport> {
    if !(z.im >= MIN_IMAG) {
        return Err(Error::BadSpectralArgument {
            got: z.im,
            min: MIN_IMAG,
        });
    }
    if replicates == 0 {
        return Err(Error::TooFewReplicates { got: 0, min: 1 });
    }
    let (n, p) = (x.n(), x.p());
    let values: Vec<Complex64> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let w: Vec<f64> = multinomial_weights(n, &rng.child(b as u64))
                .into_iter()
                .map(f64::from)
                .collect();
            let spec = weighted_full_spectrum(x, &w, CovarianceOptions::UNCENTERED)?;
            empirical_stieltjes(&spec, z)
        })
        .collect::<Result<_>>()?;
    let centre = values.iter().sum::<Complex64>() / replicates as f64;
    let deviations: Vec<f64> = values.iter().map(|m| (m - centre).norm()).collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let tail: Vec<TailRow> = concentration_t_grid()
        .into_iter()
        .map(|t| TailRow {
            t,
            empirical: deviations.iter().filter(|&&d| d > t).count() as f64 / replicates as f64,
            bound: azuma_bound(t, p, z.im, n),
        })
        .collect();
    let violated = tail.iter().any(|r| r.empirical > r.bound);
    Ok(ConcentrationReport {
        n,
        p,
        z,
        replicates,
        mean_stieltjes: centre,
        max_deviation,
        tail,
        violated,
    })
}

/// [`concentration_check`] on `n × p` standard Gaussian data drawn from `seed`.
pub fn concentration_experiment(
    n: usize,
    p: usize,
    z: Complex64,
    replicates: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    let root = RngStream::new(seed).child(tag::CONCENTRATION);
    let model = CovarianceModel::new(p, 1.0, Basis::Identity)?;
    let x = generate_dataset(&model, EllipticalLaw::Gaussian, n, &root)?;
    concentration_check(&x, z, replicates, &root.child(tag::BOOTSTRAP))
}

/// Block model `Σ = diag(λ₁, …, λ_q, n^{−α} I)` with `p = round(r n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikedConfig {
    pub q: usize,
    pub alpha: f64,
    pub n_grid: Vec<usize>,
    pub law: EllipticalLaw,
    pub ratio: f64,
    /// Leading spike `1 + c √r`; spike `j` (from 0) is that value over `2^j`.
    pub spike_multiplier: f64,
    pub nsim: usize,
    /// Bootstrap replicates per simulation; 0 skips the bootstrap metric.
    pub replicates: usize,
    pub master_seed: u64,
}

impl Default for SpikedConfig {
    fn default() -> Self {
        Self {
            q: 1,
            alpha: 1.0,
            n_grid: vec![250, 500, 1000],
            law: EllipticalLaw::Gaussian,
            ratio: 0.1,
            spike_multiplier: 50.0,
            nsim: 300,
            replicates: 299,
            master_seed: 2009,
        }
    }
}

impl SpikedConfig {
    pub fn spikes(&self) -> Vec<f64> {
        let top = 1.0 + self.spike_multiplier * self.ratio.sqrt();
        (0..self.q).map(|j| top / 2f64.powi(j as i32)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.q) {
            return Err(Error::invalid(format!("q must be 1, 2 or 3, got {}", self.q)));
        }
        if !(self.alpha > 0.5) {
            return Err(Error::invalid(format!("alpha must exceed 1/2, got {}", self.alpha)));
        }
        if self.n_grid.is_empty() || self.nsim == 0 {
            return Err(Error::invalid("need a non-empty n grid and nsim > 0"));
        }
        if !(self.ratio > 0.0) {
            return Err(Error::invalid("ratio must be positive"));
        }
        for &n in &self.n_grid {
            let p = (self.ratio * n as f64).round() as usize;
            if p <= self.q || n < 2 {
                return Err(Error::invalid(format!("n = {n} gives p = {p}, need p > q")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikedRow {
    pub n: usize,
    pub p: usize,
    /// Median over simulations of `√n · max_i (λ_i(S) − λ_i(T))`.
    pub median_scaled_gap: f64,
    pub mean_scaled_gap: f64,
    /// Median over simulations of the KS distance between the bootstrap
    /// values of `√n (λ₁* − λ̂₁)` and the simulated `√n (λ̂₁ − λ₁)`.
    pub median_ks: Option<f64>,
    /// KS distance with all bootstrap values pooled.
    pub pooled_ks: Option<f64>,
    /// Fractions of proviso-feasible simulations within each bound.
    pub wielandt_rate_displayed: f64,
    pub wielandt_rate_scaled: f64,
    pub proviso_failures: usize,
    /// `λ_i(S) ≥ λ_i(T)` held in every simulation.
    pub interlacing_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikedReport {
    pub config: SpikedConfig,
    pub rows: Vec<SpikedRow>,
}

struct SpikedSimulation {
    top: f64,
    max_gap: f64,
    min_gap: f64,
    displayed: Option<bool>,
    scaled: Option<bool>,
    bootstrap: Vec<f64>,
}

fn spiked_simulation(cfg: &SpikedConfig, n: usize, p: usize, s: usize) -> Result<SpikedSimulation> {
    let stream = RngStream::new(cfg.master_seed)
        .child(tag::SPIKED)
        .child(n as u64)
        .child(s as u64);
    let noise = (n as f64).powf(-cfg.alpha);
    let spikes = cfg.spikes();
    let q = cfg.q;
    let scales: Vec<f64> = (0..p)
        .map(|j| if j < q { spikes[j].sqrt() } else { noise.sqrt() })
        .collect();
    let mut r = stream.child(tag::DATA).rng();
    let mut data = vec![0.0; n * p];
    for row in data.chunks_exact_mut(p) {
        let d = cfg.law.sample_scale(&mut r);
        for (v, sc) in row.iter_mut().zip(&scales) {
            *v = d * sc * r.sample::<f64, _>(StandardNormal);
        }
    }
    let x = DataMatrix::from_row_major(n, p, &data)?;
    let opts = CovarianceOptions::UNCENTERED;
    let s_top = top_eigenvalues(&x, q, opts)?;
    let t_block = sample_covariance(&x.select_columns(0..q)?, opts)?;
    let t: SpectralSummary = matrix_spectrum(t_block.as_ref())?;
    let lambda_v = top_eigenvalues(&x.select_columns(q..p)?, 1, opts)?.largest() / noise;
    let diffs: Vec<f64> = (0..q).map(|i| s_top.eigenvalues[i] - t.eigenvalues[i]).collect();
    let max_gap = diffs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_gap = diffs.iter().copied().fold(f64::INFINITY, f64::min);
    let displayed = wielandt_gap_bound(&t, lambda_v, cfg.alpha, n, q).map(|b| max_gap <= b);
    let scaled = scaled_wielandt_gap_bound(&t, lambda_v, cfg.alpha, n, q).map(|b| max_gap <= b);
    let bootstrap = if cfg.replicates > 0 {
        let bcfg = BootstrapConfig::new(cfg.replicates, stream.child(tag::BOOTSTRAP));
        let d = bootstrap_statistic(&x, Statistic::TopEigenvalue, &bcfg, opts)?;
        let rn = (n as f64).sqrt();
        d.replicates.iter().map(|v| rn * (v - d.point_estimate)).collect()
    } else {
        Vec::new()
    };
    Ok(SpikedSimulation {
        top: s_top.largest(),
        max_gap,
        min_gap,
        displayed,
        scaled,
        bootstrap,
    })
}

/// Simulates the block spiked model on each `n` of the grid and reports the
/// approximation gap, bootstrap consistency and perturbation-bound metrics.
pub fn spiked_consistency_check(cfg: &SpikedConfig) -> Result<SpikedReport> {
    cfg.validate()?;
    let lambda1 = cfg.spikes()[0];
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let p = (cfg.ratio * n as f64).round() as usize;
        let sims: Vec<SpikedSimulation> = (0..cfg.nsim)
            .into_par_iter()
            .map(|s| spiked_simulation(cfg, n, p, s))
            .collect::<Result<_>>()?;
        let rn = (n as f64).sqrt();
        let gaps: Vec<f64> = sims.iter().map(|s| rn * s.max_gap).collect();
        let sampling: Vec<f64> = sims.iter().map(|s| rn * (s.top - lambda1)).collect();
        let (median_ks, pooled_ks) = if cfg.replicates > 0 {
            let per: Vec<f64> = sims.iter().map(|s| ks_two_sample(&s.bootstrap, &sampling)).collect();
            let pooled: Vec<f64> = sims.iter().flat_map(|s| s.bootstrap.iter().copied()).collect();
            (Some(median(&per)), Some(ks_two_sample(&pooled, &sampling)))
        } else {
            (None, None)
        };
        let rate = |pick: fn(&SpikedSimulation) -> Option<bool>| {
            let feasible: Vec<bool> = sims.iter().filter_map(pick).collect();
            if feasible.is_empty() {
                0.0
            } else {
                feasible.iter().filter(|&&b| b).count() as f64 / feasible.len() as f64
            }
        };
        let scale = sims.iter().map(|s| s.top).fold(0.0, f64::max);
        rows.push(SpikedRow {
            n,
            p,
            median_scaled_gap: median(&gaps),
            mean_scaled_gap: mean(&gaps),
            median_ks,
            pooled_ks,
            wielandt_rate_displayed: rate(|s| s.displayed),
            wielandt_rate_scaled: rate(|s| s.scaled),
            proviso_failures: sims.iter().filter(|s| s.scaled.is_none()).count(),
            interlacing_ok: sims.iter().all(|s| s.min_gap >= -1e-12 * scale),
        });
    }
    Ok(SpikedReport {
        config: cfg.clone(),
        rows,
    })
}
