//! Row-resampling bootstrap of spectral statistics.
//!
//! A replicate reweights the rows of `X` and recomputes the covariance
//! spectrum. Multinomial `Mult(n, 1/n)` counts are exactly the classical
//! resample-with-replacement bootstrap; i.i.d. mean-one weights give the
//! weighted (Bayesian-style) bootstrap.

mod interval;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::spectral::{top_eigenvalues, weighted_top_eigenvalues, CovarianceOptions, DataMatrix, SpectralSummary};

pub use interval::{confidence_interval, IntervalMethod, IntervalResult};

/// Replicate count used by the paper-scale runs.
pub const DEFAULT_REPLICATES: usize = 999;

/// Law of i.i.d. bootstrap weights; each has mean one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightLaw {
    /// `w ≡ 1`: every replicate reproduces the original data.
    Constant,
    /// Standard exponential.
    Exponential,
    /// Poisson(1), the large-`n` limit of multinomial counts.
    Poisson,
}

impl WeightLaw {
    fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            WeightLaw::Constant => 1.0,
            WeightLaw::Exponential => Exp1.sample(rng),
            WeightLaw::Poisson => Poisson::new(1.0).expect("positive rate").sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    #[default]
    Multinomial,
    Iid(WeightLaw),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    /// Number of replicates `B`.
    pub replicates: usize,
    pub scheme: WeightScheme,
    pub rng: RngStream,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, rng: RngStream) -> Self {
        Self {
            replicates,
            scheme: WeightScheme::Multinomial,
            rng,
        }
    }

    pub fn with_scheme(mut self, scheme: WeightScheme) -> Self {
        self.scheme = scheme;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::TooFewReplicates { got: 0, min: 1 });
        }
        Ok(())
    }

    /// Weights of replicate `b`, drawn from the stream `(rng, b)`.
    pub fn weights(&self, n: usize, b: usize) -> Vec<f64> {
        let stream = self.rng.child(b as u64);
        match self.scheme {
            WeightScheme::Multinomial => multinomial_weights(n, &stream).into_iter().map(f64::from).collect(),
            WeightScheme::Iid(law) => {
                let mut r = stream.rng();
                (0..n).map(|_| law.sample(&mut r)).collect()
            }
        }
    }
}

/// `Mult(n, 1/n)` counts: `n` uniform picks from `{0, …, n−1}`.
pub fn multinomial_weights(n: usize, rng: &RngStream) -> Vec<u32> {
    let mut r = rng.rng();
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[r.random_range(0..n)] += 1;
    }
    counts
}

/// Spectral statistic computed from the leading eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `λ₁`.
    #[serde(rename = "lambda1", alias = "top_eigenvalue")]
    TopEigenvalue,
    /// `λ₁ − λ₂`.
    Gap,
    /// `(λ₁ − λ₂) / (λ₂ − λ₃)`.
    GapRatio,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::TopEigenvalue, Statistic::Gap, Statistic::GapRatio];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::TopEigenvalue => "lambda1",
            Statistic::Gap => "gap",
            Statistic::GapRatio => "gap_ratio",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|st| st.name() == s)
    }

    /// Number of leading eigenvalues needed.
    pub fn eigenvalues_needed(self) -> usize {
        match self {
            Statistic::TopEigenvalue => 1,
            Statistic::Gap => 2,
            Statistic::GapRatio => 3,
        }
    }

    pub fn evaluate(self, s: &SpectralSummary) -> Result<f64> {
        match self {
            Statistic::TopEigenvalue => Ok(s.largest()),
            Statistic::Gap => gap_statistic(s),
            Statistic::GapRatio => gap_ratio(s),
        }
    }

    /// Value on a population spectrum; `None` when undefined (tied `λ₂ = λ₃`).
    pub fn population_value(self, spectrum: &[f64]) -> Option<f64> {
        let s = SpectralSummary::from_eigenvalues(spectrum.to_vec()).ok()?;
        self.evaluate(&s).ok()
    }
}

fn require_k(s: &SpectralSummary, k: usize) -> Result<()> {
    if s.k < k {
        return Err(Error::KOutOfRange { k, max: s.k });
    }
    Ok(())
}

/// `λ₁ − λ₂`.
pub fn gap_statistic(s: &SpectralSummary) -> Result<f64> {
    require_k(s, 2)?;
    Ok((s.eigenvalues[0] - s.eigenvalues[1]).max(0.0))
}

/// `(λ₁ − λ₂) / (λ₂ − λ₃)`; errors when `λ₂ = λ₃`.
pub fn gap_ratio(s: &SpectralSummary) -> Result<f64> {
    require_k(s, 3)?;
    let e = &s.eigenvalues;
    let denom = e[1] - e[2];
    if !(denom > 0.0) {
        return Err(Error::DegenerateSpectrum(format!(
            "gap ratio undefined: lambda2 = lambda3 = {}",
            e[1]
        )));
    }
    Ok((e[0] - e[1]).max(0.0) / denom)
}

/// Point estimate and bootstrap replicates of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    pub statistic_name: String,
    pub point_estimate: f64,
    pub replicates: Vec<f64>,
}

impl BootstrapDistribution {
    pub fn new(statistic_name: impl Into<String>, point_estimate: f64, replicates: Vec<f64>) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::TooFewReplicates { got: 0, min: 1 });
        }
        if let Some(i) = replicates.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        if !point_estimate.is_finite() {
            return Err(Error::invalid("non-finite point estimate"));
        }
        Ok(Self {
            statistic_name: statistic_name.into(),
            point_estimate,
            replicates,
        })
    }

    pub fn len(&self) -> usize {
        self.replicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicates.is_empty()
    }
}

/// Bootstraps one statistic. See [`bootstrap_statistics`].
pub fn bootstrap_statistic(
    x: &DataMatrix,
    stat: Statistic,
    cfg: &BootstrapConfig,
    opts: CovarianceOptions,
) -> Result<BootstrapDistribution> {
    Ok(bootstrap_statistics(x, &[stat], cfg, opts)?.remove(0))
}

/// Bootstraps several statistics on shared replicate weights.
///
/// Replicate `b` draws its weights from the stream `(cfg.rng, b)`, so the
/// result does not depend on how replicates are scheduled. With centring,
/// each replicate is re-centred at its own weighted mean.
pub fn bootstrap_statistics(
    x: &DataMatrix,
    stats: &[Statistic],
    cfg: &BootstrapConfig,
    opts: CovarianceOptions,
) -> Result<Vec<BootstrapDistribution>> {
    cfg.validate()?;
    if stats.is_empty() {
        return Err(Error::invalid("no statistics requested"));
    }
    let k = stats.iter().map(|s| s.eigenvalues_needed()).max().unwrap_or(1);
    let max_k = x.n().min(x.p());
    if k > max_k {
        return Err(Error::KOutOfRange { k, max: max_k });
    }
    let point_summary = top_eigenvalues(x, k, opts)?;
    let points = stats
        .iter()
        .map(|s| s.evaluate(&point_summary))
        .collect::<Result<Vec<_>>>()?;

    let per_replicate = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let w = cfg.weights(x.n(), b);
            let summary = weighted_top_eigenvalues(x, &w, k, opts)?;
            stats.iter().map(|s| s.evaluate(&summary)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    stats
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let reps = per_replicate.iter().map(|r| r[j]).collect();
            BootstrapDistribution::new(s.name(), points[j], reps)
        })
        .collect()
}

/// `mean(replicates) − point_estimate`.
pub fn bias_estimate(dist: &BootstrapDistribution) -> f64 {
    crate::stats::mean(&dist.replicates) - dist.point_estimate
}

/// Unbiased sample variance of the replicates; needs `B ≥ 2`.
pub fn variance_estimate(dist: &BootstrapDistribution) -> Result<f64> {
    crate::stats::sample_variance(&dist.replicates).ok_or(Error::TooFewReplicates {
        got: dist.len(),
        min: 2,
    })
}
