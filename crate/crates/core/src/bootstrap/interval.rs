use serde::{Deserialize, Serialize};

use super::{variance_estimate, BootstrapDistribution};
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, std_normal_cdf, std_normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    /// Empirical quantiles of the replicates.
    Percentile,
    /// `θ̂ ± z · sd*`.
    Normal,
    /// Efron's bias-corrected percentile interval (no acceleration).
    BiasCorrected,
}

impl IntervalMethod {
    pub const ALL: [IntervalMethod; 3] = [
        IntervalMethod::Percentile,
        IntervalMethod::Normal,
        IntervalMethod::BiasCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IntervalMethod::Percentile => "percentile",
            IntervalMethod::Normal => "normal",
            IntervalMethod::BiasCorrected => "bc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub method: IntervalMethod,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    /// Bias correction was impossible (all replicates on one side of the
    /// point estimate) and the percentile interval was returned instead.
    pub fell_back: bool,
}

impl IntervalResult {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Two-sided interval at confidence `level`; percentiles use type-7 quantiles.
pub fn confidence_interval(dist: &BootstrapDistribution, method: IntervalMethod, level: f64) -> Result<IntervalResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if dist.len() < 2 {
        return Err(Error::TooFewReplicates {
            got: dist.len(),
            min: 2,
        });
    }
    let alpha = 1.0 - level;
    let mut sorted = dist.replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let percentile = |lo: f64, hi: f64| (quantile_sorted(&sorted, lo), quantile_sorted(&sorted, hi));

    let (lower, upper, fell_back) = match method {
        IntervalMethod::Percentile => {
            let (l, u) = percentile(alpha / 2.0, 1.0 - alpha / 2.0);
            (l, u, false)
        }
        IntervalMethod::Normal => {
            let half = std_normal_quantile(1.0 - alpha / 2.0) * variance_estimate(dist)?.sqrt();
            (dist.point_estimate - half, dist.point_estimate + half, false)
        }
        IntervalMethod::BiasCorrected => {
            let below = sorted.iter().filter(|&&v| v < dist.point_estimate).count();
            let frac = below as f64 / sorted.len() as f64;
            if below == 0 || below == sorted.len() {
                let (l, u) = percentile(alpha / 2.0, 1.0 - alpha / 2.0);
                (l, u, true)
            } else {
                let z0 = std_normal_quantile(frac);
                let z = std_normal_quantile(1.0 - alpha / 2.0);
                let (l, u) = percentile(std_normal_cdf(2.0 * z0 - z), std_normal_cdf(2.0 * z0 + z));
                (l, u, false)
            }
        }
    };
    Ok(IntervalResult {
        method,
        level,
        lower,
        upper,
        fell_back,
    })
}
