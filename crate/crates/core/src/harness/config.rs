use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bootstrap::Statistic;
use crate::datagen::{Basis, EllipticalLaw};
use crate::error::{Error, Result};
use crate::spectral::{CovarianceOptions, Divisor};

/// Spike multipliers `c` in `λ₁ = 1 + c √r` of the full-scale study.
pub const PAPER_SPIKE_MULTIPLIERS: [f64; 10] = [0.0, 0.9, 1.1, 1.5, 2.0, 3.0, 6.0, 11.0, 50.0, 100.0];
/// Aspect ratios `r = p/n` of the full-scale study.
pub const PAPER_RATIOS: [f64; 4] = [0.01, 0.1, 0.3, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `n = 500`, 200 simulations, `B = 199`: minutes on a laptop.
    Desk,
    /// `n = 1000`, 1000 simulations, `B = 999`: hours.
    Paper,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::invalid(format!(
                "unknown preset '{other}' (expected desk or paper)"
            ))),
        }
    }
}

/// Monte-Carlo study over a grid of `(r, c)` cells for one data law.
///
/// Mirrors the JSON config file field for field; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub ratios: Vec<f64>,
    pub spike_multipliers: Vec<f64>,
    #[serde(default)]
    pub law: EllipticalLaw,
    pub nsim: usize,
    /// Bootstrap replicates per simulation.
    #[serde(rename = "B")]
    pub replicates: usize,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<Statistic>,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    pub master_seed: u64,
    #[serde(default = "default_true")]
    pub center: bool,
    #[serde(default)]
    pub divisor: Divisor,
    #[serde(default)]
    pub basis: Basis,
    /// Draw a fresh spike direction for each simulation instead of once per cell.
    #[serde(default)]
    pub redraw_basis_per_simulation: bool,
    /// Re-centre each bootstrap resample at its own mean. When false the
    /// data are centred once at the original mean and resampled as is.
    #[serde(default = "default_true")]
    pub recenter_bootstrap: bool,
    /// Simulations per cell whose bootstrap replicates are kept for density plots.
    #[serde(default = "default_density_simulations")]
    pub density_simulations: usize,
    /// When set, true bias and variance come from this many independent
    /// simulations instead of the bootstrapped ones.
    #[serde(default)]
    pub truth_simulations: Option<usize>,
}

fn default_statistics() -> Vec<Statistic> {
    vec![Statistic::TopEigenvalue]
}

fn default_ci_level() -> f64 {
    0.95
}

fn default_true() -> bool {
    true
}

fn default_density_simulations() -> usize {
    20
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let (n, nsim, replicates) = match preset {
            Preset::Desk => (500, 200, 199),
            Preset::Paper => (1000, 1000, crate::bootstrap::DEFAULT_REPLICATES),
        };
        Self {
            n,
            ratios: PAPER_RATIOS.to_vec(),
            spike_multipliers: PAPER_SPIKE_MULTIPLIERS.to_vec(),
            law: EllipticalLaw::Gaussian,
            nsim,
            replicates,
            statistics: default_statistics(),
            ci_level: default_ci_level(),
            master_seed: 20_091_207,
            center: true,
            divisor: Divisor::NMinus1,
            basis: Basis::RandomOrthogonal,
            redraw_basis_per_simulation: false,
            recenter_bootstrap: true,
            density_simulations: default_density_simulations(),
            truth_simulations: None,
        }
    }

    /// `p = round(r n)`.
    pub fn dimension(&self, ratio: f64) -> usize {
        (ratio * self.n as f64).round() as usize
    }

    pub fn covariance_options(&self) -> CovarianceOptions {
        CovarianceOptions {
            center: self.center,
            divisor: self.divisor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("n must be at least 2, got {}", self.n)));
        }
        if self.nsim == 0 {
            return Err(Error::invalid("nsim must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::TooFewReplicates { got: 0, min: 1 });
        }
        if self.ratios.is_empty() || self.spike_multipliers.is_empty() || self.statistics.is_empty() {
            return Err(Error::invalid(
                "ratios, spike_multipliers and statistics must be non-empty",
            ));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::invalid(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if let Some(&c) = self.spike_multipliers.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::invalid(format!(
                "spike multipliers must be finite and non-negative, got {c}"
            )));
        }
        let k = self
            .statistics
            .iter()
            .map(|s| s.eigenvalues_needed())
            .max()
            .unwrap_or(1);
        for &r in &self.ratios {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::invalid(format!("ratios must be positive, got {r}")));
            }
            let p = self.dimension(r);
            if p < k || self.n < k {
                return Err(Error::invalid(format!(
                    "r = {r} gives p = {p}, but the requested statistics need {k} eigenvalues"
                )));
            }
        }
        if self.truth_simulations == Some(0) {
            return Err(Error::invalid("truth_simulations must be positive when set"));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::parse("<config>", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Config echoed in a JSON summary written by [`super::write_summary_json`].
    pub fn from_summary_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("<summary>", e))?;
        let config = value
            .get("config")
            .ok_or_else(|| Error::parse("<summary>", "missing 'config' field"))?;
        let cfg: Self = serde_json::from_value(config.clone()).map_err(|e| Error::parse("<summary>", e))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
