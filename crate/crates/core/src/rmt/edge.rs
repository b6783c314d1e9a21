use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `((1 − √r)², (1 + √r)²)`.
pub fn mp_support(r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid(format!("aspect ratio must lie in (0, 1), got {r}")));
    }
    let s = r.sqrt();
    Ok(((1.0 - s).powi(2), (1.0 + s).powi(2)))
}

/// Marchenko–Pastur density `√((r₊ − x)(x − r₋)) / (2π r x)`, zero outside
/// the support.
pub fn mp_density(x: f64, r: f64) -> Result<f64> {
    let (lo, hi) = mp_support(r)?;
    if x <= lo || x >= hi {
        return Ok(0.0);
    }
    Ok(((hi - x) * (x - lo)).sqrt() / (2.0 * std::f64::consts::PI * r * x))
}

/// Gaussian BBP threshold `1 + √r`.
pub fn phase_transition(r: f64) -> f64 {
    1.0 + r.sqrt()
}

/// Centering and scaling of the largest null eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub mu_np: f64,
    pub sigma_np: f64,
}

/// `μ = (1 + √(p/n))²`, `σ = (1 + √(p/n))(1 + √(n/p))^{1/3}`.
pub fn johnstone_params(n: usize, p: usize) -> Result<EdgeParams> {
    if n == 0 || p == 0 {
        return Err(Error::invalid("n and p must be positive"));
    }
    let s = (p as f64 / n as f64).sqrt();
    Ok(EdgeParams {
        mu_np: (1.0 + s).powi(2),
        sigma_np: (1.0 + s) * (1.0 + 1.0 / s).cbrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeRegime {
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeParams {
    /// `η = (λ₁ − 1)/√(p/n)`.
    pub eta: f64,
    pub regime: SpikeRegime,
    /// `λ₁(1 + √(p/n)/η)`, the almost-sure limit of the top sample eigenvalue.
    pub mu_eta: Option<f64>,
    /// `λ₁ √(1 − η⁻²)`, its `√n`-scale standard deviation.
    pub sigma_eta: Option<f64>,
}

/// Spike parameters for `λ₁(Σ) = 1 + η √(p/n)`.
pub fn bbp_params(lambda1: f64, n: usize, p: usize) -> Result<SpikeParams> {
    if n == 0 || p == 0 {
        return Err(Error::invalid("n and p must be positive"));
    }
    if !(lambda1 > 1.0) || !lambda1.is_finite() {
        return Err(Error::invalid(format!("spike must exceed 1, got {lambda1}")));
    }
    let s = (p as f64 / n as f64).sqrt();
    let eta = (lambda1 - 1.0) / s;
    if eta > 1.0 {
        Ok(SpikeParams {
            eta,
            regime: SpikeRegime::Supercritical,
            mu_eta: Some(lambda1 * (1.0 + s / eta)),
            sigma_eta: Some(lambda1 * (1.0 - eta.powi(-2)).sqrt()),
        })
    } else {
        Ok(SpikeParams {
            eta,
            regime: SpikeRegime::Subcritical,
            mu_eta: None,
            sigma_eta: None,
        })
    }
}

/// Marchenko–Pastur distribution function.
///
/// With `x = r₋ + (r₊ − r₋)(1 − cos φ)/2` the integrand becomes the smooth
/// `((r₊ − r₋)/2)² sin² φ / (2π r x)`, integrated by composite Simpson.
pub fn mp_cdf(x: f64, r: f64) -> Result<f64> {
    let (lo, hi) = mp_support(r)?;
    if x <= lo {
        return Ok(0.0);
    }
    if x >= hi {
        return Ok(1.0);
    }
    let half = 0.5 * (hi - lo);
    let phi_end = (1.0 - (x - lo) / half).clamp(-1.0, 1.0).acos();
    let g = |phi: f64| {
        let s = phi.sin();
        half * half * s * s / (2.0 * std::f64::consts::PI * r * (lo + half * (1.0 - phi.cos())))
    };
    const STEPS: usize = 2048;
    let h = phi_end / STEPS as f64;
    let mut acc = g(0.0) + g(phi_end);
    for i in 1..STEPS {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    Ok((acc * h / 3.0).clamp(0.0, 1.0))
}
