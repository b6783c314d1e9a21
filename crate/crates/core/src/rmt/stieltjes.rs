use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DiscreteLaw;
use crate::error::{Error, Result};
use crate::spectral::MIN_IMAG;

/// Fixed-point iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on `|x − G(x)|` at the returned point.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight `θ` of the damped step `x ← (1 − θ) x + θ G(x)`.
    pub damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesSolution {
    pub z: Complex64,
    /// Companion transform `v_F` for [`mp_stieltjes`]; `m` for
    /// [`weighted_stieltjes`].
    pub value: Complex64,
    pub gamma: Option<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

/// `m = (v + (1 − r)/z) / r`, inverting `v = (1 − r)(−1/z) + r m`.
pub fn companion_to_stieltjes(v: Complex64, z: Complex64, r: f64) -> Complex64 {
    (v + (1.0 - r) / z) / r
}

fn check_arguments(z: Complex64, r: f64) -> Result<()> {
    if !(z.im >= MIN_IMAG) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::BadSpectralArgument {
            got: z.im,
            min: MIN_IMAG,
        });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("aspect ratio must be positive, got {r}")));
    }
    Ok(())
}

/// Solves `x = G(x)` in the upper half plane.
///
/// Each step evaluates the damped fixed-point update and a Newton candidate
/// `x − (x − G(x)) / (1 − G'(x))`, keeping the Newton point only when it
/// stays in ℂ⁺ and lowers the residual. Both updates share their fixed
/// points; Newton only shortens the slow approach near the real axis.
fn solve(
    start: Complex64,
    opts: &SolverOptions,
    map: impl Fn(Complex64) -> (Complex64, Complex64),
) -> Result<(Complex64, usize, f64)> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 || !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::invalid(
            "solver needs tol > 0, max_iter > 0 and damping in (0, 1]",
        ));
    }
    let mut x = start;
    let (mut g, mut dg) = map(x);
    let mut residual = (x - g).norm();
    for it in 1..=opts.max_iter {
        if residual <= opts.tol {
            return Ok((x, it - 1, residual));
        }
        let newton = x - (x - g) / (1.0 - dg);
        let mut accepted = false;
        if newton.im > 0.0 && newton.re.is_finite() && newton.im.is_finite() {
            let (gn, dgn) = map(newton);
            let rn = (newton - gn).norm();
            if rn < residual {
                (x, g, dg, residual) = (newton, gn, dgn, rn);
                accepted = true;
            }
        }
        if !accepted {
            x = (1.0 - opts.damping) * x + opts.damping * g;
            (g, dg) = map(x);
            residual = (x - g).norm();
        }
    }
    if residual <= opts.tol {
        return Ok((x, opts.max_iter, residual));
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

fn herglotz(name: &str, z: Complex64, value: Complex64) -> Result<()> {
    if value.im > 0.0 {
        Ok(())
    } else {
        Err(Error::HerglotzViolation(format!("{name}({z}) = {value}")))
    }
}

/// Companion Stieltjes transform `v_F(z)` of the limiting spectral law of a
/// sample covariance with population spectral law `h` and `p/n → r`:
/// `−1/v = z − r ∫ λ dH(λ) / (1 + λ v)`.
pub fn mp_stieltjes(z: Complex64, h: &DiscreteLaw, r: f64, opts: SolverOptions) -> Result<StieltjesSolution> {
    check_arguments(z, r)?;
    let map = |v: Complex64| {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for &(tau, mass) in h.atoms() {
            let d = 1.0 + tau * v;
            s += mass * tau / d;
            ds += mass * tau * tau / (d * d);
        }
        let denom = z - r * s;
        // G = −1/D, G' = D'/D² with D' = r Σ τ² h / (1 + τ v)²
        (-1.0 / denom, r * ds / (denom * denom))
    };
    let (v, iterations, residual) = solve(-1.0 / z, &opts, map)?;
    herglotz("v_F", z, v)?;
    Ok(StieltjesSolution {
        z,
        value: v,
        gamma: None,
        iterations,
        residual,
    })
}

/// Stieltjes transform `m(z)` of the limiting spectral law of
/// `(1/n) Σ w_i² X_i X_iᵀ` with weight scales `w_i ~ nu`, solving
///
/// `ψ(γ) = ∫ w² / (1 + r w² γ) dν(w)`,
/// `γ = ∫ τ dH(τ) / (τ ψ(γ) − z)`, `m = ∫ dH(τ) / (τ ψ(γ) − z)`.
pub fn weighted_stieltjes(
    z: Complex64,
    h: &DiscreteLaw,
    nu: &DiscreteLaw,
    r: f64,
    opts: SolverOptions,
) -> Result<StieltjesSolution> {
    check_arguments(z, r)?;
    if let Some(&(w, _)) = nu.atoms().iter().find(|a| a.0 < 0.0) {
        return Err(Error::invalid(format!("weight atoms must be non-negative, got {w}")));
    }
    let psi = |gamma: Complex64| {
        let mut s = Complex64::new(0.0, 0.0);
        let mut ds = Complex64::new(0.0, 0.0);
        for &(w, mass) in nu.atoms() {
            let w2 = w * w;
            let d = 1.0 + r * w2 * gamma;
            s += mass * w2 / d;
            ds -= mass * r * w2 * w2 / (d * d);
        }
        (s, ds)
    };
    let map = |gamma: Complex64| {
        let (ps, dps) = psi(gamma);
        let mut g = Complex64::new(0.0, 0.0);
        let mut dg = Complex64::new(0.0, 0.0);
        for &(tau, mass) in h.atoms() {
            let d = tau * ps - z;
            g += mass * tau / d;
            dg -= mass * tau * tau * dps / (d * d);
        }
        (g, dg)
    };
    let (gamma, iterations, residual) = solve(-1.0 / z, &opts, map)?;
    let (ps, _) = psi(gamma);
    let m: Complex64 = h.atoms().iter().map(|&(tau, mass)| mass / (tau * ps - z)).sum();
    herglotz("gamma", z, gamma)?;
    herglotz("m", z, m)?;
    Ok(StieltjesSolution {
        z,
        value: m,
        gamma: Some(gamma),
        iterations,
        residual,
    })
}
