use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported probability law, used for population spectra and
/// for weight distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

const MASS_TOL: f64 = 1e-12;

impl DiscreteLaw {
    /// `(location, mass)` pairs; masses must be positive and sum to one.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("a discrete law needs at least one atom"));
        }
        for &(x, w) in &atoms {
            if !x.is_finite() {
                return Err(Error::invalid(format!("non-finite atom location {x}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!("atom mass must be positive, got {w}")));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("atom masses sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(vec![(x, 1.0)])
    }

    /// Equal masses on the given values (an empirical distribution).
    pub fn empirical(values: &[f64]) -> Result<Self> {
        let m = 1.0 / values.len().max(1) as f64;
        Self::new(values.iter().map(|&v| (v, m)).collect())
    }

    /// `atoms` equal-mass points at the quantile midpoints `(j + ½)/atoms`
    /// of a continuous law.
    pub fn discretize(quantile: impl Fn(f64) -> f64, atoms: usize) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::invalid("need at least one atom"));
        }
        let values: Vec<f64> = (0..atoms).map(|j| quantile((j as f64 + 0.5) / atoms as f64)).collect();
        Self::empirical(&values)
    }

    /// Large-`n` limit of the scale law for multinomial bootstrap counts:
    /// atoms `√k` with Poisson(1) masses (covariance weight `k`).
    pub fn multinomial_limit() -> Self {
        let mut atoms = Vec::new();
        let mut mass = (-1.0f64).exp();
        let mut k = 0u32;
        while mass > 1e-20 {
            atoms.push((f64::from(k).sqrt(), mass));
            k += 1;
            mass /= f64::from(k);
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        for a in &mut atoms {
            a.1 /= total;
        }
        Self { atoms }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `∫ f dlaw`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * f(x)).sum()
    }
}

/// Neumaier summation, so that many small equal masses still total one.
fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() {
            (sum - t) + x
        } else {
            (x - t) + sum
        };
        sum = t;
    }
    sum + comp
}
