//! Spiked population models and Gaussian / elliptical data generation.

use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{tag, RngStream};
use crate::spectral::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Identity,
    #[default]
    RandomOrthogonal,
}

/// Population covariance with spectrum `{lambda1, bulk, …, bulk}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub p: usize,
    pub lambda1: f64,
    pub bulk: f64,
    pub basis: Basis,
}

impl CovarianceModel {
    pub fn new(p: usize, lambda1: f64, basis: Basis) -> Result<Self> {
        let m = Self {
            p,
            lambda1,
            bulk: 1.0,
            basis,
        };
        m.validate()?;
        Ok(m)
    }

    /// `λ₁ = 1 + c √r` over a unit bulk.
    pub fn spiked(p: usize, ratio: f64, multiplier: f64, basis: Basis) -> Result<Self> {
        Self::new(p, 1.0 + multiplier * ratio.sqrt(), basis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::invalid("p must be positive"));
        }
        if !(self.bulk > 0.0) || !self.bulk.is_finite() {
            return Err(Error::invalid(format!(
                "bulk eigenvalue must be positive, got {}",
                self.bulk
            )));
        }
        if !(self.lambda1 >= self.bulk) || !self.lambda1.is_finite() {
            return Err(Error::invalid(format!(
                "lambda1 = {} must be finite and at least the bulk value {}",
                self.lambda1, self.bulk
            )));
        }
        Ok(())
    }

    pub fn population_spectrum(&self) -> Vec<f64> {
        let mut v = vec![self.bulk; self.p];
        v[0] = self.lambda1;
        v
    }
}

/// Distribution of the scale `D` in `X_i = D_i Z_i`. Every law has `E[D²] = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EllipticalLaw {
    #[default]
    Gaussian,
    /// `|N(0, 1)|`.
    EllipNormal,
    /// Uniform on `[1/2, (√3 √(15/4))/2 − 1/4]`, rescaled to unit second moment.
    EllipUniform,
    /// Exponential with rate `√2`.
    EllipExp,
}

const UNIFORM_LO: f64 = 0.5;

fn uniform_hi() -> f64 {
    3f64.sqrt() * (4.0f64 - 0.25).sqrt() / 2.0 - 0.25
}

fn uniform_rescale() -> f64 {
    let (a, b) = (UNIFORM_LO, uniform_hi());
    let second_moment = (a * a + a * b + b * b) / 3.0;
    1.0 / second_moment.sqrt()
}

impl EllipticalLaw {
    pub const ALL: [EllipticalLaw; 4] = [
        EllipticalLaw::Gaussian,
        EllipticalLaw::EllipNormal,
        EllipticalLaw::EllipUniform,
        EllipticalLaw::EllipExp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EllipticalLaw::Gaussian => "gaussian",
            EllipticalLaw::EllipNormal => "ellip_normal",
            EllipticalLaw::EllipUniform => "ellip_uniform",
            EllipticalLaw::EllipExp => "ellip_exp",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == s)
    }

    /// Analytic `E[D²]`.
    pub fn scale_second_moment(self) -> f64 {
        match self {
            EllipticalLaw::Gaussian | EllipticalLaw::EllipNormal => 1.0,
            EllipticalLaw::EllipUniform => {
                let (a, b) = (UNIFORM_LO, uniform_hi());
                uniform_rescale().powi(2) * (a * a + a * b + b * b) / 3.0
            }
            // Exp(rate): E[D²] = 2 / rate²
            EllipticalLaw::EllipExp => 2.0 / (std::f64::consts::SQRT_2 * std::f64::consts::SQRT_2),
        }
    }

    pub fn sample_scale<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            EllipticalLaw::Gaussian => 1.0,
            EllipticalLaw::EllipNormal => rng.sample::<f64, _>(StandardNormal).abs(),
            EllipticalLaw::EllipUniform => uniform_rescale() * rng.random_range(UNIFORM_LO..uniform_hi()),
            EllipticalLaw::EllipExp => Exp::new(std::f64::consts::SQRT_2).expect("positive rate").sample(rng),
        }
    }
}

/// Symmetric square root `A = V Λ^{1/2} Vᵀ` of a spiked covariance.
///
/// With a unit bulk only the spike direction `v` matters:
/// `A = √bulk · I + (√λ₁ − √bulk) v vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaFactor {
    direction: Vec<f64>,
    sqrt_spike: f64,
    sqrt_bulk: f64,
}

impl SigmaFactor {
    pub fn p(&self) -> usize {
        self.direction.len()
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn matrix(&self) -> Mat<f64> {
        let v = &self.direction;
        let extra = self.sqrt_spike - self.sqrt_bulk;
        Mat::from_fn(self.p(), self.p(), |i, j| {
            let diag = if i == j { self.sqrt_bulk } else { 0.0 };
            diag + extra * v[i] * v[j]
        })
    }

    /// `z ← A z`.
    pub fn apply(&self, z: &mut [f64]) {
        let extra = self.sqrt_spike - self.sqrt_bulk;
        let proj: f64 = self.direction.iter().zip(z.iter()).map(|(a, b)| a * b).sum();
        for (zi, vi) in z.iter_mut().zip(&self.direction) {
            *zi = self.sqrt_bulk * *zi + extra * proj * vi;
        }
    }
}

/// Square-root factor of the model covariance.
///
/// For a random basis the spike direction is uniform on the sphere, which is
/// the law of the leading right singular vector of a Gaussian matrix.
pub fn build_sigma_factor(model: &CovarianceModel, rng: &RngStream) -> Result<SigmaFactor> {
    model.validate()?;
    let p = model.p;
    let direction = match model.basis {
        Basis::Identity => {
            let mut v = vec![0.0; p];
            v[0] = 1.0;
            v
        }
        Basis::RandomOrthogonal => {
            let mut r = rng.child(tag::BASIS).rng();
            loop {
                let g: Vec<f64> = (0..p).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break g.into_iter().map(|x| x / norm).collect();
                }
            }
        }
    };
    Ok(SigmaFactor {
        direction,
        sqrt_spike: model.lambda1.sqrt(),
        sqrt_bulk: model.bulk.sqrt(),
    })
}

/// `n` rows `X_i = D_i A Z_i` with `Z_i ~ N(0, I_p)` and `D_i` from `law`.
pub fn generate_with_factor(factor: &SigmaFactor, law: EllipticalLaw, n: usize, rng: &RngStream) -> Result<DataMatrix> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let p = factor.p();
    let mut r = rng.child(tag::DATA).rng();
    let mut data = vec![0.0; n * p];
    for row in data.chunks_exact_mut(p) {
        let d = law.sample_scale(&mut r);
        for z in row.iter_mut() {
            *z = r.sample(StandardNormal);
        }
        factor.apply(row);
        for z in row.iter_mut() {
            *z *= d;
        }
    }
    Ok(DataMatrix::from_mat_unchecked(Mat::from_fn(n, p, |i, j| {
        data[i * p + j]
    })))
}

/// Draws a factor for `model` from `rng` and generates `n` rows from it.
pub fn generate_dataset(model: &CovarianceModel, law: EllipticalLaw, n: usize, rng: &RngStream) -> Result<DataMatrix> {
    let factor = build_sigma_factor(model, rng)?;
    generate_with_factor(&factor, law, n, rng)
}
