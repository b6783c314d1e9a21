//! Covariance formation and eigenvalue extraction.
//!
//! Eigenvalues of a covariance are obtained from the Gram matrix of the
//! (centred, possibly reweighted) data on its smaller side, i.e. as squared
//! singular values of the design over the divisor. Only the full spectrum
//! goes through a dense symmetric solver; top-k requests use Lanczos on the
//! implicit operator.

mod lanczos;
mod tridiag;

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension below which top-k requests go straight to the dense solver.
const DENSE_CUTOFF: usize = 48;

/// Relative PSD tolerance: eigenvalues within `PSD_TOL * trace` below zero
/// are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

/// An `n × p` matrix of observations (rows).
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: Mat<f64>,
}

impl DataMatrix {
    pub fn new(values: Mat<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::invalid(format!(
                "need at least 2 observations, got {}",
                values.nrows()
            )));
        }
        if values.ncols() < 1 {
            return Err(Error::invalid("dimension p must be at least 1"));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::LengthMismatch {
                expected: p,
                got: bad.len(),
            });
        }
        Self::new(Mat::from_fn(n, p, |i, j| rows[i][j]))
    }

    /// Row-major buffer of length `n * p`.
    pub fn from_row_major(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::LengthMismatch {
                expected: n * p,
                got: data.len(),
            });
        }
        Self::new(Mat::from_fn(n, p, |i, j| data[i * p + j]))
    }

    pub(crate) fn from_mat_unchecked(values: Mat<f64>) -> Self {
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.values.as_ref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[(row, col)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.p()).map(|j| self.values[(i, j)]).collect()
    }

    /// Sub-matrix made of the given columns (used for block diagnostics).
    pub fn select_columns(&self, cols: std::ops::Range<usize>) -> Result<Self> {
        let v = self.values.as_ref().subcols(cols.start, cols.end - cols.start);
        Self::new(v.to_owned())
    }

    /// Rows repeated according to integer counts: the explicit resample.
    pub fn resample_rows(&self, counts: &[u32]) -> Result<Self> {
        if counts.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: counts.len(),
            });
        }
        let idx: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i, c as usize))
            .collect();
        Self::new(Mat::from_fn(idx.len(), self.p(), |i, j| self.values[(idx[i], j)]))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(Mat::from_fn(self.n(), self.p(), |i, j| c * self.values[(i, j)]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Divisor {
    #[default]
    NMinus1,
    N,
}

impl Divisor {
    pub fn value(self, n: usize) -> f64 {
        match self {
            Divisor::NMinus1 => (n - 1) as f64,
            Divisor::N => n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovarianceOptions {
    pub center: bool,
    pub divisor: Divisor,
}

impl CovarianceOptions {
    /// `1/(n-1) (X - X̄)ᵀ(X - X̄)`, the estimator studied by the simulations.
    pub const SAMPLE: Self = Self {
        center: true,
        divisor: Divisor::NMinus1,
    };
    /// `1/n XᵀX`, the uncentred form used by the theory-facing checks.
    pub const UNCENTERED: Self = Self {
        center: false,
        divisor: Divisor::N,
    };
}

impl Default for CovarianceOptions {
    fn default() -> Self {
        Self::SAMPLE
    }
}

/// Leading eigenvalues of a covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    /// Trace of the covariance matrix.
    pub trace: f64,
    /// Dimension `p` of the covariance.
    pub dim: usize,
}

impl SpectralSummary {
    /// Summary of an explicit list of eigenvalues, treated as complete.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("empty spectrum"));
        }
        if let Some(i) = eigenvalues.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let trace = eigenvalues.iter().sum();
        let n = eigenvalues.len();
        Ok(Self {
            eigenvalues,
            k: n,
            trace,
            dim: n,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.k == self.dim
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Rows `√w_i (x_i − c)` whose Gram matrix over `divisor` is the covariance.
pub(crate) struct Design {
    y: Mat<f64>,
    divisor: f64,
    dim: usize,
    trace: f64,
}

fn validate_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { row: index, col: 0 });
        }
        if value < 0.0 {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    Ok(())
}

impl Design {
    pub(crate) fn new(x: &DataMatrix, weights: Option<&[f64]>, opts: CovarianceOptions) -> Result<Self> {
        let (n, p) = (x.n(), x.p());
        let xm = x.as_mat();
        if let Some(w) = weights {
            validate_weights(w, n)?;
        }
        let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
        let rows: Vec<usize> = (0..n).filter(|&i| weight(i) > 0.0).collect();

        let mut center = vec![0.0; p];
        if opts.center {
            let total: f64 = rows.iter().map(|&i| weight(i)).sum();
            if total > 0.0 {
                for (j, c) in center.iter_mut().enumerate() {
                    let s: f64 = rows.iter().map(|&i| weight(i) * xm[(i, j)]).sum();
                    *c = s / total;
                }
            }
        }
        let scale: Vec<f64> = rows.iter().map(|&i| weight(i).sqrt()).collect();
        let y = Mat::from_fn(rows.len(), p, |r, j| scale[r] * (xm[(rows[r], j)] - center[j]));
        let divisor = opts.divisor.value(n);
        let trace = y.squared_norm_l2() / divisor;
        Ok(Self {
            y,
            divisor,
            dim: p,
            trace,
        })
    }

    fn rank_bound(&self) -> usize {
        self.y.nrows().min(self.y.ncols())
    }

    /// Eigenvalues of the Gram matrix on the smaller side, descending.
    fn dense_gram_eigenvalues(&self) -> Result<Vec<f64>> {
        let y = self.y.as_ref();
        let gram = if y.ncols() <= y.nrows() {
            y.transpose() * y
        } else {
            y * y.transpose()
        };
        let mut ev = gram
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Linalg(format!("{e:?}")))?;
        ev.reverse();
        Ok(ev)
    }

    fn finish(&self, mut raw: Vec<f64>, k: usize) -> SpectralSummary {
        raw.resize(k, 0.0);
        let floor = PSD_TOL * self.trace;
        for v in &mut raw {
            *v /= self.divisor;
            if *v < 0.0 && *v >= -floor {
                *v = 0.0;
            }
        }
        // stable: equal values keep their index order
        raw.sort_by(|a, b| b.total_cmp(a));
        SpectralSummary {
            eigenvalues: raw,
            k,
            trace: self.trace,
            dim: self.dim,
        }
    }

    pub(crate) fn top(&self, k: usize) -> Result<SpectralSummary> {
        let m = self.rank_bound();
        let kk = k.min(m);
        if kk == 0 {
            return Ok(self.finish(Vec::new(), k));
        }
        if m <= DENSE_CUTOFF || 4 * kk > m {
            let mut ev = self.dense_gram_eigenvalues()?;
            ev.truncate(kk);
            return Ok(self.finish(ev, k));
        }
        let scale = self.trace * self.divisor;
        match lanczos::top_gram_eigenvalues(self.y.as_ref(), kk, scale)? {
            lanczos::Outcome::Converged(ev) => Ok(self.finish(ev, k)),
            lanczos::Outcome::Breakdown => {
                let mut ev = self.dense_gram_eigenvalues()?;
                ev.truncate(kk);
                Ok(self.finish(ev, k))
            }
        }
    }

    pub(crate) fn full(&self) -> Result<SpectralSummary> {
        let ev = if self.rank_bound() == 0 {
            Vec::new()
        } else {
            self.dense_gram_eigenvalues()?
        };
        Ok(self.finish(ev, self.dim))
    }
}

fn symmetrize(mut m: Mat<f64>) -> Mat<f64> {
    let p = m.nrows();
    for j in 0..p {
        for i in (j + 1)..p {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `p × p` covariance of the rows of `x`.
pub fn sample_covariance(x: &DataMatrix, opts: CovarianceOptions) -> Result<Mat<f64>> {
    let d = Design::new(x, None, opts)?;
    let y = d.y.as_ref();
    let c = (y.transpose() * y) / d.divisor;
    Ok(symmetrize(c))
}

/// `(1/n) Σ w_i x_i x_iᵀ`, uncentred.
pub fn weighted_covariance(x: &DataMatrix, weights: &[f64]) -> Result<Mat<f64>> {
    validate_weights(weights, x.n())?;
    let n = x.n() as f64;
    let xm = x.as_mat();
    // w_i / n is applied to one factor only so that w = n e_j reproduces
    // x_j x_jᵀ without rounding
    let scaled = Mat::from_fn(x.n(), x.p(), |i, j| (weights[i] / n) * xm[(i, j)]);
    Ok(symmetrize(xm.transpose() * &scaled))
}

/// Largest `k` eigenvalues of the covariance of `x`.
pub fn top_eigenvalues(x: &DataMatrix, k: usize, opts: CovarianceOptions) -> Result<SpectralSummary> {
    let max = x.n().min(x.p());
    if k == 0 || k > max {
        return Err(Error::KOutOfRange { k, max });
    }
    Design::new(x, None, opts)?.top(k)
}

/// All `p` eigenvalues of the covariance of `x`.
pub fn full_spectrum(x: &DataMatrix, opts: CovarianceOptions) -> Result<SpectralSummary> {
    Design::new(x, None, opts)?.full()
}

/// Largest `k` eigenvalues of the reweighted covariance
/// `(1/divisor) Σ w_i (x_i − x̄_w)(x_i − x̄_w)ᵀ`, with `x̄_w` the weighted
/// mean when centring and zero otherwise. Integer weights reproduce the
/// explicit row resample.
pub fn weighted_top_eigenvalues(
    x: &DataMatrix,
    weights: &[f64],
    k: usize,
    opts: CovarianceOptions,
) -> Result<SpectralSummary> {
    if k == 0 || k > x.p() {
        return Err(Error::KOutOfRange { k, max: x.p() });
    }
    Design::new(x, Some(weights), opts)?.top(k)
}

pub fn weighted_full_spectrum(x: &DataMatrix, weights: &[f64], opts: CovarianceOptions) -> Result<SpectralSummary> {
    Design::new(x, Some(weights), opts)?.full()
}

/// Descending eigenvalues of a symmetric matrix via a dense solver.
pub fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid("matrix must be square"));
    }
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("{e:?}")))?;
    ev.reverse();
    Ok(ev)
}

/// Complete spectral summary of an explicit symmetric matrix.
pub fn matrix_spectrum(m: MatRef<'_, f64>) -> Result<SpectralSummary> {
    let ev = symmetric_eigenvalues(m)?;
    let trace = (0..m.nrows()).map(|i| m[(i, i)]).sum();
    let p = ev.len();
    Ok(SpectralSummary {
        eigenvalues: ev,
        k: p,
        trace,
        dim: p,
    })
}

/// Smallest admissible imaginary part for spectral arguments.
pub const MIN_IMAG: f64 = 1e-4;

pub(crate) fn check_upper_half_plane(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::BadSpectralArgument { got: z.im, min: 0.0 });
    }
    Ok(())
}

/// `m_p(z) = (1/p) Σ 1/(λ_i − z)` of a complete spectrum.
pub fn empirical_stieltjes(spectrum: &SpectralSummary, z: Complex64) -> Result<Complex64> {
    check_upper_half_plane(z)?;
    if !spectrum.is_complete() || spectrum.eigenvalues.len() != spectrum.dim {
        return Err(Error::invalid(format!(
            "Stieltjes transform needs the complete spectrum ({} of {} eigenvalues)",
            spectrum.eigenvalues.len(),
            spectrum.dim
        )));
    }
    let sum: Complex64 = spectrum
        .eigenvalues
        .iter()
        .map(|&l| (Complex64::new(l, 0.0) - z).inv())
        .sum();
    Ok(sum / spectrum.dim as f64)
}

#[cfg(test)]
mod tests;
