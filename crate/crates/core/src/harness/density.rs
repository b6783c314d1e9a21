use crate::bootstrap::BootstrapDistribution;
use crate::error::{Error, Result};
use crate::stats::{quantile_sorted, sample_variance};

/// Evaluation grid for [`emit_density_data`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// `points` equally spaced values spanning every distribution, padded by
    /// four bandwidths on each side.
    Auto {
        points: usize,
    },
    Range {
        lo: f64,
        hi: f64,
        points: usize,
    },
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// `"N"` or `"LO:HI:N"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("grid must be N or LO:HI:N, got '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            [n] => GridSpec::Auto {
                points: n.trim().parse().map_err(|_| bad())?,
            },
            [lo, hi, n] => GridSpec::Range {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
                points: n.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        let points = match spec {
            GridSpec::Auto { points } | GridSpec::Range { points, .. } => points,
        };
        if points < 2 {
            return Err(Error::invalid("grid needs at least 2 points"));
        }
        if let GridSpec::Range { lo, hi, .. } = spec {
            if !(lo < hi) {
                return Err(Error::invalid(format!("grid needs LO < HI, got {lo}:{hi}")));
            }
        }
        Ok(spec)
    }
}

/// One output line: density of distribution `dist` at `x`, or a point-mass
/// marker (`x` = the common centred value, `density` = 1) when all
/// replicates are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub dist: usize,
    pub x: f64,
    pub density: f64,
    pub point_mass: bool,
}

/// Silverman's rule `0.9 · min(sd, IQR/1.34) · B^{−1/5}`; falls back to
/// `sd` when the IQR is zero. `None` for zero spread.
pub fn silverman_bandwidth(values: &[f64]) -> Option<f64> {
    let sd = sample_variance(values)?.sqrt();
    if !(sd > 0.0) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Some(0.9 * spread * (values.len() as f64).powf(-0.2))
}

fn gaussian_kde(values: &[f64], h: f64, x: f64) -> f64 {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    norm * values.iter().map(|v| (-0.5 * ((x - v) / h).powi(2)).exp()).sum::<f64>()
}

/// Gaussian-kernel densities of `θ̂*ᵇ − θ̂` for each distribution on one
/// shared grid, with Silverman bandwidths.
pub fn emit_density_data(dists: &[BootstrapDistribution], grid: GridSpec) -> Result<Vec<DensityRow>> {
    let centred: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| {
            if d.len() < 2 {
                Err(Error::TooFewReplicates { got: d.len(), min: 2 })
            } else {
                Ok(d.replicates.iter().map(|v| v - d.point_estimate).collect())
            }
        })
        .collect::<Result<_>>()?;
    let bandwidths: Vec<Option<f64>> = centred.iter().map(|c| silverman_bandwidth(c)).collect();

    let (lo, hi, points) = match grid {
        GridSpec::Range { lo, hi, points } => (lo, hi, points),
        GridSpec::Auto { points } => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (c, h) in centred.iter().zip(&bandwidths) {
                if let Some(h) = h {
                    for v in c {
                        lo = lo.min(v - 4.0 * h);
                        hi = hi.max(v + 4.0 * h);
                    }
                }
            }
            (lo, hi, points)
        }
    };
    let xs: Vec<f64> = if lo < hi {
        (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect()
    } else {
        Vec::new()
    };

    let mut rows = Vec::new();
    for (dist, (c, h)) in centred.iter().zip(&bandwidths).enumerate() {
        match h {
            Some(h) => rows.extend(xs.iter().map(|&x| DensityRow {
                dist,
                x,
                density: gaussian_kde(c, *h, x),
                point_mass: false,
            })),
            None => rows.push(DensityRow {
                dist,
                x: c[0],
                density: 1.0,
                point_mass: true,
            }),
        }
    }
    Ok(rows)
}
