//! Top eigenvalues of a Gram operator `A = Yᵀ Y` (or `Y Yᵀ`) by Lanczos with
//! full reorthogonalisation, never forming `A`.

use faer::linalg::matmul::matmul;
use faer::reborrow::ReborrowMut;
use faer::{Accum, Col, Mat, MatRef, Par};

use super::tridiag::eigen_last_row;
use crate::error::Result;

/// Relative Ritz residual at which a value is accepted.
const RESIDUAL_TOL: f64 = 1e-12;
/// With a Ritz gap `δ`, the eigenvalue error is about `ρ² / δ`; a value is
/// also accepted once that estimate is below `EIGEN_TOL` relative, provided
/// the residual itself is below `GAP_RESIDUAL_TOL` relative.
const EIGEN_TOL: f64 = 1e-15;
const GAP_RESIDUAL_TOL: f64 = 1e-7;

/// What the caller should do when Lanczos cannot certify the answer.
pub(crate) enum Outcome {
    Converged(Vec<f64>),
    /// An invariant subspace was hit early; multiplicities may be missing.
    Breakdown,
}

fn start_vector(m: usize) -> Col<f64> {
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    let mut v = Col::<f64>::from_fn(m, |_| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    });
    let norm = v.norm_l2();
    v /= norm;
    v
}

struct GramOperator<'a> {
    y: MatRef<'a, f64>,
    /// `true`: act on R^p as YᵀY; `false`: act on R^rows as YYᵀ.
    column_side: bool,
    scratch: Col<f64>,
}

impl<'a> GramOperator<'a> {
    fn new(y: MatRef<'a, f64>, column_side: bool) -> Self {
        let inner = if column_side { y.nrows() } else { y.ncols() };
        Self {
            y,
            column_side,
            scratch: Col::zeros(inner),
        }
    }

    fn apply(&mut self, v: &Col<f64>, out: &mut Col<f64>) {
        let (first, second) = if self.column_side {
            (self.y, self.y.transpose())
        } else {
            (self.y.transpose(), self.y)
        };
        matmul(
            self.scratch.as_mat_mut(),
            Accum::Replace,
            first,
            v.as_mat(),
            1.0,
            Par::Seq,
        );
        matmul(
            out.as_mat_mut(),
            Accum::Replace,
            second,
            self.scratch.as_mat(),
            1.0,
            Par::Seq,
        );
    }
}

/// Top `k` eigenvalues (descending) of the Gram operator of `y` on its
/// smaller side. `k` must not exceed that side's dimension.
pub(crate) fn top_gram_eigenvalues(y: MatRef<'_, f64>, k: usize, scale: f64) -> Result<Outcome> {
    let column_side = y.ncols() <= y.nrows();
    let m = y.nrows().min(y.ncols());
    debug_assert!(k >= 1 && k <= m);

    let mut op = GramOperator::new(y, column_side);
    let mut basis = Mat::<f64>::zeros(m, m);
    let mut alpha: Vec<f64> = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut q = start_vector(m);
    let mut w = Col::<f64>::zeros(m);
    let mut coeffs = Col::<f64>::zeros(m);

    for j in 0..m {
        basis.col_mut(j).copy_from(&q);
        op.apply(&q, &mut w);
        let a = q.transpose() * &w;
        alpha.push(a);

        // two passes of classical Gram–Schmidt against everything so far
        let qs = basis.as_ref().subcols(0, j + 1);
        for _ in 0..2 {
            let mut c = coeffs.as_mut().subrows_mut(0, j + 1);
            matmul(
                c.rb_mut().as_mat_mut(),
                Accum::Replace,
                qs.transpose(),
                w.as_mat(),
                1.0,
                Par::Seq,
            );
            matmul(w.as_mat_mut(), Accum::Add, qs, c.as_mat(), -1.0, Par::Seq);
        }
        let b = w.norm_l2();

        if j + 1 >= k {
            let (theta, last) = eigen_last_row(&alpha, &beta)?;
            let mut order: Vec<usize> = (0..theta.len()).collect();
            order.sort_by(|&x, &y| theta[y].total_cmp(&theta[x]));
            let top = theta[order[0]].max(0.0);
            let done = j + 1 == m
                || (0..k).all(|r| {
                    let i = order[r];
                    let rho = b * last[i].abs();
                    let gap = [r.checked_sub(1), Some(r + 1)]
                        .into_iter()
                        .flatten()
                        .filter_map(|o| order.get(o))
                        .map(|&o| (theta[o] - theta[i]).abs())
                        .fold(f64::INFINITY, f64::min);
                    rho <= RESIDUAL_TOL * top || (rho <= GAP_RESIDUAL_TOL * top && rho * rho <= EIGEN_TOL * top * gap)
                });
            if done && top > 0.0 {
                return Ok(Outcome::Converged(order[..k].iter().map(|&i| theta[i]).collect()));
            }
            if j + 1 == m {
                return Ok(Outcome::Converged(order[..k].iter().map(|&i| theta[i]).collect()));
            }
        }
        if b <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Ok(Outcome::Breakdown);
        }
        beta.push(b);
        q = &w / b;
    }
    Ok(Outcome::Breakdown)
}
