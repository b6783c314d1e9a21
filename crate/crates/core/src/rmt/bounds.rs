use crate::spectral::SpectralSummary;

/// Azuma–Hoeffding tail bound `min(1, 4 exp(−p² v² t² / (16 n)))` for the
/// deviation of the Stieltjes transform at `Im z = v` from its mean.
pub fn azuma_bound(t: f64, p: usize, v: f64, n: usize) -> f64 {
    let (p, n) = (p as f64, n as f64);
    (4.0 * (-(p * p * v * v * t * t) / (16.0 * n)).exp()).min(1.0)
}

/// `n^{−α} λ_max(V) / (λ_q(T) − n^{−α} λ_max(V))`, or `None` when
/// `λ_q(T) ≤ n^{−α} λ_max(V)` or `T` has fewer than `q` eigenvalues.
///
/// This form carries no `λ₁(T)` factor and is only a valid bound on
/// `λ_i(S) − λ_i(T)` when `λ₁(T) ≤ 1`; see [`scaled_wielandt_gap_bound`].
pub fn wielandt_gap_bound(
    spectrum_t: &SpectralSummary,
    lambda_max_v: f64,
    alpha: f64,
    n: usize,
    q: usize,
) -> Option<f64> {
    if q == 0 || spectrum_t.eigenvalues.len() < q {
        return None;
    }
    let noise = (n as f64).powf(-alpha) * lambda_max_v;
    let lq = spectrum_t.eigenvalues[q - 1];
    (lq > noise).then(|| noise / (lq - noise))
}

/// Scale-equivariant perturbation bound
/// `λ₁(T) · n^{−α} λ_max(V) / (λ_q(T) − n^{−α} λ_max(V))`.
///
/// An eigenvalue `λ ≥ λ_q(T)` of `S = [[T, R], [Rᵀ, S₂₂]]` is an eigenvalue
/// of the Schur complement `T + R (λI − S₂₂)⁻¹ Rᵀ`, whose correction has norm
/// at most `‖R‖² / (λ − λ_max(S₂₂))`. For Gram blocks
/// `‖R‖² ≤ λ_max(T) λ_max(S₂₂)`, which is where the `λ₁(T)` factor comes from.
pub fn scaled_wielandt_gap_bound(
    spectrum_t: &SpectralSummary,
    lambda_max_v: f64,
    alpha: f64,
    n: usize,
    q: usize,
) -> Option<f64> {
    wielandt_gap_bound(spectrum_t, lambda_max_v, alpha, n, q).map(|b| spectrum_t.largest() * b)
}
