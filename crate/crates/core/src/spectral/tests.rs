use super::*;
use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(Mat::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.abs().max(a.abs()).max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Oracle: dense decomposition of the explicitly formed covariance.
fn oracle_spectrum(x: &DataMatrix, opts: CovarianceOptions) -> Vec<f64> {
    symmetric_eigenvalues(sample_covariance(x, opts).unwrap().as_ref()).unwrap()
}

#[test]
fn identical_rows_centre_to_zero() {
    let x = DataMatrix::from_rows(&[vec![1.5, -2.0, 3.0], vec![1.5, -2.0, 3.0]]).unwrap();
    let c = sample_covariance(&x, CovarianceOptions::SAMPLE).unwrap();
    assert!(c.as_ref().norm_max() == 0.0);
}

#[test]
fn variance_of_two_points() {
    let x = DataMatrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
    let c = sample_covariance(&x, CovarianceOptions::SAMPLE).unwrap();
    assert_eq!(c[(0, 0)], 2.0);
}

#[test]
fn standard_normal_trace_per_dimension() {
    let x = gaussian(1000, 500, 11);
    let c = sample_covariance(&x, CovarianceOptions::SAMPLE).unwrap();
    // direct computation of the column variances as an independent route
    let direct: f64 = (0..500)
        .map(|j| {
            let col: Vec<f64> = (0..1000).map(|i| x.get(i, j)).collect();
            crate::stats::sample_variance(&col).unwrap()
        })
        .sum::<f64>()
        / 500.0;
    let trace: f64 = (0..500).map(|i| c[(i, i)]).sum::<f64>() / 500.0;
    assert!((trace - direct).abs() < 1e-12);
    assert!((trace - 1.0).abs() < 0.01, "trace/p = {trace}");
}

#[test]
fn covariance_is_symmetric_psd() {
    let x = gaussian(30, 12, 3);
    let c = sample_covariance(&x, CovarianceOptions::SAMPLE).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            assert_eq!(c[(i, j)], c[(j, i)]);
        }
    }
    let trace: f64 = (0..12).map(|i| c[(i, i)]).sum();
    assert!(symmetric_eigenvalues(c.as_ref())
        .unwrap()
        .iter()
        .all(|&l| l >= -PSD_TOL * trace));
}

#[test]
fn non_finite_input_rejected() {
    let err = DataMatrix::from_rows(&[vec![0.0, f64::NAN], vec![1.0, 2.0]]).unwrap_err();
    assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
    assert!(DataMatrix::from_rows(&[vec![1.0]]).is_err());
}

#[test]
fn unit_weights_match_uncentered_covariance() {
    let x = gaussian(40, 7, 5);
    let w = vec![1.0; 40];
    let a = weighted_covariance(&x, &w).unwrap();
    let b = sample_covariance(&x, CovarianceOptions::UNCENTERED).unwrap();
    assert!((&a - &b).norm_max() < 1e-13);
}

#[test]
fn zero_weights_give_zero_matrix() {
    let x = gaussian(10, 4, 5);
    let a = weighted_covariance(&x, &[0.0; 10]).unwrap();
    assert_eq!(a.as_ref().norm_max(), 0.0);
}

#[test]
fn point_mass_weight_is_outer_product() {
    let x = gaussian(9, 5, 8);
    for j in [0, 4, 8] {
        let mut w = vec![0.0; 9];
        w[j] = 9.0;
        let a = weighted_covariance(&x, &w).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(a[(r, c)], x.get(j, r) * x.get(j, c));
            }
        }
    }
}

#[test]
fn multinomial_weights_equal_explicit_resample() {
    let x = gaussian(25, 6, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts = vec![0u32; 25];
    for _ in 0..25 {
        counts[rng.random_range(0..25)] += 1;
    }
    let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let a = weighted_covariance(&x, &w).unwrap();
    let xr = x.resample_rows(&counts).unwrap();
    let b = xr.as_mat().transpose() * xr.as_mat() / 25.0;
    assert!((&a - &b).norm_max() < 1e-12);
}

#[test]
fn weight_errors() {
    let x = gaussian(4, 2, 1);
    assert!(matches!(
        weighted_covariance(&x, &[1.0; 3]),
        Err(Error::LengthMismatch { expected: 4, got: 3 })
    ));
    assert!(matches!(
        weighted_covariance(&x, &[1.0, -1.0, 1.0, 1.0]),
        Err(Error::NegativeWeight { index: 1, .. })
    ));
}

#[test]
fn hand_computed_two_by_two_spectrum() {
    // centred Gram matrix diag(4, 1), divisor N = 3
    let s2 = 2f64.sqrt();
    let a = 1.0 / 6f64.sqrt();
    let x = DataMatrix::from_rows(&[vec![s2, a], vec![-s2, a], vec![0.0, -2.0 * a]]).unwrap();
    let opts = CovarianceOptions {
        center: true,
        divisor: Divisor::N,
    };
    let s = top_eigenvalues(&x, 2, opts).unwrap();
    assert!((s.eigenvalues[0] - 4.0 / 3.0).abs() < 1e-14);
    assert!((s.eigenvalues[1] - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn rank_one_top_eigenvalue_is_trace() {
    let v = [1.0, -2.0, 0.5, 3.0];
    let rows: Vec<Vec<f64>> = [1.0, 2.0, -1.0, 0.3, 4.0]
        .iter()
        .map(|c| v.iter().map(|x| c * x).collect())
        .collect();
    let x = DataMatrix::from_rows(&rows).unwrap();
    let s = top_eigenvalues(&x, 1, CovarianceOptions::UNCENTERED).unwrap();
    assert!((s.eigenvalues[0] - s.trace).abs() < 1e-12 * s.trace);
}

#[test]
fn top_five_is_prefix_of_full_spectrum() {
    let x = gaussian(200, 100, 77);
    let top = top_eigenvalues(&x, 5, CovarianceOptions::SAMPLE).unwrap();
    let full = full_spectrum(&x, CovarianceOptions::SAMPLE).unwrap();
    let oracle = oracle_spectrum(&x, CovarianceOptions::SAMPLE);
    for i in 0..5 {
        assert!(rel_close(
            top.eigenvalues[i],
            full.eigenvalues[i],
            1e-8,
            full.eigenvalues[0]
        ));
        assert!(rel_close(top.eigenvalues[i], oracle[i], 1e-8, oracle[0]));
    }
}

#[test]
fn full_spectrum_sums_to_trace() {
    for (n, p) in [(50, 20), (20, 50), (64, 64)] {
        let x = gaussian(n, p, (n * p) as u64);
        let s = full_spectrum(&x, CovarianceOptions::SAMPLE).unwrap();
        assert_eq!(s.eigenvalues.len(), p);
        let sum: f64 = s.eigenvalues.iter().sum();
        assert!((sum - s.trace).abs() <= 1e-8 * s.trace);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.eigenvalues.iter().all(|&l| l >= -PSD_TOL * s.trace));
    }
}

#[test]
fn explicit_matrix_spectra() {
    let id = Mat::<f64>::identity(6, 6);
    let s = matrix_spectrum(id.as_ref()).unwrap();
    assert!(s.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    let m = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
    let s = matrix_spectrum(m.as_ref()).unwrap();
    assert!((s.eigenvalues[0] - 3.0).abs() < 1e-14);
    assert!((s.eigenvalues[1] - 1.0).abs() < 1e-14);
}

#[test]
fn k_out_of_range() {
    let x = gaussian(5, 3, 1);
    assert!(matches!(
        top_eigenvalues(&x, 0, CovarianceOptions::SAMPLE),
        Err(Error::KOutOfRange { .. })
    ));
    assert!(matches!(
        top_eigenvalues(&x, 4, CovarianceOptions::SAMPLE),
        Err(Error::KOutOfRange { .. })
    ));
}

#[test]
fn degenerate_data_through_lanczos_size() {
    // zero covariance large enough to take the iterative route
    let row = vec![0.25; 80];
    let x = DataMatrix::from_rows(&vec![row; 120]).unwrap();
    let s = top_eigenvalues(&x, 3, CovarianceOptions::SAMPLE).unwrap();
    assert_eq!(s.eigenvalues, vec![0.0; 3]);
    // identity-like: repeated top eigenvalue must keep its multiplicity
    let x = DataMatrix::new(Mat::from_fn(100, 60, |i, j| if i % 60 == j { 1.0 } else { 0.0 })).unwrap();
    let s = top_eigenvalues(&x, 3, CovarianceOptions::UNCENTERED).unwrap();
    let oracle = oracle_spectrum(&x, CovarianceOptions::UNCENTERED);
    for i in 0..3 {
        assert!(
            (s.eigenvalues[i] - oracle[i]).abs() < 1e-12,
            "{:?} {:?}",
            s.eigenvalues,
            &oracle[..3]
        );
    }
}

#[test]
fn stieltjes_examples() {
    let ones = SpectralSummary::from_eigenvalues(vec![1.0; 4]).unwrap();
    let m = empirical_stieltjes(&ones, Complex64::i()).unwrap();
    assert!((m - Complex64::new(0.5, 0.5)).norm() < 1e-15);

    let two = SpectralSummary::from_eigenvalues(vec![0.0, 2.0]).unwrap();
    let m = empirical_stieltjes(&two, Complex64::i()).unwrap();
    assert!((m - Complex64::new(0.2, 0.6)).norm() < 1e-15);

    // z m(z) + 1 = (1/p) Σ λ/(λ − z), bounded by mean(λ)/|z| on the imaginary axis
    let s = SpectralSummary::from_eigenvalues(vec![1.8, 1.0, 0.2]).unwrap();
    for y in [10.0, 100.0, 1e4] {
        let z = Complex64::new(0.0, y);
        let zm = z * empirical_stieltjes(&s, z).unwrap();
        assert!((zm + 1.0).norm() <= 1.0 / y);
    }
}

#[test]
fn stieltjes_rejects_lower_half_plane_and_partial_spectra() {
    let s = SpectralSummary::from_eigenvalues(vec![1.0, 2.0]).unwrap();
    assert!(empirical_stieltjes(&s, Complex64::new(1.0, 0.0)).is_err());
    assert!(empirical_stieltjes(&s, Complex64::new(1.0, -1.0)).is_err());
    let x = gaussian(10, 5, 2);
    let top = top_eigenvalues(&x, 2, CovarianceOptions::SAMPLE).unwrap();
    assert!(empirical_stieltjes(&top, Complex64::i()).is_err());
}

/// |tr(M + qqᵀ − z)⁻¹ − tr(M − z)⁻¹| ≤ 1/Im z on random symmetric M.
#[test]
fn rank_one_resolvent_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for inst in 0..120 {
        let p = 3 + inst % 17;
        let g = Mat::<f64>::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = (&g + g.transpose()) * 0.5;
        let q: Vec<f64> = (0..p).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let pert = Mat::from_fn(p, p, |i, j| m[(i, j)] + q[i] * q[j]);
        let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.01..2.0));
        let tr = |mat: &Mat<f64>| -> Complex64 {
            symmetric_eigenvalues(mat.as_ref())
                .unwrap()
                .iter()
                .map(|&l| (Complex64::new(l, 0.0) - z).inv())
                .sum()
        };
        let diff = (tr(&pert) - tr(&m)).norm();
        assert!(
            diff <= 1.0 / z.im * (1.0 + 1e-9),
            "instance {inst}: {diff} > {}",
            1.0 / z.im
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn top_k_prefix_of_full(n in 2usize..140, p in 1usize..120, seed in any::<u64>(), center in any::<bool>()) {
        let x = gaussian(n, p, seed);
        let opts = if center { CovarianceOptions::SAMPLE } else { CovarianceOptions::UNCENTERED };
        let full = full_spectrum(&x, opts).unwrap();
        let k = (seed as usize % n.min(p)) + 1;
        let top = top_eigenvalues(&x, k.min(6), opts).unwrap();
        prop_assert_eq!(top.eigenvalues.len(), k.min(6));
        for i in 0..top.eigenvalues.len() {
            prop_assert!(rel_close(top.eigenvalues[i], full.eigenvalues[i], 1e-8, full.eigenvalues[0]),
                "i={} top={} full={}", i, top.eigenvalues[i], full.eigenvalues[i]);
        }
        let sum: f64 = full.eigenvalues.iter().sum();
        prop_assert!((sum - full.trace).abs() <= 1e-8 * full.trace.max(f64::MIN_POSITIVE));
        prop_assert!(full.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(full.eigenvalues.iter().all(|&l| l >= -PSD_TOL * full.trace));
    }

    #[test]
    fn stieltjes_maps_upper_half_plane(ev in proptest::collection::vec(0.0f64..50.0, 1..40),
                                       re in -10.0f64..60.0, im in 1e-6f64..10.0) {
        let s = SpectralSummary::from_eigenvalues(ev).unwrap();
        let m = empirical_stieltjes(&s, Complex64::new(re, im)).unwrap();
        prop_assert!(m.im > 0.0);
    }
}
