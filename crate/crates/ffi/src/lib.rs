//! C ABI over `eigboot`.
//!
//! Every fallible function returns an [`EigbootStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`eigboot_last_error_message`]. Objects cross the boundary as opaque
//! handles that the caller releases with the matching `*_free` function.
//! Panics are caught and reported as [`EigbootStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eigboot::bootstrap::{self, BootstrapConfig, IntervalMethod, Statistic};
use eigboot::datagen::{self, Basis, CovarianceModel, EllipticalLaw};
use eigboot::harness::{self, ExperimentConfig};
use eigboot::rmt::{self, DiscreteLaw, SolverOptions, SpikeRegime};
use eigboot::{Complex64, CovarianceOptions, DataMatrix, Error, RngStream};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigbootStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NonFinite = 3,
    LengthMismatch = 4,
    NegativeWeight = 5,
    KOutOfRange = 6,
    BadSpectralArgument = 7,
    DegenerateSpectrum = 8,
    NotConverged = 9,
    HerglotzViolation = 10,
    TooFewReplicates = 11,
    Linalg = 12,
    Io = 13,
    Parse = 14,
    BufferTooSmall = 15,
    Panic = 16,
}

impl From<&Error> for EigbootStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => Self::InvalidInput,
            Error::NonFinite { .. } => Self::NonFinite,
            Error::LengthMismatch { .. } => Self::LengthMismatch,
            Error::NegativeWeight { .. } => Self::NegativeWeight,
            Error::KOutOfRange { .. } => Self::KOutOfRange,
            Error::BadSpectralArgument { .. } => Self::BadSpectralArgument,
            Error::DegenerateSpectrum(_) => Self::DegenerateSpectrum,
            Error::NotConverged { .. } => Self::NotConverged,
            Error::HerglotzViolation(_) => Self::HerglotzViolation,
            Error::TooFewReplicates { .. } => Self::TooFewReplicates,
            Error::Linalg(_) => Self::Linalg,
            Error::Io { .. } => Self::Io,
            Error::Parse { .. } => Self::Parse,
        }
    }
}

/// Distribution of the elliptical scale factor; passed as a `uint32_t` code.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigbootLaw {
    Gaussian = 0,
    EllipNormal = 1,
    EllipUniform = 2,
    EllipExp = 3,
}

impl EigbootLaw {
    fn decode(code: u32) -> Result<EllipticalLaw, EigbootStatus> {
        Ok(match code {
            0 => EllipticalLaw::Gaussian,
            1 => EllipticalLaw::EllipNormal,
            2 => EllipticalLaw::EllipUniform,
            3 => EllipticalLaw::EllipExp,
            _ => return Err(invalid(&format!("unknown EigbootLaw code {code}"))),
        })
    }
}

/// Statistic code, passed as a `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigbootStatistic {
    /// Largest eigenvalue.
    TopEigenvalue = 0,
    /// `λ₁ − λ₂`.
    Gap = 1,
    /// `(λ₁ − λ₂) / (λ₂ − λ₃)`.
    GapRatio = 2,
}

impl EigbootStatistic {
    fn decode(code: u32) -> Result<Statistic, EigbootStatus> {
        Ok(match code {
            0 => Statistic::TopEigenvalue,
            1 => Statistic::Gap,
            2 => Statistic::GapRatio,
            _ => return Err(invalid(&format!("unknown EigbootStatistic code {code}"))),
        })
    }
}

/// Confidence-interval method code, passed as a `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigbootInterval {
    Percentile = 0,
    Normal = 1,
    BiasCorrected = 2,
}

impl EigbootInterval {
    fn decode(code: u32) -> Result<IntervalMethod, EigbootStatus> {
        Ok(match code {
            0 => IntervalMethod::Percentile,
            1 => IntervalMethod::Normal,
            2 => IntervalMethod::BiasCorrected,
            _ => return Err(invalid(&format!("unknown EigbootInterval code {code}"))),
        })
    }
}

/// An `n × p` data matrix, one observation per row.
pub struct EigbootData(DataMatrix);

/// Bootstrap replicates of a statistic together with its point estimate.
pub struct EigbootDistribution(bootstrap::BootstrapDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), EigbootStatus>) -> EigbootStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EigbootStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EigbootStatus::Panic
        }
    }
}

fn fail(e: Error) -> EigbootStatus {
    let status = EigbootStatus::from(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> EigbootStatus {
    set_error(format!("{what} is null"));
    EigbootStatus::NullPointer
}

fn invalid(msg: &str) -> EigbootStatus {
    set_error(msg.to_string());
    EigbootStatus::InvalidInput
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, EigbootStatus> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, EigbootStatus> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, EigbootStatus> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(&format!("{what} is not valid UTF-8")))
}

/// Library version and build revision as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eigboot_version() -> *const c_char {
    static VERSION: std::sync::OnceLock<CString> = std::sync::OnceLock::new();
    VERSION
        .get_or_init(|| CString::new(harness::artifact_version()).expect("no NUL in version"))
        .as_ptr()
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the length of the full message
/// without the terminator, or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn eigboot_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Copies an `n × p` row-major array into a new data handle.
///
/// # Safety
/// `values` must point to `n * p` doubles; `out_data` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_data_new(
    values: *const f64,
    n: usize,
    p: usize,
    out_data: *mut *mut EigbootData,
) -> EigbootStatus {
    guard(|| {
        let out_data = out(out_data, "out_data")?;
        let len = n.checked_mul(p).ok_or_else(|| invalid("n * p overflows"))?;
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        let slice = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(values, len)
        };
        let x = DataMatrix::from_row_major(n, p, slice).map_err(fail)?;
        *out_data = Box::into_raw(Box::new(EigbootData(x)));
        Ok(())
    })
}

/// Simulates `n` observations of `X = D Σ^{1/2} Z` with spike `lambda1` on
/// a random orthogonal basis and unit bulk.
///
/// # Safety
/// `out_data` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_data_generate(
    n: usize,
    p: usize,
    lambda1: f64,
    law: u32,
    seed: u64,
    out_data: *mut *mut EigbootData,
) -> EigbootStatus {
    guard(|| {
        let out_data = out(out_data, "out_data")?;
        let model = CovarianceModel::new(p, lambda1, Basis::RandomOrthogonal).map_err(fail)?;
        let x = datagen::generate_dataset(&model, EigbootLaw::decode(law)?, n, &RngStream::new(seed)).map_err(fail)?;
        *out_data = Box::into_raw(Box::new(EigbootData(x)));
        Ok(())
    })
}

/// # Safety
/// `data` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eigboot_data_free(data: *mut EigbootData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// # Safety
/// `data` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_data_shape(data: *const EigbootData, n: *mut usize, p: *mut usize) -> EigbootStatus {
    guard(|| {
        let x = &input(data, "data")?.0;
        *out(n, "n")? = x.n();
        *out(p, "p")? = x.p();
        Ok(())
    })
}

/// The `k` largest eigenvalues of the sample covariance, in descending
/// order. `centered` selects `(X − X̄)ᵀ(X − X̄)/(n − 1)` over `XᵀX/n`.
///
/// # Safety
/// `data` must be a live handle and `out_values` valid for `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn eigboot_top_eigenvalues(
    data: *const EigbootData,
    k: usize,
    centered: bool,
    out_values: *mut f64,
) -> EigbootStatus {
    guard(|| {
        let x = &input(data, "data")?.0;
        if out_values.is_null() {
            return Err(null("out_values"));
        }
        let opts = if centered {
            CovarianceOptions::SAMPLE
        } else {
            CovarianceOptions::UNCENTERED
        };
        let s = eigboot::top_eigenvalues(x, k, opts).map_err(fail)?;
        std::slice::from_raw_parts_mut(out_values, k).copy_from_slice(&s.eigenvalues[..k]);
        Ok(())
    })
}

/// Nonparametric bootstrap of `statistic` with `replicates` resamples;
/// data are re-centred within each resample.
///
/// # Safety
/// `data` must be a live handle; `out_dist` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_bootstrap(
    data: *const EigbootData,
    statistic: u32,
    replicates: usize,
    seed: u64,
    out_dist: *mut *mut EigbootDistribution,
) -> EigbootStatus {
    guard(|| {
        let x = &input(data, "data")?.0;
        let out_dist = out(out_dist, "out_dist")?;
        let cfg = BootstrapConfig::new(replicates, RngStream::new(seed));
        let d =
            bootstrap::bootstrap_statistic(x, EigbootStatistic::decode(statistic)?, &cfg, CovarianceOptions::SAMPLE)
                .map_err(fail)?;
        *out_dist = Box::into_raw(Box::new(EigbootDistribution(d)));
        Ok(())
    })
}

/// # Safety
/// `dist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_free(dist: *mut EigbootDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of replicates, or 0 for a null handle.
///
/// # Safety
/// `dist` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_len(dist: *const EigbootDistribution) -> usize {
    dist.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `dist` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_point_estimate(
    dist: *const EigbootDistribution,
    out_value: *mut f64,
) -> EigbootStatus {
    guard(|| {
        *out(out_value, "out_value")? = input(dist, "dist")?.0.point_estimate;
        Ok(())
    })
}

/// Copies the replicates into `buf`. Fails with `BUFFER_TOO_SMALL` when
/// `len` is below [`eigboot_distribution_len`].
///
/// # Safety
/// `dist` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_replicates(
    dist: *const EigbootDistribution,
    buf: *mut f64,
    len: usize,
) -> EigbootStatus {
    guard(|| {
        let d = &input(dist, "dist")?.0;
        if len < d.len() {
            set_error(format!("buffer holds {len} values, need {}", d.len()));
            return Err(EigbootStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        std::slice::from_raw_parts_mut(buf, d.len()).copy_from_slice(&d.replicates);
        Ok(())
    })
}

/// Bootstrap bias `mean(replicates) − point estimate`.
///
/// # Safety
/// `dist` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_bias(
    dist: *const EigbootDistribution,
    out_value: *mut f64,
) -> EigbootStatus {
    guard(|| {
        *out(out_value, "out_value")? = bootstrap::bias_estimate(&input(dist, "dist")?.0);
        Ok(())
    })
}

/// Bootstrap variance (divisor `B − 1`); needs at least two replicates.
///
/// # Safety
/// `dist` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_variance(
    dist: *const EigbootDistribution,
    out_value: *mut f64,
) -> EigbootStatus {
    guard(|| {
        let d = &input(dist, "dist")?.0;
        let out_value = out(out_value, "out_value")?;
        *out_value = bootstrap::variance_estimate(d).map_err(fail)?;
        Ok(())
    })
}

/// Two-sided confidence interval at `level` in (0, 1). `out_fell_back`
/// (may be null) reports a bias-corrected interval that fell back to the
/// percentile interval.
///
/// # Safety
/// `dist` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_distribution_interval(
    dist: *const EigbootDistribution,
    method: u32,
    level: f64,
    lower: *mut f64,
    upper: *mut f64,
    out_fell_back: *mut bool,
) -> EigbootStatus {
    guard(|| {
        let d = &input(dist, "dist")?.0;
        let (lower, upper) = (out(lower, "lower")?, out(upper, "upper")?);
        let ci = bootstrap::confidence_interval(d, EigbootInterval::decode(method)?, level).map_err(fail)?;
        *lower = ci.lower;
        *upper = ci.upper;
        if let Some(f) = out_fell_back.as_mut() {
            *f = ci.fell_back;
        }
        Ok(())
    })
}

/// Marchenko–Pastur density at `x` for ratio `r = p/n`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_mp_density(x: f64, r: f64, out_value: *mut f64) -> EigbootStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = rmt::mp_density(x, r).map_err(fail)?;
        Ok(())
    })
}

/// Marchenko–Pastur distribution function at `x`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_mp_cdf(x: f64, r: f64, out_value: *mut f64) -> EigbootStatus {
    guard(|| {
        let out_value = out(out_value, "out_value")?;
        *out_value = rmt::mp_cdf(x, r).map_err(fail)?;
        Ok(())
    })
}

/// Centring and scaling of the largest eigenvalue under the null.
///
/// # Safety
/// `mu` and `sigma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_johnstone(n: usize, p: usize, mu: *mut f64, sigma: *mut f64) -> EigbootStatus {
    guard(|| {
        let (mu, sigma) = (out(mu, "mu")?, out(sigma, "sigma")?);
        let e = rmt::johnstone_params(n, p).map_err(fail)?;
        *mu = e.mu_np;
        *sigma = e.sigma_np;
        Ok(())
    })
}

/// Limit location and scale of the top sample eigenvalue for a population
/// spike `lambda1`. `out_supercritical` is set when the spike separates
/// from the bulk; otherwise `out_mu` and `out_sigma` are NaN.
///
/// # Safety
/// All outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_spike(
    lambda1: f64,
    n: usize,
    p: usize,
    out_mu: *mut f64,
    out_sigma: *mut f64,
    out_supercritical: *mut bool,
) -> EigbootStatus {
    guard(|| {
        let (mu, sigma, sup) = (
            out(out_mu, "out_mu")?,
            out(out_sigma, "out_sigma")?,
            out(out_supercritical, "out_supercritical")?,
        );
        let s = rmt::bbp_params(lambda1, n, p).map_err(fail)?;
        *mu = s.mu_eta.unwrap_or(f64::NAN);
        *sigma = s.sigma_eta.unwrap_or(f64::NAN);
        *sup = s.regime == SpikeRegime::Supercritical;
        Ok(())
    })
}

/// Tail bound `min(1, 4 exp(−p² v² t² / (16 n)))` on the deviation of the
/// bootstrap Stieltjes transform.
#[no_mangle]
pub extern "C" fn eigboot_azuma_bound(t: f64, p: usize, v: f64, n: usize) -> f64 {
    rmt::azuma_bound(t, p, v, n)
}

/// Limiting Stieltjes transform at `z` of the spectrum of a sample
/// covariance with identity population covariance and ratio `r`.
///
/// # Safety
/// `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_mp_stieltjes(
    z_re: f64,
    z_im: f64,
    r: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EigbootStatus {
    guard(|| {
        let (re, im) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let h = DiscreteLaw::point_mass(1.0).map_err(fail)?;
        let z = Complex64::new(z_re, z_im);
        let sol = rmt::mp_stieltjes(z, &h, r, SolverOptions::default()).map_err(fail)?;
        let m = rmt::companion_to_stieltjes(sol.value, z, r);
        *re = m.re;
        *im = m.im;
        Ok(())
    })
}

/// Runs the simulation study described by a JSON configuration and returns
/// the JSON summary in `*out_json`, to be released with
/// [`eigboot_string_free`]. `workers` of 0 uses every core.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn eigboot_run_experiment_json(
    config_json: *const c_char,
    workers: usize,
    out_json: *mut *mut c_char,
) -> EigbootStatus {
    guard(|| {
        let text = c_str(config_json, "config_json")?;
        let out_json = out(out_json, "out_json")?;
        let cfg = ExperimentConfig::from_json(text).map_err(fail)?;
        let workers = (workers > 0).then_some(workers);
        let res = harness::with_workers(workers, || harness::run_experiment(&cfg))
            .and_then(|r| r)
            .map_err(fail)?;
        let table = harness::summarize(&res.records, &res.truth);
        let json = harness::summary_json(&cfg, &table, &res.failures).to_string();
        *out_json = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eigboot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
