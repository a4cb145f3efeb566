//! C ABI for the `larfi` library.
//!
//! Objects cross the boundary as opaque heap handles created by a `*_new`
//! function (or `larfi_fit`) and released with the matching `*_free`.
//! Every fallible call returns a `LarfiStatus`; on failure a description
//! is available from `larfi_last_error` on the same thread. Matrices are
//! written row-major into caller-provided buffers whose length is checked.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use larfi::estimate::{fit_mle, FitConfig, FitResult, FitStatus, Subject, SubjectPanel};
use larfi::exact::{ex_fi, ExactAlgorithm, LagState};
use larfi::inference::{wald_ci, FiSource};
use larfi::model::{em_fi, log_likelihood, score};
use larfi::{BinarySeries, Error, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarfiStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    BufferTooSmall = 3,
    Numerical = 4,
    NotPositiveDefinite = 5,
    SizeLimit = 6,
    Panic = 7,
}

/// Exact-information algorithm selector, passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarfiAlgorithm {
    Forward = 0,
    FunctionalIteration = 1,
    ClosedForm = 2,
    BruteForce = 3,
}

/// Information source selector, passed as `uint32_t`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarfiSource {
    Exact = 0,
    Empirical = 1,
}

/// Fit outcome, as returned by `larfi_fit_status`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarfiFitStatus {
    Converged = 0,
    DivergedSeparation = 1,
    MaxIter = 2,
}

/// Model parameters `(alpha_1..alpha_l, beta_0..beta_p)`.
pub struct LarfiModel(ParamVector);

/// A binary series with optional row-major covariates.
pub struct LarfiSeries {
    series: BinarySeries,
    exog: Option<ExogMatrix>,
}

/// A fitted model.
pub struct LarfiFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: LarfiStatus, msg: impl Into<String>) -> LarfiStatus {
    set_error(msg.into());
    status
}

fn from_error(err: Error) -> LarfiStatus {
    let status = match &err {
        Error::Numerical(_) => LarfiStatus::Numerical,
        Error::NotPositiveDefinite { .. } => LarfiStatus::NotPositiveDefinite,
        Error::SizeLimit { .. } => LarfiStatus::SizeLimit,
        _ => LarfiStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

type Call = Result<(), LarfiStatus>;

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Call) -> LarfiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            LarfiStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(LarfiStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lift<T>(r: larfi::Result<T>) -> Result<T, LarfiStatus> {
    r.map_err(from_error)
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> Result<&'a T, LarfiStatus> {
    p.as_ref().ok_or_else(|| fail(LarfiStatus::NullPointer, format!("{what} is null")))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], LarfiStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(LarfiStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], LarfiStatus> {
    if p.is_null() {
        return Err(fail(LarfiStatus::NullPointer, format!("{what} is null")));
    }
    if len < needed {
        return Err(fail(LarfiStatus::BufferTooSmall, format!("{what} holds {len} values, {needed} needed")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn write_scalar(p: *mut f64, v: f64, what: &str) -> Call {
    if p.is_null() {
        return Err(fail(LarfiStatus::NullPointer, format!("{what} is null")));
    }
    *p = v;
    Ok(())
}

unsafe fn write_matrix(fi: &FisherMatrix, out: *mut f64, out_len: usize) -> Call {
    let d = fi.dim();
    let buf = output(out, out_len, d * d, "out")?;
    for i in 0..d {
        for j in 0..d {
            buf[i * d + j] = fi.get(i, j);
        }
    }
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Call {
    if out.is_null() {
        return Err(fail(LarfiStatus::NullPointer, "out is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn algorithm(code: u32) -> Result<ExactAlgorithm, LarfiStatus> {
    Ok(match code {
        x if x == LarfiAlgorithm::Forward as u32 => ExactAlgorithm::Forward,
        x if x == LarfiAlgorithm::FunctionalIteration as u32 => ExactAlgorithm::FunctionalIteration,
        x if x == LarfiAlgorithm::ClosedForm as u32 => ExactAlgorithm::ClosedForm,
        x if x == LarfiAlgorithm::BruteForce as u32 => ExactAlgorithm::BruteForce,
        other => return Err(fail(LarfiStatus::InvalidArgument, format!("unknown algorithm code {other}"))),
    })
}

fn source(code: u32) -> Result<FiSource, LarfiStatus> {
    match code {
        x if x == LarfiSource::Exact as u32 => Ok(FiSource::Exact),
        x if x == LarfiSource::Empirical as u32 => Ok(FiSource::Empirical),
        other => Err(fail(LarfiStatus::InvalidArgument, format!("unknown information source code {other}"))),
    }
}

fn check_model(model: &ParamVector, s: &LarfiSeries) -> Call {
    let cols = s.exog.as_ref().map_or(0, |x| x.cols());
    if cols != model.spec().l() {
        return Err(fail(
            LarfiStatus::InvalidArgument,
            format!("series has {cols} covariate(s) but the model expects {}", model.spec().l()),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn larfi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn larfi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a model with `p` lags and `l` covariates from `dim = l + p + 1`
/// coefficients.
///
/// # Safety
/// `values` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_model_new(
    p: usize,
    l: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut LarfiModel,
) -> LarfiStatus {
    guard(|| {
        let spec = lift(ModelSpec::new(p, l))?;
        let v = input(values, len, "values")?;
        let theta = lift(ParamVector::new(spec, v.to_vec()))?;
        store(out, LarfiModel(theta))
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn larfi_model_dim(model: *const LarfiModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.spec().dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn larfi_model_free(model: *mut LarfiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Creates a series of `t_len` zeros and ones. `exog` holds `t_len * cols`
/// covariate values row-major (one row per time point) and may be null when
/// `cols` is 0.
///
/// # Safety
/// Pointers must reference buffers of the stated sizes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_series_new(
    y: *const u8,
    t_len: usize,
    exog: *const f64,
    cols: usize,
    out: *mut *mut LarfiSeries,
) -> LarfiStatus {
    guard(|| {
        let series = lift(BinarySeries::new(input(y, t_len, "y")?.to_vec()))?;
        let exog = if cols == 0 {
            None
        } else {
            let x = input(exog, t_len * cols, "exog")?;
            Some(lift(ExogMatrix::new(t_len, cols, x.to_vec()))?)
        };
        store(out, LarfiSeries { series, exog })
    })
}

/// # Safety
/// `series` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn larfi_series_free(series: *mut LarfiSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Conditional log-likelihood given the first `p` observations.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_loglik(model: *const LarfiModel, series: *const LarfiSeries, out: *mut f64) -> LarfiStatus {
    guard(|| {
        let (m, s) = (obj(model, "model")?, obj(series, "series")?);
        check_model(&m.0, s)?;
        let ll = lift(log_likelihood(&m.0, &s.series, s.exog.as_ref()))?;
        write_scalar(out, ll, "out")
    })
}

/// Score vector; `out` needs `dim` entries.
///
/// # Safety
/// Handles must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn larfi_score(
    model: *const LarfiModel,
    series: *const LarfiSeries,
    out: *mut f64,
    out_len: usize,
) -> LarfiStatus {
    guard(|| {
        let (m, s) = (obj(model, "model")?, obj(series, "series")?);
        check_model(&m.0, s)?;
        let u = lift(score(&m.0, &s.series, s.exog.as_ref()))?;
        output(out, out_len, u.len(), "out")?[..u.len()].copy_from_slice(&u);
        Ok(())
    })
}

/// Empirical information of the observed series; `out` needs `dim * dim`.
///
/// # Safety
/// Handles must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn larfi_em_fi(
    model: *const LarfiModel,
    series: *const LarfiSeries,
    out: *mut f64,
    out_len: usize,
) -> LarfiStatus {
    guard(|| {
        let (m, s) = (obj(model, "model")?, obj(series, "series")?);
        check_model(&m.0, s)?;
        let fi = lift(em_fi(&m.0, &s.series, s.exog.as_ref()))?;
        write_matrix(&fi, out, out_len)
    })
}

/// Exact information over the series' horizon. Only the first `p` values of
/// the series (the starting state) and its covariates are used.
/// `algorithm` is a `LarfiAlgorithm` code; `out` needs `dim * dim`.
///
/// # Safety
/// Handles must be live and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn larfi_ex_fi(
    model: *const LarfiModel,
    series: *const LarfiSeries,
    algorithm_code: u32,
    out: *mut f64,
    out_len: usize,
) -> LarfiStatus {
    guard(|| {
        let (m, s) = (obj(model, "model")?, obj(series, "series")?);
        check_model(&m.0, s)?;
        let algo = algorithm(algorithm_code)?;
        let init = lift(LagState::initial_of(&s.series, m.0.spec().p()))?;
        let fi = lift(ex_fi(algo, &m.0, init, s.series.len(), s.exog.as_ref()))?;
        write_matrix(&fi, out, out_len)
    })
}

/// Fits one parameter vector with `p` lags to `n` series by maximum
/// likelihood. All series must carry the same number of covariates.
/// A separated fit is still returned with `LARFI_STATUS_OK`; check
/// `larfi_fit_status`.
///
/// # Safety
/// `series` must point to `n` live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit(
    series: *const *const LarfiSeries,
    n: usize,
    p: usize,
    max_iter: usize,
    out: *mut *mut LarfiFit,
) -> LarfiStatus {
    guard(|| {
        let handles = input(series, n, "series")?;
        let mut subjects = Vec::with_capacity(n);
        for (i, &h) in handles.iter().enumerate() {
            let s = obj(h, "series entry")?;
            subjects.push(Subject::new(format!("{i:08}"), s.series.clone(), s.exog.clone()));
        }
        let l = subjects.first().and_then(|s| s.exog.as_ref()).map_or(0, |x| x.cols());
        let spec = lift(ModelSpec::new(p, l))?;
        let panel = lift(SubjectPanel::new(spec, subjects))?;
        let config = FitConfig { max_iter, ..FitConfig::default() };
        store(out, LarfiFit(lift(fit_mle(&panel, &config))?))
    })
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_free(fit: *mut LarfiFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_status(fit: *const LarfiFit, out: *mut LarfiFitStatus) -> LarfiStatus {
    guard(|| {
        let f = obj(fit, "fit")?;
        if out.is_null() {
            return Err(fail(LarfiStatus::NullPointer, "out is null"));
        }
        *out = match f.0.status {
            FitStatus::Converged => LarfiFitStatus::Converged,
            FitStatus::DivergedSeparation => LarfiFitStatus::DivergedSeparation,
            FitStatus::MaxIter => LarfiFitStatus::MaxIter,
        };
        Ok(())
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_dim(fit: *const LarfiFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.theta_hat.spec().dim())
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_loglik(fit: *const LarfiFit, out: *mut f64) -> LarfiStatus {
    guard(|| write_scalar(out, obj(fit, "fit")?.0.loglik, "out"))
}

/// Estimated coefficients; `out` needs `dim` entries.
///
/// # Safety
/// `fit` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_theta(fit: *const LarfiFit, out: *mut f64, out_len: usize) -> LarfiStatus {
    guard(|| {
        let theta = obj(fit, "fit")?.0.theta_hat.as_slice();
        output(out, out_len, theta.len(), "out")?[..theta.len()].copy_from_slice(theta);
        Ok(())
    })
}

/// Information at the estimate from the chosen `LarfiSource`; `out`
/// needs `dim * dim`.
///
/// # Safety
/// `fit` must be a live handle and `out` must hold `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn larfi_fit_information(
    fit: *const LarfiFit,
    source_code: u32,
    out: *mut f64,
    out_len: usize,
) -> LarfiStatus {
    guard(|| {
        let f = &obj(fit, "fit")?.0;
        let fi = match source(source_code)? {
            FiSource::Exact => &f.ex_fi,
            FiSource::Empirical => &f.em_fi,
        };
        write_matrix(fi, out, out_len)
    })
}

/// Wald interval for coefficient `coord` at confidence `level`.
/// Any of the output pointers may be null.
///
/// # Safety
/// `fit` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn larfi_wald_ci(
    fit: *const LarfiFit,
    coord: usize,
    level: f64,
    source_code: u32,
    lower: *mut f64,
    upper: *mut f64,
    se: *mut f64,
) -> LarfiStatus {
    guard(|| {
        let f = &obj(fit, "fit")?.0;
        let src = source(source_code)?;
        let fi = match src {
            FiSource::Exact => &f.ex_fi,
            FiSource::Empirical => &f.em_fi,
        };
        let ci = lift(wald_ci(&f.theta_hat, fi, coord, level, src))?;
        for (p, v) in [(lower, ci.lower), (upper, ci.upper), (se, ci.se)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}
