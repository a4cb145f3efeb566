use std::ffi::CStr;
use std::ptr;

use larfi_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(larfi_last_error()) }.to_string_lossy().into_owned()
}

fn model(p: usize, l: usize, values: &[f64]) -> *mut LarfiModel {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { larfi_model_new(p, l, values.as_ptr(), values.len(), &mut m) }, LarfiStatus::Ok);
    m
}

fn series(y: &[u8], exog: &[f64], cols: usize) -> *mut LarfiSeries {
    let mut s = ptr::null_mut();
    let x = if exog.is_empty() { ptr::null() } else { exog.as_ptr() };
    assert_eq!(unsafe { larfi_series_new(y.as_ptr(), y.len(), x, cols, &mut s) }, LarfiStatus::Ok, "{}", last_error());
    s
}

/// A simulated LAR(1) path with a fixed seed.
fn wobble(n: usize) -> Vec<u8> {
    use larfi::montecarlo::{replicate_rng, simulate_series, ExogPolicy, InitialPolicy};
    let theta = larfi::ParamVector::lar(&[0.1, 0.5]).unwrap();
    let mut rng = replicate_rng(7, 0, n as u64);
    let (s, _) = simulate_series(&theta, n, &mut rng, InitialPolicy::default(), ExogPolicy::None).unwrap();
    s.values().to_vec()
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(larfi_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn every_algorithm_gives_the_four_step_value() {
    // Zero parameters, T = 4, starting at 0: weights 1/4 on three steps.
    let m = model(1, 0, &[0.0, 0.0]);
    let s = series(&[0, 1, 0, 1], &[], 0);
    for algo in [
        LarfiAlgorithm::Forward,
        LarfiAlgorithm::FunctionalIteration,
        LarfiAlgorithm::ClosedForm,
        LarfiAlgorithm::BruteForce,
    ] {
        let mut out = [0.0; 4];
        let st = unsafe { larfi_ex_fi(m, s, algo as u32, out.as_mut_ptr(), out.len()) };
        assert_eq!(st, LarfiStatus::Ok, "{algo:?}: {}", last_error());
        assert_eq!(out, [0.75, 0.25, 0.25, 0.25], "{algo:?}");
    }
    unsafe {
        larfi_series_free(s);
        larfi_model_free(m);
    }
}

#[test]
fn likelihood_functions_agree_with_the_library() {
    let y = wobble(40);
    let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
    let theta = [0.4, -0.2, 0.8];
    let m = model(1, 1, &theta);
    let s = series(&y, &x, 1);

    let lib_theta = larfi::ParamVector::new(larfi::ModelSpec::new(1, 1).unwrap(), theta.to_vec()).unwrap();
    let lib_y = larfi::BinarySeries::new(y.clone()).unwrap();
    let lib_x = larfi::ExogMatrix::new(40, 1, x.clone()).unwrap();

    let mut ll = 0.0;
    assert_eq!(unsafe { larfi_loglik(m, s, &mut ll) }, LarfiStatus::Ok);
    assert_eq!(ll, larfi::model::log_likelihood(&lib_theta, &lib_y, Some(&lib_x)).unwrap());

    let mut u = [0.0; 3];
    assert_eq!(unsafe { larfi_score(m, s, u.as_mut_ptr(), 3) }, LarfiStatus::Ok);
    assert_eq!(u.to_vec(), larfi::model::score(&lib_theta, &lib_y, Some(&lib_x)).unwrap());

    let mut fi = [0.0; 9];
    assert_eq!(unsafe { larfi_em_fi(m, s, fi.as_mut_ptr(), 9) }, LarfiStatus::Ok);
    let expected = larfi::model::em_fi(&lib_theta, &lib_y, Some(&lib_x)).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(fi[i * 3 + j], expected.get(i, j));
        }
    }
    unsafe {
        larfi_series_free(s);
        larfi_model_free(m);
    }
}

#[test]
fn fit_and_interval_round_trip() {
    let a = series(&wobble(120), &[], 0);
    let b = series(&wobble(90)[7..], &[], 0);
    let handles = [a as *const LarfiSeries, b as *const LarfiSeries];
    let mut fit = ptr::null_mut();
    assert_eq!(unsafe { larfi_fit(handles.as_ptr(), 2, 1, 100, &mut fit) }, LarfiStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { larfi_fit_dim(fit) }, 2);

    let mut status = LarfiFitStatus::MaxIter;
    assert_eq!(unsafe { larfi_fit_status(fit, &mut status) }, LarfiStatus::Ok);
    assert_eq!(status, LarfiFitStatus::Converged);

    let mut theta = [0.0; 2];
    assert_eq!(unsafe { larfi_fit_theta(fit, theta.as_mut_ptr(), 2) }, LarfiStatus::Ok);
    for source in [LarfiSource::Exact, LarfiSource::Empirical] {
        let mut fi = [0.0; 4];
        assert_eq!(unsafe { larfi_fit_information(fit, source as u32, fi.as_mut_ptr(), 4) }, LarfiStatus::Ok);
        let (mut lo, mut hi, mut se) = (0.0, 0.0, 0.0);
        assert_eq!(unsafe { larfi_wald_ci(fit, 1, 0.95, source as u32, &mut lo, &mut hi, &mut se) }, LarfiStatus::Ok);
        // 2x2 inverse by hand.
        let det = fi[0] * fi[3] - fi[1] * fi[2];
        let expected_se = (fi[0] / det).sqrt();
        assert!((se - expected_se).abs() < 1e-12 * expected_se);
        assert!(lo < theta[1] && theta[1] < hi);
        assert!(((hi - lo) / (2.0 * se) - larfi::inference::z_quantile(0.95).unwrap()).abs() < 1e-12);
    }
    let mut ll = 0.0;
    assert_eq!(unsafe { larfi_fit_loglik(fit, &mut ll) }, LarfiStatus::Ok);
    assert!(ll < 0.0);
    unsafe {
        larfi_fit_free(fit);
        larfi_series_free(a);
        larfi_series_free(b);
    }
}

#[test]
fn separated_fit_is_flagged() {
    let s = series(&[0, 0, 0, 1, 1, 1, 1, 1], &[], 0);
    let handles = [s as *const LarfiSeries];
    let mut fit = ptr::null_mut();
    assert_eq!(unsafe { larfi_fit(handles.as_ptr(), 1, 1, 100, &mut fit) }, LarfiStatus::Ok);
    let mut status = LarfiFitStatus::Converged;
    unsafe { larfi_fit_status(fit, &mut status) };
    assert_eq!(status, LarfiFitStatus::DivergedSeparation);
    unsafe {
        larfi_fit_free(fit);
        larfi_series_free(s);
    }
}

#[test]
fn errors_carry_a_status_and_message() {
    let mut m = ptr::null_mut();
    let st = unsafe { larfi_model_new(1, 0, [0.0].as_ptr(), 1, &mut m) };
    assert_eq!(st, LarfiStatus::InvalidArgument);
    assert!(last_error().contains("length 1"), "{}", last_error());
    assert!(m.is_null());

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { larfi_series_new([0u8, 2].as_ptr(), 2, ptr::null(), 0, &mut s) }, LarfiStatus::InvalidArgument);
    assert_eq!(unsafe { larfi_series_new(ptr::null(), 3, ptr::null(), 0, &mut s) }, LarfiStatus::NullPointer);

    let m = model(1, 0, &[0.1, 0.5]);
    let s = series(&wobble(30), &[], 0);
    let mut small = [0.0; 3];
    assert_eq!(unsafe { larfi_em_fi(m, s, small.as_mut_ptr(), 3) }, LarfiStatus::BufferTooSmall);
    assert_eq!(unsafe { larfi_ex_fi(m, s, 9, small.as_mut_ptr(), 3) }, LarfiStatus::InvalidArgument);
    assert!(last_error().contains("algorithm"));
    let mut ll = 0.0;
    assert_eq!(unsafe { larfi_loglik(ptr::null(), s, &mut ll) }, LarfiStatus::NullPointer);
    assert_eq!(unsafe { larfi_loglik(m, s, &mut ll) }, LarfiStatus::Ok);
    assert_eq!(last_error(), "");

    let long = series(&wobble(40), &[], 0);
    let mut out = [0.0; 4];
    assert_eq!(unsafe { larfi_ex_fi(m, long, LarfiAlgorithm::BruteForce as u32, out.as_mut_ptr(), 4) }, LarfiStatus::SizeLimit);

    let x = series(&wobble(30), &vec![0.0; 30], 1);
    assert_eq!(unsafe { larfi_loglik(m, x, &mut ll) }, LarfiStatus::InvalidArgument);
    unsafe {
        larfi_model_free(m);
        for h in [s, long, x] {
            larfi_series_free(h);
        }
        larfi_model_free(ptr::null_mut());
    }
    assert_eq!(unsafe { larfi_model_dim(ptr::null()) }, 0);
}
