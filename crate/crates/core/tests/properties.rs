//! Randomised invariants of the likelihood, the exact information and the
//! Wald machinery.

use larfi::estimate::{fit_mle, pooled_log_likelihood, FitConfig, Subject, SubjectPanel};
use larfi::exact::{ex_fi, ex_fi_forward, qt_forward, ExactAlgorithm, LagState};
use larfi::inference::{functional_ci, wald_ci, wald_test, FiSource, Functional, Transform};
use larfi::model::{hessian, log_likelihood, score};
use larfi::{BinarySeries, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};
use proptest::prelude::*;

/// A model with random order, covariate count, θ, series and covariates.
#[derive(Debug, Clone)]
struct Case {
    theta: ParamVector,
    series: BinarySeries,
    exog: Option<ExogMatrix>,
}

impl Case {
    fn initial(&self) -> LagState {
        LagState::initial_of(&self.series, self.theta.spec().p()).unwrap()
    }
}

fn case(max_p: usize, max_l: usize, max_t: usize, bound: f64) -> impl Strategy<Value = Case> {
    (1..=max_p, 0..=max_l).prop_flat_map(move |(p, l)| {
        let d = p + 1 + l;
        (
            proptest::collection::vec(-bound..bound, d),
            (p + 2..=max_t).prop_flat_map(move |t| {
                (proptest::collection::vec(0u8..=1, t), proptest::collection::vec(-2.0..2.0f64, t * l))
            }),
        )
            .prop_map(move |(theta, (y, x))| {
                let spec = ModelSpec::new(p, l).unwrap();
                let t = y.len();
                Case {
                    theta: ParamVector::new(spec, theta).unwrap(),
                    series: BinarySeries::new(y).unwrap(),
                    exog: (l > 0).then(|| ExogMatrix::new(t, l, x).unwrap()),
                }
            })
    })
}

fn assert_psd(m: &FisherMatrix, what: &str) {
    let tol = 1e-10 * m.trace().abs().max(1.0);
    assert!(m.min_eigenvalue() >= -tol, "{what}: min eigenvalue {} below −{tol}", m.min_eigenvalue());
}

fn sub(a: &FisherMatrix, b: &FisherMatrix) -> FisherMatrix {
    FisherMatrix::from_matrix(a.matrix() - b.matrix()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn state_distributions_are_probability_vectors(c in case(4, 2, 30, 3.0)) {
        for q in qt_forward(&c.theta, c.initial(), c.series.len(), c.exog.as_ref()).unwrap() {
            prop_assert!((q.total() - 1.0).abs() <= 1e-12, "t = {} total {}", q.t, q.total());
            prop_assert!(q.q.iter().all(|&v| v >= 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn score_matches_central_differences(c in case(3, 2, 40, 2.0)) {
        let s = score(&c.theta, &c.series, c.exog.as_ref()).unwrap();
        let h = 1e-5;
        let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (j, sj) in s.iter().enumerate() {
            let up = c.theta.with(j, c.theta.get(j) + h).unwrap();
            let dn = c.theta.with(j, c.theta.get(j) - h).unwrap();
            let fd = (log_likelihood(&up, &c.series, c.exog.as_ref()).unwrap()
                - log_likelihood(&dn, &c.series, c.exog.as_ref()).unwrap())
                / (2.0 * h);
            prop_assert!((fd - sj).abs() <= 1e-4 * scale, "coordinate {j}: analytic {sj} vs numeric {fd}");
        }
    }

    #[test]
    fn hessian_is_symmetric_psd(c in case(3, 2, 40, 3.0)) {
        let h = hessian(&c.theta, &c.series, c.exog.as_ref()).unwrap();
        let d = h.dim();
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
        assert_psd(&h, "negated Hessian");
    }

    #[test]
    fn log_likelihood_is_concave(c in case(3, 2, 40, 3.0), other in proptest::collection::vec(-3.0..3.0f64, 6), lambda in 0.01..0.99f64) {
        let spec = c.theta.spec();
        let t2 = ParamVector::new(spec, other[..spec.dim()].to_vec()).unwrap();
        let mix: Vec<f64> = c.theta.as_slice().iter().zip(t2.as_slice()).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        let mix = ParamVector::new(spec, mix).unwrap();
        let ll = |t: &ParamVector| log_likelihood(t, &c.series, c.exog.as_ref()).unwrap();
        prop_assert!(ll(&mix) >= lambda * ll(&c.theta) + (1.0 - lambda) * ll(&t2) - 1e-12);
    }

    #[test]
    fn exact_information_is_psd_and_grows_with_t(c in case(3, 2, 30, 3.0)) {
        let t_len = c.series.len();
        let init = c.initial();
        // Both horizons read the same covariate rows.
        let shorter = c.exog.as_ref().map(|x| ExogMatrix::new(t_len - 1, x.cols(), x.data()[..(t_len - 1) * x.cols()].to_vec()).unwrap());
        let big = ex_fi_forward(&c.theta, init, t_len, c.exog.as_ref()).unwrap();
        let small = ex_fi_forward(&c.theta, init, t_len - 1, shorter.as_ref()).unwrap();
        assert_psd(&big, "Ex-FI");
        assert_psd(&sub(&big, &small), "Ex-FI increment");
    }

    #[test]
    fn lar1_information_has_equal_lag_entries(beta in proptest::collection::vec(-4.0..4.0f64, 2), t_len in 2usize..20, y1 in 0u8..=1) {
        let theta = ParamVector::lar(&beta).unwrap();
        let init = LagState::from_lags(&[y1]).unwrap();
        for algo in ExactAlgorithm::ALL {
            let fi = ex_fi(algo, &theta, init, t_len, None).unwrap();
            prop_assert_eq!(fi.get(1, 1), fi.get(0, 1), "{}", algo.name());
        }
    }

    #[test]
    fn zero_covariates_reproduce_the_lar_block(c in case(3, 0, 30, 3.0), alpha in proptest::collection::vec(-2.0..2.0f64, 2)) {
        let spec = c.theta.spec();
        let larx = ParamVector::from_parts(ModelSpec::new(spec.p(), 2).unwrap(), &alpha, c.theta.as_slice()).unwrap();
        let zeros = ExogMatrix::zeros(c.series.len(), 2);
        let init = c.initial();
        let a = ex_fi_forward(&c.theta, init, c.series.len(), None).unwrap();
        let b = ex_fi_forward(&larx, init, c.series.len(), Some(&zeros)).unwrap();
        let d = spec.dim();
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(a.get(i, j), b.get(i + 2, j + 2));
            }
        }
        prop_assert_eq!(
            log_likelihood(&c.theta, &c.series, None).unwrap(),
            log_likelihood(&larx, &c.series, Some(&zeros)).unwrap()
        );
    }

    #[test]
    fn oracle_algorithms_agree(c in case(3, 1, 12, 2.0)) {
        let spec = c.theta.spec();
        let t_len = c.series.len();
        let reference = ex_fi_forward(&c.theta, c.initial(), t_len, c.exog.as_ref()).unwrap();
        for algo in ExactAlgorithm::ALL.into_iter().filter(|a| a.applicable(spec, t_len)) {
            let other = ex_fi(algo, &c.theta, c.initial(), t_len, c.exog.as_ref()).unwrap();
            prop_assert!(other.max_abs_diff(&reference) < 1e-10, "{}: {}", algo.name(), other.max_abs_diff(&reference));
        }
    }

    #[test]
    fn interval_width_grows_with_level(c in case(2, 1, 60, 1.0)) {
        let fi = ex_fi_forward(&c.theta, c.initial(), c.series.len(), c.exog.as_ref()).unwrap();
        for j in 0..fi.dim() {
            let w = |level| wald_ci(&c.theta, &fi, j, level, FiSource::Exact).map(|ci| ci.width());
            let (Ok(w90), Ok(w95), Ok(w99)) = (w(0.90), w(0.95), w(0.99)) else { continue };
            prop_assert!(w90 < w95 && w95 < w99);
        }
    }

    #[test]
    fn identity_functional_is_the_wald_interval(c in case(2, 1, 60, 1.0), level in 0.5..0.999f64) {
        let fi = ex_fi_forward(&c.theta, c.initial(), c.series.len(), c.exog.as_ref()).unwrap();
        for j in 0..fi.dim() {
            let Ok(ci) = wald_ci(&c.theta, &fi, j, level, FiSource::Exact) else { continue };
            let f = functional_ci(&c.theta, &fi, &Functional::coordinate(fi.dim(), j), level, FiSource::Exact).unwrap();
            prop_assert_eq!((ci.point, ci.lower, ci.upper), (f.point, f.lower, f.upper));
        }
    }

    #[test]
    fn transformed_intervals_map_endpoints(c in case(2, 1, 60, 1.0), weights in proptest::collection::vec(-1.0..1.0f64, 4)) {
        let fi = ex_fi_forward(&c.theta, c.initial(), c.series.len(), c.exog.as_ref()).unwrap();
        let d = fi.dim();
        let linear = Functional::new(weights[..d].to_vec(), Transform::Identity).unwrap();
        let Ok(base) = functional_ci(&c.theta, &fi, &linear, 0.95, FiSource::Exact) else { return Ok(()) };
        for t in [Transform::Expit, Transform::Exp] {
            let f = Functional::new(weights[..d].to_vec(), t).unwrap();
            let ci = functional_ci(&c.theta, &fi, &f, 0.95, FiSource::Exact).unwrap();
            prop_assert_eq!(ci.lower, t.apply(base.lower));
            prop_assert_eq!(ci.upper, t.apply(base.upper));
            prop_assert_eq!(ci.point, t.apply(base.point));
        }
    }

    #[test]
    fn test_rejects_exactly_when_interval_excludes_zero(c in case(2, 1, 60, 1.5)) {
        let fi = ex_fi_forward(&c.theta, c.initial(), c.series.len(), c.exog.as_ref()).unwrap();
        for j in 0..fi.dim() {
            let (Ok(t), Ok(ci)) = (
                wald_test(&c.theta, &fi, j, FiSource::Exact),
                wald_ci(&c.theta, &fi, j, 0.95, FiSource::Exact),
            ) else { continue };
            prop_assert_eq!(t.reject_at_05, !ci.contains(0.0), "z = {}, ci = ({}, {})", t.z, ci.lower, ci.upper);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fit_is_order_invariant_and_improves_on_start(
        subjects in proptest::collection::vec(proptest::collection::vec(0u8..=1, 15..40), 2..5),
        rotate in 0usize..4,
    ) {
        let spec = ModelSpec::lar(1).unwrap();
        let make = |order: &[usize]| {
            let s = order
                .iter()
                .map(|&i| Subject::new(format!("id{i}"), BinarySeries::new(subjects[i].clone()).unwrap(), None))
                .collect();
            SubjectPanel::new(spec, s).unwrap()
        };
        let n = subjects.len();
        let forward: Vec<usize> = (0..n).collect();
        let mut rotated = forward.clone();
        rotated.rotate_left(rotate % n);
        let config = FitConfig::default();
        let a = fit_mle(&make(&forward), &config).unwrap();
        let b = fit_mle(&make(&rotated), &config).unwrap();
        prop_assert_eq!(a.theta_hat.as_slice(), b.theta_hat.as_slice());
        prop_assert_eq!(a.status, b.status);
        let at_zero = pooled_log_likelihood(&make(&forward), &ParamVector::zeros(spec)).unwrap();
        prop_assert!(a.loglik >= at_zero);
        if a.converged() {
            prop_assert!(a.score_sup_norm < config.grad_tol);
            prop_assert!(a.em_fi.min_eigenvalue() > 0.0);
        }
    }
}

#[test]
fn zero_parameter_information_grows_linearly() {
    let theta = ParamVector::lar(&[0.0, 0.0]).unwrap();
    for y1 in [0u8, 1] {
        for t_len in 2..30 {
            let fi = ex_fi_forward(&theta, LagState::from_lags(&[y1]).unwrap(), t_len, None).unwrap();
            assert_eq!(fi.get(0, 0), 0.25 * (t_len - 1) as f64);
        }
    }
}
