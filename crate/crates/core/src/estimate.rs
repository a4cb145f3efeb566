//! Newton–Raphson maximum likelihood over one or more subjects that share
//! one parameter vector.
//!
//! The pooled conditional log-likelihood is concave, so the search starts at
//! `θ = 0` and only accepts steps that do not decrease it. Complete or
//! quasi-complete separation shows up as iterates running off to infinity;
//! those fits are flagged and returned rather than dropped.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::{ex_fi_forward, LagState};
use crate::model::{check_exog, hessian, log_likelihood, score, BinarySeries, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Sup-norm threshold on the score.
    pub grad_tol: f64,
    /// Sup-norm threshold on the Newton step. A vanishing score with a
    /// non-vanishing step means the curvature is collapsing (separation).
    pub step_tol: f64,
    pub step_halving_max: usize,
    /// Sup-norm of θ beyond which the fit is declared divergent.
    pub divergence_norm: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { max_iter: 100, grad_tol: 1e-8, step_tol: 1e-6, step_halving_max: 30, divergence_norm: 30.0 }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.step_halving_max == 0 {
            return invalid("iteration limits must be positive");
        }
        if !(self.grad_tol > 0.0 && self.step_tol > 0.0 && self.divergence_norm > 0.0) {
            return invalid("tolerances must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    DivergedSeparation,
    MaxIter,
}

impl FitStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitStatus::Converged => "converged",
            FitStatus::DivergedSeparation => "diverged_separation",
            FitStatus::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub id: String,
    pub series: BinarySeries,
    pub exog: Option<ExogMatrix>,
}

impl Subject {
    pub fn new(id: impl Into<String>, series: BinarySeries, exog: Option<ExogMatrix>) -> Self {
        Self { id: id.into(), series, exog }
    }

    pub fn initial_state(&self, p: usize) -> Result<LagState> {
        LagState::initial_of(&self.series, p)
    }
}

/// Subjects fitted with one shared parameter vector, kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectPanel {
    spec: ModelSpec,
    subjects: Vec<Subject>,
}

impl SubjectPanel {
    pub fn new(spec: ModelSpec, mut subjects: Vec<Subject>) -> Result<Self> {
        if subjects.is_empty() {
            return invalid("panel has no subjects");
        }
        subjects.sort_by(|a, b| a.id.cmp(&b.id));
        for w in subjects.windows(2) {
            if w[0].id == w[1].id {
                return invalid(format!("duplicate subject id {:?}", w[0].id));
            }
        }
        for s in &subjects {
            if s.series.len() < spec.p() + 2 {
                return invalid(format!(
                    "subject {:?} has {} observations; at least p + 2 = {} are needed",
                    s.id,
                    s.series.len(),
                    spec.p() + 2
                ));
            }
            check_exog(spec, s.series.len(), s.exog.as_ref())
                .map_err(|e| Error::InvalidArgument(format!("subject {:?}: {e}", s.id)))?;
        }
        Ok(Self { spec, subjects })
    }

    pub fn single(spec: ModelSpec, series: BinarySeries, exog: Option<ExogMatrix>) -> Result<Self> {
        Self::new(spec, vec![Subject::new("1", series, exog)])
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// `Σ_i (T_i − p)`: number of likelihood terms.
    pub fn n_effective(&self) -> usize {
        self.subjects.iter().map(|s| s.series.len() - self.spec.p()).sum()
    }

    /// `Σ_i T_i`.
    pub fn n_total(&self) -> usize {
        self.subjects.iter().map(|s| s.series.len()).sum()
    }

    /// Same data viewed under a different lag order.
    pub fn with_order(&self, p: usize) -> Result<Self> {
        Self::new(ModelSpec::new(p, self.spec.l())?, self.subjects.clone())
    }

    fn check_theta(&self, theta: &ParamVector) -> Result<()> {
        if theta.spec() != self.spec {
            return invalid("parameter vector does not match the panel's model");
        }
        Ok(())
    }
}

pub fn pooled_log_likelihood(panel: &SubjectPanel, theta: &ParamVector) -> Result<f64> {
    panel.check_theta(theta)?;
    panel
        .subjects
        .iter()
        .try_fold(0.0, |acc, s| Ok(acc + log_likelihood(theta, &s.series, s.exog.as_ref())?))
}

pub fn pooled_score(panel: &SubjectPanel, theta: &ParamVector) -> Result<Vec<f64>> {
    panel.check_theta(theta)?;
    let mut total = vec![0.0; panel.spec.dim()];
    for s in &panel.subjects {
        for (t, u) in total.iter_mut().zip(score(theta, &s.series, s.exog.as_ref())?) {
            *t += u;
        }
    }
    Ok(total)
}

/// Pooled empirical information (negated Hessian) at any `theta`.
pub fn pooled_em_fi(panel: &SubjectPanel, theta: &ParamVector) -> Result<FisherMatrix> {
    panel.check_theta(theta)?;
    let mut total = FisherMatrix::zeros(panel.spec.dim());
    for s in &panel.subjects {
        total += &hessian(theta, &s.series, s.exog.as_ref())?;
    }
    Ok(total)
}

/// Pooled exact information at any `theta`, each subject conditioned on its
/// own initial block and covariate trajectory.
pub fn pooled_ex_fi(panel: &SubjectPanel, theta: &ParamVector) -> Result<FisherMatrix> {
    panel.check_theta(theta)?;
    let p = panel.spec.p();
    let mut total = FisherMatrix::zeros(panel.spec.dim());
    for s in &panel.subjects {
        total += &ex_fi_forward(theta, s.initial_state(p)?, s.series.len(), s.exog.as_ref())?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta_hat: ParamVector,
    pub loglik: f64,
    pub em_fi: FisherMatrix,
    pub ex_fi: FisherMatrix,
    pub iterations: usize,
    pub status: FitStatus,
    pub n_effective: usize,
    pub score_sup_norm: f64,
}

impl FitResult {
    pub fn converged(&self) -> bool {
        self.status == FitStatus::Converged
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `H δ = U`, retrying once with `1e-8·tr(H)/d` added to the diagonal.
fn newton_direction(h: &FisherMatrix, u: &[f64]) -> Result<Vec<f64>> {
    let d = h.dim();
    let rhs = DVector::from_column_slice(u);
    let solve = |m: DMatrix<f64>| m.cholesky().map(|c| c.solve(&rhs)).filter(|x| x.iter().all(|v| v.is_finite()));
    if let Some(x) = solve(h.matrix().clone()) {
        return Ok(x.iter().copied().collect());
    }
    let ridge = 1e-8 * h.trace() / d as f64;
    let mut m = h.matrix().clone();
    for i in 0..d {
        m[(i, i)] += ridge;
    }
    solve(m)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Numerical("Newton system is singular even after ridge regularisation".into()))
}

/// Pooled maximum likelihood by Newton–Raphson with step halving.
pub fn fit_mle(panel: &SubjectPanel, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let spec = panel.spec();
    let mut theta = ParamVector::zeros(spec);
    let mut ll = pooled_log_likelihood(panel, &theta)?;
    let mut iterations = 0;
    let mut status = FitStatus::MaxIter;

    let mut u = pooled_score(panel, &theta)?;
    loop {
        let h = pooled_em_fi(panel, &theta)?;
        let step = newton_direction(&h, &u)?;
        if sup_norm(&u) < config.grad_tol && sup_norm(&step) < config.step_tol {
            status = FitStatus::Converged;
            // Take the last (tiny) Newton step as well when it is no worse.
            let polished: Vec<f64> = theta.as_slice().iter().zip(&step).map(|(t, s)| t + s).collect();
            if let Ok(polished) = ParamVector::new(spec, polished) {
                let ll_p = pooled_log_likelihood(panel, &polished)?;
                let u_p = pooled_score(panel, &polished)?;
                if ll_p >= ll && sup_norm(&u_p) <= sup_norm(&u) {
                    theta = polished;
                    ll = ll_p;
                    u = u_p;
                }
            }
            break;
        }
        if iterations >= config.max_iter {
            break;
        }

        // Near the optimum the gain `U'δ/2` drops below the rounding noise of
        // the log-likelihood, so allow a loss at that level.
        let slack = 64.0 * f64::EPSILON * (1.0 + ll.abs());
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=config.step_halving_max {
            let cand: Vec<f64> = theta.as_slice().iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            if let Ok(cand) = ParamVector::new(spec, cand) {
                let ll_c = pooled_log_likelihood(panel, &cand)?;
                if ll_c >= ll - slack {
                    accepted = Some((cand, ll_c));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((next, ll_next)) = accepted else {
            // No non-decreasing step along the Newton direction: stalled.
            break;
        };
        theta = next;
        ll = ll_next;
        iterations += 1;
        u = pooled_score(panel, &theta)?;
        if theta.sup_norm() > config.divergence_norm {
            status = FitStatus::DivergedSeparation;
            break;
        }
    }

    let em_fi = pooled_em_fi(panel, &theta)?;
    let ex_fi = pooled_ex_fi(panel, &theta)?;
    Ok(FitResult {
        loglik: ll,
        em_fi,
        ex_fi,
        iterations,
        status,
        n_effective: panel.n_effective(),
        score_sup_norm: sup_norm(&u),
        theta_hat: theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lar_panel(p: usize, ys: &[&[u8]]) -> SubjectPanel {
        let spec = ModelSpec::lar(p).unwrap();
        let subjects = ys
            .iter()
            .enumerate()
            .map(|(i, y)| Subject::new(format!("s{i}"), BinarySeries::new(y.to_vec()).unwrap(), None))
            .collect();
        SubjectPanel::new(spec, subjects).unwrap()
    }

    const Y: &[u8] = &[0, 1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1];

    #[test]
    fn converges_with_small_score() {
        let panel = lar_panel(1, &[Y]);
        let fit = fit_mle(&panel, &FitConfig::default()).unwrap();
        assert_eq!(fit.status, FitStatus::Converged);
        let u = pooled_score(&panel, &fit.theta_hat).unwrap();
        assert!(sup_norm(&u) < 1e-8);
        assert!(fit.em_fi.min_eigenvalue() > 0.0);
        assert!(fit.loglik >= pooled_log_likelihood(&panel, &ParamVector::zeros(panel.spec())).unwrap());
        assert_eq!(fit.n_effective, Y.len() - 1);
    }

    #[test]
    fn lar1_mle_matches_transition_counts() {
        // For LAR(1) the MLE reproduces the empirical transition frequencies.
        let panel = lar_panel(1, &[Y]);
        let fit = fit_mle(&panel, &FitConfig::default()).unwrap();
        let (mut n0, mut n01, mut n1, mut n11) = (0.0, 0.0, 0.0, 0.0);
        for w in Y.windows(2) {
            if w[0] == 0 {
                n0 += 1.0;
                n01 += f64::from(w[1]);
            } else {
                n1 += 1.0;
                n11 += f64::from(w[1]);
            }
        }
        let b = fit.theta_hat.beta();
        assert!((crate::model::expit(b[0]) - n01 / n0).abs() < 1e-9);
        assert!((crate::model::expit(b[0] + b[1]) - n11 / n1).abs() < 1e-9);
    }

    #[test]
    fn constant_response_diverges() {
        let panel = lar_panel(1, &[&[0, 1, 1, 1, 1, 1, 1, 1, 1, 1]]);
        let fit = fit_mle(&panel, &FitConfig::default()).unwrap();
        assert_eq!(fit.status, FitStatus::DivergedSeparation);
        assert!(fit.theta_hat.sup_norm() > 30.0);
    }

    #[test]
    fn duplicated_subject_gives_same_estimate() {
        let one = fit_mle(&lar_panel(1, &[Y]), &FitConfig::default()).unwrap();
        let two = fit_mle(&lar_panel(1, &[Y, Y]), &FitConfig::default()).unwrap();
        for (a, b) in one.theta_hat.as_slice().iter().zip(two.theta_hat.as_slice()) {
            assert!((a - b).abs() < 1e-10, "{a} {b} {} {}", one.iterations, two.iterations);
        }
        let u1 = pooled_score(&lar_panel(1, &[Y]), &two.theta_hat).unwrap();
        let u2 = pooled_score(&lar_panel(1, &[Y, Y]), &two.theta_hat).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn panel_validation() {
        let spec = ModelSpec::lar(2).unwrap();
        let short = Subject::new("a", BinarySeries::new(vec![0, 1, 1]).unwrap(), None);
        assert!(SubjectPanel::new(spec, vec![short]).is_err());
        assert!(SubjectPanel::new(spec, vec![]).is_err());
        let a = Subject::new("a", BinarySeries::new(vec![0, 1, 1, 0]).unwrap(), None);
        assert!(SubjectPanel::new(spec, vec![a.clone(), a]).is_err());
    }

    #[test]
    fn subject_order_does_not_matter() {
        let ys: [&[u8]; 3] = [Y, &Y[3..], &Y[7..]];
        let spec = ModelSpec::lar(2).unwrap();
        let mk = |order: [usize; 3]| {
            let subjects = order
                .iter()
                .map(|&i| Subject::new(format!("s{i}"), BinarySeries::new(ys[i].to_vec()).unwrap(), None))
                .collect();
            fit_mle(&SubjectPanel::new(spec, subjects).unwrap(), &FitConfig::default()).unwrap()
        };
        assert_eq!(mk([0, 1, 2]), mk([2, 0, 1]));
    }
}
