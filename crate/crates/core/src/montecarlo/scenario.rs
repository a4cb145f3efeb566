use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::{replicate_rng, simulate_series, ExogPolicy, InitialPolicy};
use crate::error::{invalid, Result};
use crate::estimate::{fit_mle, FitConfig, FitResult, FitStatus, SubjectPanel};
use crate::exact::{ex_fi_forward, LagState};
use crate::inference::{standard_errors, wald_test, FiSource};
use crate::model::{em_fi, BinarySeries, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};

pub(crate) const DOMAIN_NULL: u64 = 0;
pub(crate) const DOMAIN_ALT: u64 = 1;

/// One simulation scenario: a true parameter, a tested coordinate and a
/// replicate budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub theta_true: ParamVector,
    /// Generating parameter for the type-I-error stream; absent to skip it.
    pub theta_null: Option<ParamVector>,
    /// Coordinate of θ whose Wald test and SE are reported.
    pub tested: usize,
    pub t_len: usize,
    pub replicates: usize,
    pub seed: u64,
    pub initial: InitialPolicy,
    pub exog: ExogPolicy,
    pub fit: FitConfig,
}

impl ScenarioConfig {
    /// Defaults: null stream with the tested coordinate zeroed, iid
    /// Bernoulli(0.5) initial block, standard normal covariates when the
    /// model has any.
    pub fn new(theta_true: ParamVector, tested: usize, t_len: usize, replicates: usize, seed: u64) -> Result<Self> {
        if tested >= theta_true.spec().dim() {
            return invalid(format!("tested coordinate {tested} out of range"));
        }
        let theta_null = Some(theta_true.with(tested, 0.0)?);
        let exog = if theta_true.spec().l() > 0 { ExogPolicy::IidStandardNormal } else { ExogPolicy::None };
        let cfg = Self {
            theta_true,
            theta_null,
            tested,
            t_len,
            replicates,
            seed,
            initial: InitialPolicy::default(),
            exog,
            fit: FitConfig::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.theta_true.spec();
        if self.replicates == 0 {
            return invalid("replicates must be at least 1");
        }
        if self.tested >= spec.dim() {
            return invalid(format!("tested coordinate {} out of range", self.tested));
        }
        if self.t_len < spec.p() + 2 {
            return invalid(format!("series length {} is too short for p = {}", self.t_len, spec.p()));
        }
        if let Some(null) = &self.theta_null {
            if null.spec() != spec {
                return invalid("null and true parameters have different model specs");
            }
        }
        if spec.l() > 0 && self.exog == ExogPolicy::None {
            return invalid("model has covariates but no covariate policy");
        }
        self.initial.validate(spec.p())?;
        self.fit.validate()
    }
}

/// Everything recorded for one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    /// `None` when the fit failed outright.
    pub status: Option<FitStatus>,
    /// MLE with entries capped at `±divergence_norm`.
    pub theta_hat: Option<Vec<f64>>,
    /// Per source, indexed as [`FiSource::BOTH`]; `None` if singular.
    pub se_at_mle: [Option<Vec<f64>>; 2],
    pub se_at_truth: [Option<Vec<f64>>; 2],
    pub null_status: Option<FitStatus>,
    /// Wald rejection on the null stream; `None` when no test was possible.
    pub reject: [Option<bool>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub source: FiSource,
    pub type1_rate: Option<f64>,
    /// Per coordinate; `None` when no replicate produced a finite SE.
    pub avg_se_at_mle: Vec<Option<f64>>,
    pub se_at_truth: Vec<Option<f64>>,
    /// SD across replicates of the SE at the MLE.
    pub mc_se: Vec<Option<f64>>,
    pub n_singular_mle: usize,
    pub n_singular_truth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub tested: usize,
    pub replicates: usize,
    pub exact: SourceSummary,
    pub empirical: SourceSummary,
    pub mean_estimate: Vec<f64>,
    /// SD of the (capped) MLEs across replicates.
    pub observed_sd: Vec<f64>,
    pub n_converged: usize,
    pub n_diverged: usize,
    pub n_max_iter: usize,
    pub n_failed: usize,
    pub n_null_diverged: usize,
}

impl McSummary {
    pub fn source(&self, s: FiSource) -> &SourceSummary {
        match s {
            FiSource::Exact => &self.exact,
            FiSource::Empirical => &self.empirical,
        }
    }
}

fn source_fi(fit: &FitResult, s: FiSource) -> &FisherMatrix {
    match s {
        FiSource::Exact => &fit.ex_fi,
        FiSource::Empirical => &fit.em_fi,
    }
}

fn finite_ses(fi: &FisherMatrix, s: FiSource) -> Option<Vec<f64>> {
    standard_errors(fi, s).ok().filter(|v| v.iter().all(|x| x.is_finite()))
}

pub(crate) fn fit_single(
    spec: ModelSpec,
    series: BinarySeries,
    exog: Option<ExogMatrix>,
    config: &FitConfig,
) -> Result<FitResult> {
    fit_mle(&SubjectPanel::single(spec, series, exog)?, config)
}

/// Simulates, fits and records replicate `k`.
pub fn run_replicate(cfg: &ScenarioConfig, k: usize) -> Result<ReplicateOutcome> {
    let spec = cfg.theta_true.spec();
    let cap = cfg.fit.divergence_norm;
    let mut out = ReplicateOutcome {
        replicate: k,
        status: None,
        theta_hat: None,
        se_at_mle: [None, None],
        se_at_truth: [None, None],
        null_status: None,
        reject: [None, None],
    };

    let mut rng = replicate_rng(cfg.seed, DOMAIN_ALT, k as u64);
    let (series, exog) = simulate_series(&cfg.theta_true, cfg.t_len, &mut rng, cfg.initial, cfg.exog)?;

    let init = LagState::initial_of(&series, spec.p())?;
    if let Ok(fi) = ex_fi_forward(&cfg.theta_true, init, cfg.t_len, exog.as_ref()) {
        out.se_at_truth[0] = finite_ses(&fi, FiSource::Exact);
    }
    if let Ok(fi) = em_fi(&cfg.theta_true, &series, exog.as_ref()) {
        out.se_at_truth[1] = finite_ses(&fi, FiSource::Empirical);
    }

    if let Ok(fit) = fit_single(spec, series, exog, &cfg.fit) {
        out.status = Some(fit.status);
        out.theta_hat = Some(fit.theta_hat.as_slice().iter().map(|v| v.clamp(-cap, cap)).collect());
        for (i, s) in FiSource::BOTH.into_iter().enumerate() {
            out.se_at_mle[i] = finite_ses(source_fi(&fit, s), s);
        }
    }

    if let Some(null) = &cfg.theta_null {
        let mut rng = replicate_rng(cfg.seed, DOMAIN_NULL, k as u64);
        let (series, exog) = simulate_series(null, cfg.t_len, &mut rng, cfg.initial, cfg.exog)?;
        if let Ok(fit) = fit_single(spec, series, exog, &cfg.fit) {
            out.null_status = Some(fit.status);
            for (i, s) in FiSource::BOTH.into_iter().enumerate() {
                out.reject[i] = wald_test(&fit.theta_hat, source_fi(&fit, s), cfg.tested, s)
                    .ok()
                    .filter(|t| t.z.is_finite())
                    .map(|t| t.reject_at_05);
            }
        }
    }
    Ok(out)
}

/// Runs every replicate (in parallel) and aggregates in replicate order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<McSummary> {
    run_scenario_detailed(cfg).map(|(s, _)| s)
}

pub fn run_scenario_detailed(cfg: &ScenarioConfig) -> Result<(McSummary, Vec<ReplicateOutcome>)> {
    cfg.validate()?;
    let outcomes: Vec<ReplicateOutcome> =
        (0..cfg.replicates).into_par_iter().map(|k| run_replicate(cfg, k)).collect::<Result<_>>()?;
    Ok((summarize(cfg, &outcomes), outcomes))
}

/// Mean and sample SD (`n − 1` denominator, zero for a single value).
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((mean, (ss / (n - 1.0)).sqrt()))
}

pub fn summarize(cfg: &ScenarioConfig, outcomes: &[ReplicateOutcome]) -> McSummary {
    let d = cfg.theta_true.spec().dim();
    let count = |st: FitStatus| outcomes.iter().filter(|o| o.status == Some(st)).count();

    let estimates: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.theta_hat.as_ref()).collect();
    let mut mean_estimate = vec![f64::NAN; d];
    let mut observed_sd = vec![f64::NAN; d];
    for j in 0..d {
        let col: Vec<f64> = estimates.iter().map(|t| t[j]).collect();
        if let Some((m, s)) = mean_sd(&col) {
            mean_estimate[j] = m;
            observed_sd[j] = s;
        }
    }

    let per_source = |i: usize, source: FiSource| {
        let at_mle: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.se_at_mle[i].as_ref()).collect();
        let at_truth: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.se_at_truth[i].as_ref()).collect();
        let column = |rows: &[&Vec<f64>], j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
        let mle_stats: Vec<Option<(f64, f64)>> = (0..d).map(|j| mean_sd(&column(&at_mle, j))).collect();
        let type1_rate = cfg.theta_null.as_ref().map(|_| {
            let rejections = outcomes.iter().filter(|o| o.reject[i] == Some(true)).count();
            rejections as f64 / outcomes.len() as f64
        });
        SourceSummary {
            source,
            type1_rate,
            avg_se_at_mle: mle_stats.iter().map(|s| s.map(|(m, _)| m)).collect(),
            se_at_truth: (0..d).map(|j| mean_sd(&column(&at_truth, j)).map(|(m, _)| m)).collect(),
            mc_se: mle_stats.iter().map(|s| s.map(|(_, sd)| sd)).collect(),
            n_singular_mle: outcomes.iter().filter(|o| o.status.is_some() && o.se_at_mle[i].is_none()).count(),
            n_singular_truth: outcomes.len() - at_truth.len(),
        }
    };

    McSummary {
        tested: cfg.tested,
        replicates: outcomes.len(),
        exact: per_source(0, FiSource::Exact),
        empirical: per_source(1, FiSource::Empirical),
        mean_estimate,
        observed_sd,
        n_converged: count(FitStatus::Converged),
        n_diverged: count(FitStatus::DivergedSeparation),
        n_max_iter: count(FitStatus::MaxIter),
        n_failed: outcomes.iter().filter(|o| o.status.is_none()).count(),
        n_null_diverged: outcomes.iter().filter(|o| o.null_status == Some(FitStatus::DivergedSeparation)).count(),
    }
}
