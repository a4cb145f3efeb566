//! Wald tests and intervals for coefficients and for monotone functionals of
//! a linear combination of coefficients, plus AIC/BIC lag-order selection.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::estimate::{fit_mle, FitConfig, FitStatus, Subject, SubjectPanel};
use crate::model::{expit, BinarySeries, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};

/// Two-sided 5% normal critical value.
pub const Z_975: f64 = 1.959964;

/// Which information matrix an interval was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiSource {
    Exact,
    Empirical,
}

impl FiSource {
    pub const BOTH: [FiSource; 2] = [FiSource::Exact, FiSource::Empirical];

    pub fn as_str(&self) -> &'static str {
        match self {
            FiSource::Exact => "exact",
            FiSource::Empirical => "empirical",
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FiSource::Exact => "exact information",
            FiSource::Empirical => "empirical information",
        }
    }
}

impl std::str::FromStr for FiSource {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "ex" => Ok(FiSource::Exact),
            "empirical" | "em" => Ok(FiSource::Empirical),
            other => invalid(format!("unknown information source {other:?} (expected exact or empirical)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Log-odds scale.
    Identity,
    /// Probability scale.
    Expit,
    /// Odds scale.
    Exp,
}

impl Transform {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Expit => expit(x),
            Transform::Exp => x.exp(),
        }
    }
}

/// `transform(c'θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    pub c: Vec<f64>,
    pub transform: Transform,
}

impl Functional {
    pub fn new(c: Vec<f64>, transform: Transform) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return invalid("functional weights must be finite");
        }
        Ok(Self { c, transform })
    }

    /// Parses `kind|name=value|...`.
    ///
    /// `kind` is `prob`, `odds` or `logit`. Names are `lag` (same as `lag1`),
    /// `lagK` for `K ≤ p`, or a covariate name. The intercept weight is 1 and
    /// unnamed terms are 0, so `prob|lag=1|stress=0` is
    /// `P(Y_t = 1 | y_{t−1} = 1, y_{t−2..} = 0, stress = 0)`.
    pub fn parse(text: &str, spec: ModelSpec, covariates: &[String]) -> Result<Self> {
        let mut parts = text.split('|').map(str::trim);
        let transform = match parts.next().unwrap_or("") {
            "prob" => Transform::Expit,
            "odds" => Transform::Exp,
            "logit" => Transform::Identity,
            other => return invalid(format!("functional kind {other:?} must be prob, odds or logit")),
        };
        if covariates.len() != spec.l() {
            return invalid(format!("{} covariate names for a model with {} covariates", covariates.len(), spec.l()));
        }
        let mut c = vec![0.0; spec.dim()];
        c[spec.intercept_index()] = 1.0;
        let mut seen = Vec::new();
        for part in parts {
            let Some((key, value)) = part.split_once('=') else {
                return invalid(format!("functional term {part:?} must look like name=value"));
            };
            let (key, value) = (key.trim(), value.trim());
            let v: f64 = value
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| crate::Error::InvalidArgument(format!("functional value {value:?} is not a finite number")))?;
            let idx = if let Some(k) = covariates.iter().position(|c| c == key) {
                k
            } else if let Some(rest) = key.strip_prefix("lag") {
                let k: usize = if rest.is_empty() { 1 } else { rest.parse().unwrap_or(0) };
                if k == 0 || k > spec.p() {
                    return invalid(format!("functional term {key:?} is not a lag in 1..={}", spec.p()));
                }
                spec.lag_index(k)
            } else {
                return invalid(format!("functional term {key:?} is neither a lag nor a covariate"));
            };
            if seen.contains(&idx) {
                return invalid(format!("functional term {key:?} given twice"));
            }
            seen.push(idx);
            c[idx] = v;
        }
        Ok(Self { c, transform })
    }

    /// Unit vector on one coordinate, identity scale.
    pub fn coordinate(d: usize, j: usize) -> Self {
        let mut c = vec![0.0; d];
        c[j] = 1.0;
        Self { c, transform: Transform::Identity }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub se: f64,
    pub fi_source: FiSource,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldTest {
    pub z: f64,
    pub se: f64,
    pub reject_at_05: bool,
}

/// Normal quantile `z_{1-(1-level)/2}`.
pub fn z_quantile(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} must lie in (0, 1)"));
    }
    if level == 0.95 {
        return Ok(Z_975);
    }
    let std = Normal::standard();
    Ok(std.inverse_cdf(1.0 - (1.0 - level) / 2.0))
}

/// Square roots of the diagonal of `fi⁻¹`.
pub fn standard_errors(fi: &FisherMatrix, source: FiSource) -> Result<Vec<f64>> {
    let inv = fi.inverse(source.label())?;
    Ok((0..fi.dim()).map(|j| inv[(j, j)].sqrt()).collect())
}

fn check_coord(theta_hat: &ParamVector, fi: &FisherMatrix, coord: usize) -> Result<()> {
    let d = theta_hat.spec().dim();
    if fi.dim() != d {
        return invalid(format!("information matrix is {0}x{0} but θ has {d} entries", fi.dim()));
    }
    if coord >= d {
        return invalid(format!("coordinate {coord} out of range for {d} parameters"));
    }
    Ok(())
}

/// `θ̂_j ± z·sqrt([fi⁻¹]_jj)`.
pub fn wald_ci(
    theta_hat: &ParamVector,
    fi: &FisherMatrix,
    coord: usize,
    level: f64,
    source: FiSource,
) -> Result<IntervalEstimate> {
    check_coord(theta_hat, fi, coord)?;
    functional_ci(theta_hat, fi, &Functional::coordinate(fi.dim(), coord), level, source)
}

/// Tests `H₀: θ_j = 0` at the 5% level.
pub fn wald_test(theta_hat: &ParamVector, fi: &FisherMatrix, coord: usize, source: FiSource) -> Result<WaldTest> {
    check_coord(theta_hat, fi, coord)?;
    let inv = fi.inverse(source.label())?;
    let se = inv[(coord, coord)].sqrt();
    let z = theta_hat.get(coord) / se;
    Ok(WaldTest { z, se, reject_at_05: z.abs() > Z_975 })
}

/// Interval for `transform(c'θ)`: built on the linear scale, then both
/// endpoints are mapped through the monotone transform.
pub fn functional_ci(
    theta_hat: &ParamVector,
    fi: &FisherMatrix,
    f: &Functional,
    level: f64,
    source: FiSource,
) -> Result<IntervalEstimate> {
    let d = theta_hat.spec().dim();
    if fi.dim() != d || f.c.len() != d {
        return invalid(format!("functional and information must have dimension {d}"));
    }
    let z = z_quantile(level)?;
    let inv = fi.inverse(source.label())?;
    let c = DVector::from_column_slice(&f.c);
    let var = c.dot(&(&inv * &c));
    let se = var.max(0.0).sqrt();
    let eta: f64 = f.c.iter().zip(theta_hat.as_slice()).map(|(a, b)| a * b).sum();
    Ok(IntervalEstimate {
        point: f.transform.apply(eta),
        lower: f.transform.apply(eta - z * se),
        upper: f.transform.apply(eta + z * se),
        level,
        se,
        fi_source: source,
    })
}

/// `(AIC, BIC) = (−2ℓ + 2p, −2ℓ + p·log n)` with the lag order `p` as the
/// penalty count and `n` the pooled number of observations.
pub fn information_criteria(loglik: f64, p: usize, n_total: usize) -> (f64, f64) {
    let pf = p as f64;
    (-2.0 * loglik + 2.0 * pf, -2.0 * loglik + pf * (n_total as f64).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub p: usize,
    pub status: Option<FitStatus>,
    pub loglik: Option<f64>,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub aic_best: bool,
    pub bic_best: bool,
}

/// Fits each candidate order and tabulates [`information_criteria`].
///
/// Every candidate is fitted on the same modelled sample: the first
/// `max(candidates)` observations of each subject are conditioned on, so the
/// log-likelihoods are comparable and nested. The penalty counts the lag
/// order `p`, not the parameter count, and `n` is the pooled number of
/// observations `Σ_i T_i`. Rows whose fit does not converge carry no criteria.
pub fn order_selection(panel: &SubjectPanel, candidates: &[usize], config: &FitConfig) -> Result<Vec<OrderRow>> {
    if candidates.is_empty() {
        return invalid("no candidate lag orders");
    }
    let min_len = panel.subjects().iter().map(|s| s.series.len()).min().unwrap_or(0);
    let p_max = candidates.iter().copied().max().unwrap_or(0);
    if min_len < p_max + 2 {
        return invalid(format!("lag order {p_max} needs every subject to have at least {} observations", p_max + 2));
    }
    let mut rows = Vec::with_capacity(candidates.len());
    for &p in candidates {
        let sub = common_sample(panel, p, p_max)?;
        let row = match fit_mle(&sub, config) {
            Ok(fit) if fit.converged() => {
                let (aic, bic) = information_criteria(fit.loglik, p, panel.n_total());
                OrderRow {
                    p,
                    status: Some(fit.status),
                    loglik: Some(fit.loglik),
                    aic: Some(aic),
                    bic: Some(bic),
                    aic_best: false,
                    bic_best: false,
                }
            }
            Ok(fit) => OrderRow { p, status: Some(fit.status), loglik: None, aic: None, bic: None, aic_best: false, bic_best: false },
            Err(_) => OrderRow { p, status: None, loglik: None, aic: None, bic: None, aic_best: false, bic_best: false },
        };
        rows.push(row);
    }
    if let Some(i) = argmin(rows.iter().map(|r| r.aic)) {
        rows[i].aic_best = true;
    }
    if let Some(i) = argmin(rows.iter().map(|r| r.bic)) {
        rows[i].bic_best = true;
    }
    Ok(rows)
}

/// The panel under order `p` with the first `p_max − p` observations of each
/// subject dropped, so that every order models times `p_max+1..T`.
fn common_sample(panel: &SubjectPanel, p: usize, p_max: usize) -> Result<SubjectPanel> {
    let skip = p_max - p;
    let subjects = panel
        .subjects()
        .iter()
        .map(|s| {
            let series = BinarySeries::new(s.series.values()[skip..].to_vec())?;
            let exog = match &s.exog {
                Some(x) => Some(ExogMatrix::new(x.rows() - skip, x.cols(), x.data()[skip * x.cols()..].to_vec())?),
                None => None,
            };
            Ok(Subject::new(s.id.clone(), series, exog))
        })
        .collect::<Result<Vec<_>>>()?;
    SubjectPanel::new(ModelSpec::new(p, panel.spec().l())?, subjects)
}

fn argmin(values: impl Iterator<Item = Option<f64>>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}
