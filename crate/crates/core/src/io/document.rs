use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::estimate::{FitResult, FitStatus, SubjectPanel};
use crate::inference::{functional_ci, information_criteria, wald_ci, wald_test, FiSource, Functional, IntervalEstimate, OrderRow};
use crate::model::FisherMatrix;

pub const TOOL_NAME: &str = "larfi";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// SHA-256 of `"blob <len>\0" ++ bytes`, the git object framing.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Hash of the compact JSON form of a config. Object keys serialize in
/// sorted order, so equal configs hash equally.
pub fn config_hash(config: &serde_json::Value) -> String {
    content_hash(serde_json::to_string(config).expect("JSON values always serialize").as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Fully resolved configuration; re-running from it reproduces the output.
    pub config: serde_json::Value,
    pub config_hash: String,
}

impl RunMetadata {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        let config_hash = config_hash(&config);
        Self { tool: TOOL_NAME.into(), version: TOOL_VERSION.into(), command: command.into(), seed, config, config_hash }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientInference {
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
    pub reject_at_05: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub name: String,
    pub estimate: f64,
    /// `None` when that information matrix is not positive definite.
    pub exact: Option<CoefficientInference>,
    pub empirical: Option<CoefficientInference>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub label: String,
    pub functional: Functional,
    pub exact: Option<IntervalEstimate>,
    pub empirical: Option<IntervalEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub p: usize,
    pub l: usize,
    pub covariates: Vec<String>,
    pub coefficient_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n_subjects: usize,
    pub n_effective: usize,
    pub n_total: usize,
}

/// Everything `fit` reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub metadata: RunMetadata,
    pub model: ModelSummary,
    pub data: DataSummary,
    pub status: FitStatus,
    pub iterations: usize,
    pub score_sup_norm: f64,
    pub loglik: f64,
    /// Absent unless the fit converged.
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub level: f64,
    pub coefficients: Vec<CoefficientReport>,
    pub functionals: Vec<FunctionalReport>,
    pub ex_fi: FisherMatrix,
    pub em_fi: FisherMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_selection: Option<Vec<OrderRow>>,
}

fn fi_for(fit: &FitResult, s: FiSource) -> &FisherMatrix {
    match s {
        FiSource::Exact => &fit.ex_fi,
        FiSource::Empirical => &fit.em_fi,
    }
}

impl ResultDocument {
    pub fn from_fit(
        metadata: RunMetadata,
        panel: &SubjectPanel,
        covariates: &[String],
        fit: &FitResult,
        level: f64,
        functionals: &[(String, Functional)],
    ) -> Result<Self> {
        let spec = panel.spec();
        let names = spec.coefficient_names(Some(covariates));
        let coef = |j: usize, s: FiSource| -> Option<CoefficientInference> {
            let ci = wald_ci(&fit.theta_hat, fi_for(fit, s), j, level, s).ok()?;
            let t = wald_test(&fit.theta_hat, fi_for(fit, s), j, s).ok()?;
            Some(CoefficientInference { se: ci.se, lower: ci.lower, upper: ci.upper, z: t.z, reject_at_05: t.reject_at_05 })
                .filter(|c| c.se.is_finite() && c.lower.is_finite() && c.upper.is_finite())
        };
        let coefficients = names
            .iter()
            .enumerate()
            .map(|(j, n)| CoefficientReport {
                name: n.clone(),
                estimate: fit.theta_hat.get(j),
                exact: coef(j, FiSource::Exact),
                empirical: coef(j, FiSource::Empirical),
            })
            .collect();
        let mut func_reports = Vec::with_capacity(functionals.len());
        for (label, f) in functionals {
            if f.c.len() != spec.dim() {
                return invalid(format!("functional {label:?} has {} weights for {} parameters", f.c.len(), spec.dim()));
            }
            let one = |s: FiSource| functional_ci(&fit.theta_hat, fi_for(fit, s), f, level, s).ok();
            func_reports.push(FunctionalReport {
                label: label.clone(),
                functional: f.clone(),
                exact: one(FiSource::Exact),
                empirical: one(FiSource::Empirical),
            });
        }
        let (aic, bic) = if fit.converged() {
            let (a, b) = information_criteria(fit.loglik, spec.p(), panel.n_total());
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        Ok(Self {
            metadata,
            model: ModelSummary { p: spec.p(), l: spec.l(), covariates: covariates.to_vec(), coefficient_names: names },
            data: DataSummary { n_subjects: panel.len(), n_effective: panel.n_effective(), n_total: panel.n_total() },
            status: fit.status,
            iterations: fit.iterations,
            score_sup_norm: fit.score_sup_norm,
            loglik: fit.loglik,
            aic,
            bic,
            level,
            coefficients,
            functionals: func_reports,
            ex_fi: fit.ex_fi.clone(),
            em_fi: fit.em_fi.clone(),
            order_selection: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One file written by a study run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputRecord {
    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Ok(Self { path: path.display().to_string(), bytes: bytes.len() as u64, sha256: content_hash(&bytes) })
    }
}

/// Sidecar written next to every study output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub metadata: RunMetadata,
    pub study: String,
    pub reference_version: u32,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
