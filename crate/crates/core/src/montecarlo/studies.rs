use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{fit_single, mean_sd};
use super::sim::{replicate_rng, simulate_series, ExogPolicy, InitialPolicy};
use crate::error::{invalid, Result};
use crate::estimate::{FitConfig, FitResult, FitStatus};
use crate::inference::{standard_errors, FiSource};
use crate::model::{FisherMatrix, ParamVector};

/// Domains below this are reserved for scenario streams.
const STUDY_DOMAIN_BASE: u64 = 16;

/// A `(T, θ)` point of a study grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub t_len: usize,
    pub theta: ParamVector,
}

/// Settings shared by every grid study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySettings {
    pub replicates: usize,
    pub seed: u64,
    pub initial: InitialPolicy,
    pub exog: ExogPolicy,
    pub fit: FitConfig,
}

impl StudySettings {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self { replicates, seed, initial: InitialPolicy::default(), exog: ExogPolicy::None, fit: FitConfig::default() }
    }

    fn validate(&self, grid: &[GridPoint]) -> Result<()> {
        if grid.is_empty() {
            return invalid("study grid is empty");
        }
        if self.replicates == 0 {
            return invalid("replicates must be at least 1");
        }
        for g in grid {
            let spec = g.theta.spec();
            if g.t_len < spec.p() + 2 {
                return invalid(format!("series length {} is too short for p = {}", g.t_len, spec.p()));
            }
            if spec.l() > 0 && self.exog == ExogPolicy::None {
                return invalid("model has covariates but no covariate policy");
            }
            self.initial.validate(spec.p())?;
        }
        self.fit.validate()
    }
}

/// Simulates and fits every `(grid point, replicate)` pair in parallel and
/// returns the fits grouped by grid point in replicate order.
fn grid_fits(grid: &[GridPoint], s: &StudySettings) -> Result<Vec<Vec<Option<FitResult>>>> {
    s.validate(grid)?;
    let r = s.replicates;
    let flat: Vec<Option<FitResult>> = (0..grid.len() * r)
        .into_par_iter()
        .map(|idx| {
            let (g, k) = (idx / r, idx % r);
            let point = &grid[g];
            let mut rng = replicate_rng(s.seed, STUDY_DOMAIN_BASE + g as u64, k as u64);
            let (series, exog) = simulate_series(&point.theta, point.t_len, &mut rng, s.initial, s.exog)?;
            Ok(fit_single(point.theta.spec(), series, exog, &s.fit).ok())
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<Option<FitResult>>> = Vec::with_capacity(grid.len());
    let mut it = flat.into_iter();
    for _ in 0..grid.len() {
        out.push(it.by_ref().take(r).collect());
    }
    Ok(out)
}

fn fi_of(fit: &FitResult, s: FiSource) -> &FisherMatrix {
    match s {
        FiSource::Exact => &fit.ex_fi,
        FiSource::Empirical => &fit.em_fi,
    }
}

fn diverged(fits: &[Option<FitResult>]) -> usize {
    fits.iter().flatten().filter(|f| f.status == FitStatus::DivergedSeparation).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiLengthRow {
    pub t_len: usize,
    pub theta: Vec<f64>,
    /// Mean over replicates of `(len_compared − len_baseline) / len_baseline`.
    pub mean_rel_diff: Option<f64>,
    pub sd_rel_diff: Option<f64>,
    pub n_used: usize,
    /// Replicates where either interval could not be formed.
    pub n_excluded: usize,
    pub n_diverged: usize,
}

/// Relative CI-length difference for coordinate `tested`, comparing
/// `compared` against `baseline`. Both intervals share the normal quantile,
/// so the ratio of lengths is the ratio of standard errors.
pub fn ci_length_study(
    grid: &[GridPoint],
    tested: usize,
    compared: FiSource,
    baseline: FiSource,
    settings: &StudySettings,
) -> Result<Vec<CiLengthRow>> {
    if grid.iter().any(|g| tested >= g.theta.spec().dim()) {
        return invalid(format!("tested coordinate {tested} out of range"));
    }
    let fits = grid_fits(grid, settings)?;
    Ok(grid
        .iter()
        .zip(&fits)
        .map(|(point, fits)| {
            let diffs: Vec<f64> = fits
                .iter()
                .flatten()
                .filter_map(|f| {
                    let a = standard_errors(fi_of(f, compared), compared).ok()?[tested];
                    let b = standard_errors(fi_of(f, baseline), baseline).ok()?[tested];
                    let rel = (a - b) / b;
                    rel.is_finite().then_some(rel)
                })
                .collect();
            let stats = mean_sd(&diffs);
            CiLengthRow {
                t_len: point.t_len,
                theta: point.theta.as_slice().to_vec(),
                mean_rel_diff: stats.map(|(m, _)| m),
                sd_rel_diff: stats.map(|(_, s)| s),
                n_used: diffs.len(),
                n_excluded: settings.replicates - diffs.len(),
                n_diverged: diverged(fits),
            }
        })
        .collect())
}

/// Which pair of matrices the Frobenius study compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrobeniusMode {
    /// Exact versus empirical inverse information (covariance scale).
    InverseInformation,
    /// Exact versus empirical information.
    Information,
    /// Both informations divided by the number of modelled observations.
    InformationPerObservation,
}

impl FrobeniusMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrobeniusMode::InverseInformation => "inverse_fi",
            FrobeniusMode::Information => "fi",
            FrobeniusMode::InformationPerObservation => "fi_per_obs",
        }
    }
}

impl std::str::FromStr for FrobeniusMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse_fi" => Ok(FrobeniusMode::InverseInformation),
            "fi" => Ok(FrobeniusMode::Information),
            "fi_per_obs" => Ok(FrobeniusMode::InformationPerObservation),
            other => invalid(format!("unknown Frobenius mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusRow {
    pub t_len: usize,
    pub theta: Vec<f64>,
    pub mean_norm: Option<f64>,
    pub sd_norm: Option<f64>,
    pub n_used: usize,
    /// Replicates where an inverse did not exist.
    pub n_singular: usize,
    pub n_diverged: usize,
}

/// `‖A − B‖_F` for the exact and empirical matrices at the fitted θ.
pub fn frobenius_discrepancy(fit: &FitResult, mode: FrobeniusMode) -> Option<f64> {
    let (ex, em) = (&fit.ex_fi, &fit.em_fi);
    let norm = match mode {
        FrobeniusMode::InverseInformation => {
            let a = ex.inverse(FiSource::Exact.label()).ok()?;
            let b = em.inverse(FiSource::Empirical.label()).ok()?;
            (a - b).norm()
        }
        FrobeniusMode::Information => ex.frobenius_distance(em),
        FrobeniusMode::InformationPerObservation => ex.frobenius_distance(em) / fit.n_effective as f64,
    };
    norm.is_finite().then_some(norm)
}

pub fn frobenius_study(grid: &[GridPoint], mode: FrobeniusMode, settings: &StudySettings) -> Result<Vec<FrobeniusRow>> {
    let fits = grid_fits(grid, settings)?;
    Ok(grid
        .iter()
        .zip(&fits)
        .map(|(point, fits)| {
            let norms: Vec<f64> = fits.iter().flatten().filter_map(|f| frobenius_discrepancy(f, mode)).collect();
            let stats = mean_sd(&norms);
            FrobeniusRow {
                t_len: point.t_len,
                theta: point.theta.as_slice().to_vec(),
                mean_norm: stats.map(|(m, _)| m),
                sd_norm: stats.map(|(_, s)| s),
                n_used: norms.len(),
                n_singular: settings.replicates - norms.len(),
                n_diverged: diverged(fits),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(ts: &[usize], beta: &[f64]) -> Vec<GridPoint> {
        ts.iter().map(|&t| GridPoint { t_len: t, theta: ParamVector::lar(beta).unwrap() }).collect()
    }

    #[test]
    fn same_source_gives_zero_difference() {
        let rows = ci_length_study(&grid(&[20, 40], &[0.1, 1.0]), 1, FiSource::Exact, FiSource::Exact, &StudySettings::new(15, 2)).unwrap();
        for r in rows {
            assert_eq!(r.mean_rel_diff, Some(0.0));
            assert_eq!(r.sd_rel_diff, Some(0.0));
        }
    }

    #[test]
    fn deterministic_and_grid_shaped() {
        let g = grid(&[15, 30, 45], &[0.1, 0.5]);
        let s = StudySettings::new(12, 8);
        let a = frobenius_study(&g, FrobeniusMode::InverseInformation, &s).unwrap();
        let b = frobenius_study(&g, FrobeniusMode::InverseInformation, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.t_len).collect::<Vec<_>>(), vec![15, 30, 45]);
        assert!(a.iter().all(|r| r.n_used + r.n_singular == 12));
    }

    #[test]
    fn per_observation_mode_scales_information_mode() {
        let g = grid(&[30], &[0.1, 0.5]);
        let s = StudySettings::new(1, 4);
        let raw = frobenius_study(&g, FrobeniusMode::Information, &s).unwrap()[0].mean_norm.unwrap();
        let per = frobenius_study(&g, FrobeniusMode::InformationPerObservation, &s).unwrap()[0].mean_norm.unwrap();
        assert!((raw / 29.0 - per).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(frobenius_study(&[], FrobeniusMode::Information, &StudySettings::new(1, 0)).is_err());
        assert!(ci_length_study(&grid(&[20], &[0.1, 1.0]), 2, FiSource::Empirical, FiSource::Exact, &StudySettings::new(1, 0)).is_err());
    }
}
