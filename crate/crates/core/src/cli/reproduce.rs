use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{command_config, opt, write_file, Command, Outcome};
use crate::error::{invalid, Result};
use crate::inference::FiSource;
use crate::io::{OutputRecord, RunManifest, RunMetadata};
use crate::model::ParamVector;
use crate::montecarlo::{
    ci_length_study, frobenius_study, CiLengthRow, published, run_scenario, FrobeniusMode, GridPoint, Ratio, ScenarioConfig,
    StudySettings, TableStudy, PUBLISHED_CURVE_REPLICATES, PUBLISHED_REPLICATES, REFERENCE_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Table1,
    Table2,
    Table3,
    Fig1,
    Fig2,
    Fig3,
    Fig5,
}

impl Study {
    pub fn as_str(&self) -> &'static str {
        match self {
            Study::Table1 => "table1",
            Study::Table2 => "table2",
            Study::Table3 => "table3",
            Study::Fig1 => "fig1",
            Study::Fig2 => "fig2",
            Study::Fig3 => "fig3",
            Study::Fig5 => "fig5",
        }
    }

    fn table(&self) -> Option<TableStudy> {
        match self {
            Study::Table1 => Some(TableStudy::Table1),
            Study::Table2 => Some(TableStudy::Table2),
            Study::Table3 => Some(TableStudy::Table3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioChoice {
    Low,
    High,
    Both,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub study: Study,

    /// Replicates per cell (default: the published count).
    #[arg(long)]
    pub replicates: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Series lengths to run (default: the study's own grid).
    #[arg(long = "T", value_delimiter = ',')]
    pub t_grid: Option<Vec<usize>>,

    /// Parameter ratio for the table studies.
    #[arg(long, value_enum, default_value_t = RatioChoice::Both)]
    pub ratio: RatioChoice,

    /// Covariate coefficient of the high-ratio scenario in table3.
    #[arg(long)]
    pub alpha_high: Option<f64>,

    /// Matrices compared by the fig3/fig5 studies
    /// (inverse_fi, fi, fi_per_obs; default inverse_fi for fig3, fi for fig5).
    #[arg(long)]
    pub mode: Option<String>,

    /// Lag coefficients swept by fig2 (default 0.1..=2.0 by 0.1).
    #[arg(long, value_delimiter = ',')]
    pub beta1: Option<Vec<f64>>,

    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Intercept shared by every scenario.
const INTERCEPT: f64 = 0.1;

fn default_t_grid(study: Study) -> Vec<usize> {
    match study {
        Study::Table1 | Study::Table2 | Study::Table3 => TableStudy::T_GRID.to_vec(),
        Study::Fig1 => (5..=250).collect(),
        Study::Fig2 => vec![60, 100],
        Study::Fig3 => (10..=250).step_by(10).collect(),
        Study::Fig5 => std::iter::once(5).chain((10..=550).step_by(10)).collect(),
    }
}

/// Seed for one table cell, keyed by content rather than position so that
/// running a subset of the grid reproduces the matching rows of a full run.
fn cell_seed(seed: u64, ratio: Ratio, t_len: usize) -> u64 {
    let r = match ratio {
        Ratio::Low => 1u64,
        Ratio::High => 2,
    };
    seed.wrapping_add((t_len as u64) << 24).wrapping_add(r << 56)
}

pub(super) fn run(args: &ReproduceArgs) -> Result<Outcome> {
    let csv = study_csv(args)?;
    let name = args.study.as_str();
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    write_file(&csv_path, csv.as_bytes())?;
    let mut record = OutputRecord::of_file(&csv_path)?;
    record.path = format!("{name}.csv");
    let manifest = RunManifest {
        metadata: RunMetadata::new("reproduce", Some(args.seed), command_config(&Command::Reproduce(args.clone()))),
        study: name.into(),
        reference_version: REFERENCE_VERSION,
        outputs: vec![record],
    };
    write_file(&args.out_dir.join(format!("{name}.manifest.json")), manifest.to_json()?.as_bytes())?;
    print!("{csv}");
    Ok(Outcome::Ok)
}

/// Runs the study and renders its comparison CSV.
pub fn study_csv(args: &ReproduceArgs) -> Result<String> {
    let t_grid = args.t_grid.clone().unwrap_or_else(|| default_t_grid(args.study));
    if t_grid.is_empty() {
        return invalid("empty series-length grid");
    }
    if let Some(table) = args.study.table() {
        return table_csv(table, args, &t_grid);
    }
    let reps = args.replicates.unwrap_or(PUBLISHED_CURVE_REPLICATES);
    let settings = StudySettings::new(reps, args.seed);
    match args.study {
        Study::Fig1 => {
            let grid = lar1_grid(&t_grid, &[1.0])?;
            let rows = ci_length_study(&grid, 1, FiSource::Empirical, FiSource::Exact, &settings)?;
            Ok(ci_csv(&rows, reps, false, "positive and decreasing in T; near 0 beyond T=200"))
        }
        Study::Fig2 => {
            let betas = args.beta1.clone().unwrap_or_else(|| (1..=20).map(|k| k as f64 / 10.0).collect());
            let grid = lar1_grid(&t_grid, &betas)?;
            let rows = ci_length_study(&grid, 1, FiSource::Empirical, FiSource::Exact, &settings)?;
            Ok(ci_csv(&rows, reps, true, "positive and growing with beta1"))
        }
        Study::Fig3 | Study::Fig5 => {
            let default_mode = if args.study == Study::Fig3 { "inverse_fi" } else { "fi" };
            let mode: FrobeniusMode = args.mode.as_deref().unwrap_or(default_mode).parse()?;
            let ratios: &[f64] = if args.study == Study::Fig3 { &[5.0, 10.0] } else { &[5.0] };
            let betas: Vec<f64> = ratios.iter().map(|r| r * INTERCEPT).collect();
            let grid = lar1_grid(&t_grid, &betas)?;
            let rows = frobenius_study(&grid, mode, &settings)?;
            let mut s = String::from(
                "study,mode,beta0,beta1,T,replicates,mean_norm,sd_norm,n_used,n_singular,n_diverged,trend,panel_monotone_decreasing,expected,reference_replicates\n",
            );
            let series: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.theta[1], r.mean_norm)).collect();
            let trends = trend_columns(&series);
            for (r, (trend, mono)) in rows.iter().zip(trends) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},decays towards 0; negligible beyond T=200,{}",
                    args.study.as_str(),
                    mode.as_str(),
                    r.theta[0],
                    r.theta[1],
                    r.t_len,
                    reps,
                    opt(r.mean_norm),
                    opt(r.sd_norm),
                    r.n_used,
                    r.n_singular,
                    r.n_diverged,
                    trend,
                    mono,
                    PUBLISHED_CURVE_REPLICATES
                );
            }
            Ok(s)
        }
        _ => unreachable!("tables handled above"),
    }
}

fn lar1_grid(t_grid: &[usize], betas: &[f64]) -> Result<Vec<GridPoint>> {
    let mut grid = Vec::with_capacity(t_grid.len() * betas.len());
    for &b in betas {
        for &t in t_grid {
            grid.push(GridPoint { t_len: t, theta: ParamVector::lar(&[INTERCEPT, b])? });
        }
    }
    Ok(grid)
}

/// For each row, the direction relative to the previous row of the same
/// panel (rows grouped by the first key) and whether the whole panel
/// strictly decreases.
fn trend_columns(series: &[(f64, Option<f64>)]) -> Vec<(&'static str, bool)> {
    let mut out = Vec::with_capacity(series.len());
    let mut start = 0;
    while start < series.len() {
        let key = series[start].0;
        let end = series[start..].iter().position(|(k, _)| *k != key).map_or(series.len(), |n| start + n);
        let panel = &series[start..end];
        let mono = panel.windows(2).all(|w| matches!((w[0].1, w[1].1), (Some(a), Some(b)) if b < a));
        for i in 0..panel.len() {
            let trend = match (i.checked_sub(1).and_then(|j| panel[j].1), panel[i].1) {
                _ if i == 0 => "start",
                (Some(a), Some(b)) if b < a => "down",
                (Some(a), Some(b)) if b > a => "up",
                (Some(_), Some(_)) => "flat",
                _ => "n/a",
            };
            out.push((trend, mono));
        }
        start = end;
    }
    out
}

/// With `per_t`, panels are fixed-T sweeps over β₁; otherwise one panel
/// per β₁ sweeping T.
fn ci_csv(rows: &[CiLengthRow], reps: usize, per_t: bool, expected: &str) -> String {
    let mut s = String::from(
        "beta0,beta1,T,replicates,mean_rel_diff,sd_rel_diff,n_used,n_excluded,n_diverged,trend,panel_monotone_decreasing,expected,reference_replicates\n",
    );
    let mut order: Vec<usize> = (0..rows.len()).collect();
    if per_t {
        order.sort_by_key(|&i| (rows[i].t_len, i));
    }
    let series: Vec<(f64, Option<f64>)> = order
        .iter()
        .map(|&i| (if per_t { rows[i].t_len as f64 } else { rows[i].theta[1] }, rows[i].mean_rel_diff))
        .collect();
    for (&i, (trend, mono)) in order.iter().zip(trend_columns(&series)) {
        let r = &rows[i];
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.theta[0],
            r.theta[1],
            r.t_len,
            reps,
            opt(r.mean_rel_diff),
            opt(r.sd_rel_diff),
            r.n_used,
            r.n_excluded,
            r.n_diverged,
            trend,
            mono,
            expected,
            PUBLISHED_CURVE_REPLICATES
        );
    }
    s
}

fn table_csv(table: TableStudy, args: &ReproduceArgs, t_grid: &[usize]) -> Result<String> {
    let reps = args.replicates.unwrap_or(PUBLISHED_REPLICATES);
    let ratios: Vec<Ratio> = match args.ratio {
        RatioChoice::Low => vec![Ratio::Low],
        RatioChoice::High => vec![Ratio::High],
        RatioChoice::Both => Ratio::BOTH.to_vec(),
    };
    let mut s = String::from(
        "study,ratio,T,theta,coefficient,fi_source,replicates,type1,avg_se,se_at_truth,mc_se,observed_sd,mean_estimate,\
n_converged,n_diverged,n_max_iter,n_failed,n_null_diverged,n_singular_mle,\
published_type1,published_avg_se,published_se_at_truth,published_mc_se,published_observed_sd,published_replicates,reference\n",
    );
    for &ratio in &ratios {
        let theta = table.theta(ratio, if ratio == Ratio::High { args.alpha_high } else { None });
        let theta_text = theta.as_slice().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        for &t_len in t_grid {
            for &(coef, idx) in table.tested() {
                let cfg = ScenarioConfig::new(theta.clone(), idx, t_len, reps, cell_seed(args.seed, ratio, t_len))?;
                let summary = run_scenario(&cfg)?;
                for src in FiSource::BOTH {
                    let ss = summary.source(src);
                    let reference = published(table, t_len, ratio, coef, src);
                    let pub_col = |f: fn(&crate::montecarlo::PublishedRow) -> f64| opt(reference.map(f));
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        table.as_str(),
                        ratio.as_str(),
                        t_len,
                        theta_text,
                        coef,
                        src.as_str(),
                        reps,
                        opt(ss.type1_rate),
                        opt(ss.avg_se_at_mle[idx]),
                        opt(ss.se_at_truth[idx]),
                        opt(ss.mc_se[idx]),
                        summary.observed_sd[idx],
                        summary.mean_estimate[idx],
                        summary.n_converged,
                        summary.n_diverged,
                        summary.n_max_iter,
                        summary.n_failed,
                        summary.n_null_diverged,
                        ss.n_singular_mle,
                        pub_col(|r| r.type1),
                        pub_col(|r| r.avg_se),
                        pub_col(|r| r.se_at_truth),
                        pub_col(|r| r.mc_se),
                        pub_col(|r| r.observed_sd),
                        if reference.is_some() { PUBLISHED_REPLICATES.to_string() } else { String::new() },
                        if reference.is_some() { "published simulation table" } else { "" },
                    );
                }
            }
        }
    }
    Ok(s)
}
