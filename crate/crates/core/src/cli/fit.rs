use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{command_config, write_file, Command, Outcome};
use crate::error::Result;
use crate::estimate::{fit_mle, FitConfig, FitStatus, SubjectPanel};
use crate::exact::{qt_forward, LagState};
use crate::inference::{order_selection, FiSource, Functional};
use crate::io::{read_panel, PanelData, ResultDocument, RunMetadata, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiChoice {
    Exact,
    Empirical,
    Both,
}

impl FiChoice {
    fn sources(self) -> Vec<FiSource> {
        match self {
            FiChoice::Exact => vec![FiSource::Exact],
            FiChoice::Empirical => vec![FiSource::Empirical],
            FiChoice::Both => FiSource::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Panel CSV with header `subject,t,y[,covariates...]`.
    #[arg(long)]
    pub data: PathBuf,

    /// Lag order.
    #[arg(short, long)]
    pub p: usize,

    /// Covariate columns to use, in order (default: every column after y).
    #[arg(long, value_delimiter = ',', conflicts_with = "no_covariates")]
    pub covariates: Option<Vec<String>>,

    /// Ignore covariate columns and fit LAR(p).
    #[arg(long)]
    pub no_covariates: bool,

    /// Replace a covariate by the indicator `column > cut` (repeatable).
    #[arg(long = "threshold", value_name = "COLUMN>CUT")]
    pub thresholds: Vec<String>,

    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Information source(s) shown in the printed tables; the JSON document
    /// always carries both.
    #[arg(long, value_enum, default_value_t = FiChoice::Both)]
    pub fi: FiChoice,

    /// Functional to report, e.g. `prob|lag=1|stress=0` (repeatable).
    #[arg(long = "functional", value_name = "SPEC")]
    pub functionals: Vec<String>,

    /// Also tabulate AIC/BIC over these lag orders.
    #[arg(long, value_delimiter = ',')]
    pub select_order: Option<Vec<usize>>,

    /// Write the lag-state distributions at the estimate as CSV.
    #[arg(long, value_name = "PATH")]
    pub dump_qt: Option<PathBuf>,

    /// Write the JSON result document here.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,

    /// Sup-norm of θ beyond which the fit is declared separated.
    #[arg(long, default_value_t = 30.0)]
    pub divergence_norm: f64,
}

pub(crate) fn load_panel(args: &FitArgs) -> Result<(PanelData, SubjectPanel)> {
    let mut data = read_panel(BufReader::new(File::open(&args.data)?))?;
    for t in &args.thresholds {
        data.apply_threshold(&t.parse::<Threshold>()?)?;
    }
    if args.no_covariates {
        data.select_covariates(&[])?;
    } else if let Some(names) = &args.covariates {
        data.select_covariates(names)?;
    }
    let panel = data.to_panel(args.p)?;
    Ok((data, panel))
}

pub(super) fn run(args: &FitArgs) -> Result<Outcome> {
    let (data, panel) = load_panel(args)?;
    let spec = panel.spec();
    let config = FitConfig { max_iter: args.max_iter, divergence_norm: args.divergence_norm, ..FitConfig::default() };
    let functionals = args
        .functionals
        .iter()
        .map(|s| Ok((s.clone(), Functional::parse(s, spec, &data.covariates)?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_mle(&panel, &config)?;

    let metadata = RunMetadata::new("fit", None, command_config(&Command::Fit(args.clone())));
    let mut doc = ResultDocument::from_fit(metadata, &panel, &data.covariates, &fit, args.level, &functionals)?;
    if let Some(orders) = &args.select_order {
        doc.order_selection = Some(order_selection(&panel, orders, &config)?);
    }

    if let Some(path) = &args.dump_qt {
        let mut csv = String::from("subject,t,state,probability\n");
        for s in panel.subjects() {
            let init = LagState::initial_of(&s.series, spec.p())?;
            for dist in qt_forward(&fit.theta_hat, init, s.series.len(), s.exog.as_ref())? {
                for (code, q) in dist.q.iter().enumerate() {
                    let lags = LagState::from_code(spec.p(), code as u32)?.lags();
                    let bits: String = lags.iter().map(|b| char::from(b'0' + b)).collect();
                    let _ = writeln!(csv, "{},{},{},{}", s.id, dist.t, bits, q);
                }
            }
        }
        write_file(path, csv.as_bytes())?;
    }
    if let Some(path) = &args.out {
        write_file(path, doc.to_json()?.as_bytes())?;
    }

    print!("{}", render(&doc, &args.fi.sources()));
    if fit.status == FitStatus::DivergedSeparation {
        eprintln!(
            "SEPARATION: the likelihood has no finite maximiser (|θ| exceeded {} after {} iterations); estimates are the last iterate",
            args.divergence_norm, fit.iterations
        );
        return Ok(Outcome::Separation);
    }
    Ok(Outcome::Ok)
}

/// Fixed point for ordinary magnitudes, scientific otherwise.
fn num(x: f64, digits: usize) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-3..1e6).contains(&a) {
        format!("{x:.3e}")
    } else {
        format!("{x:.digits$}")
    }
}

fn fmt_ci(lo: f64, hi: f64) -> String {
    format!("({}, {})", num(lo, 4), num(hi, 4))
}

/// Plain-text summary of a result document.
pub fn render(doc: &ResultDocument, sources: &[FiSource]) -> String {
    let mut s = String::new();
    let kind = if doc.model.l > 0 { "LARX" } else { "LAR" };
    let _ = writeln!(
        s,
        "{kind}({}) fit: {} subject(s), {} modelled observations, status {} after {} iteration(s)",
        doc.model.p,
        doc.data.n_subjects,
        doc.data.n_effective,
        doc.status.as_str(),
        doc.iterations
    );
    let crit = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    let _ = writeln!(s, "log-likelihood {:.6}   AIC {}   BIC {}", doc.loglik, crit(doc.aic), crit(doc.bic));
    let pct = doc.level * 100.0;

    let _ = write!(s, "\n{:<20} {:>11}", "coefficient", "estimate");
    for src in sources {
        let _ = write!(s, "  {:>10} {:<24}", format!("{} SE", short(*src)), format!("{} {pct:.0}% CI", short(*src)));
    }
    s.push('\n');
    for c in &doc.coefficients {
        let _ = write!(s, "{:<20} {:>11}", c.name, num(c.estimate, 5));
        for src in sources {
            let inf = if *src == FiSource::Exact { c.exact } else { c.empirical };
            match inf {
                Some(i) => {
                    let _ = write!(s, "  {:>10} {:<24}", num(i.se, 5), fmt_ci(i.lower, i.upper));
                }
                None => {
                    let _ = write!(s, "  {:>10} {:<24}", "singular", "");
                }
            }
        }
        s.push('\n');
    }

    if !doc.functionals.is_empty() {
        let _ = write!(s, "\n{:<28} {:>9}", "functional", "estimate");
        for src in sources {
            let _ = write!(s, "  {:<24}", format!("{} {pct:.0}% CI", short(*src)));
        }
        s.push('\n');
        for f in &doc.functionals {
            let point = f.exact.or(f.empirical).map(|i| i.point);
            let _ = write!(s, "{:<28} {:>9}", f.label, point.map_or_else(|| "n/a".into(), |p| format!("{p:.4}")));
            for src in sources {
                let iv = if *src == FiSource::Exact { f.exact } else { f.empirical };
                let _ = write!(s, "  {:<24}", iv.map_or_else(|| "singular".into(), |i| fmt_ci(i.lower, i.upper)));
            }
            s.push('\n');
        }
    }

    if let Some(rows) = &doc.order_selection {
        let _ = writeln!(s, "\n{:>3} {:>14} {:>14} {:>14}", "p", "loglik", "AIC", "BIC");
        for r in rows {
            let mark = |v: Option<f64>, best: bool| match v {
                Some(x) => format!("{x:.4}{}", if best { "*" } else { " " }),
                None => "diverged ".into(),
            };
            let _ = writeln!(
                s,
                "{:>3} {:>14} {:>14} {:>14}",
                r.p,
                r.loglik.map_or_else(|| "n/a".into(), |x| format!("{x:.4}")),
                mark(r.aic, r.aic_best),
                mark(r.bic, r.bic_best)
            );
        }
    }
    s
}

fn short(s: FiSource) -> &'static str {
    match s {
        FiSource::Exact => "Ex-FI",
        FiSource::Empirical => "Em-FI",
    }
}
