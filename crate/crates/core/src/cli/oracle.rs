use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::error::Result;
use crate::exact::OracleSweep;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 1)]
    pub p_min: usize,
    #[arg(long, default_value_t = 3)]
    pub p_max: usize,
    /// Largest series length; each order runs `T = p+1 ..= t_max`.
    #[arg(long = "t-max", default_value_t = 12)]
    pub t_max: usize,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of iid standard normal covariates per trial.
    #[arg(long, default_value_t = 0)]
    pub covariates: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
}

impl OracleArgs {
    pub fn sweep(&self) -> OracleSweep {
        OracleSweep {
            p_min: self.p_min,
            p_max: self.p_max,
            t_max: self.t_max,
            trials: self.trials,
            seed: self.seed,
            covariates: self.covariates,
            tolerance: self.tolerance,
            ..OracleSweep::default()
        }
    }
}

pub(super) fn run(args: &OracleArgs) -> Result<Outcome> {
    let report = args.sweep().run()?;
    println!(
        "{} configurations, {} pairwise comparisons, max |difference| {:.3e} (tolerance {:.0e})",
        report.configurations, report.comparisons, report.max_discrepancy, report.tolerance
    );
    if report.passed() {
        println!("PASS");
        return Ok(Outcome::Ok);
    }
    println!("FAIL: {} comparison(s) at or above tolerance", report.failures.len());
    println!("{}", serde_json::to_string_pretty(&report.failures)?);
    Ok(Outcome::VerificationFailed)
}
