use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{command_config, write_file, Command, Outcome};
use crate::error::{invalid, Error, Result};
use crate::estimate::Subject;
use crate::exact::LagState;
use crate::io::{write_panel, OutputRecord, PanelData, RunManifest, RunMetadata};
use crate::model::{ModelSpec, ParamVector};
use crate::montecarlo::{replicate_rng, simulate_series, ExogPolicy, InitialPolicy, REFERENCE_VERSION};

/// Stream domain for panel simulation, apart from the study domains.
const SIMULATE_DOMAIN: u64 = 2;

/// Initial-block rule as given on the command line:
/// `bernoulli:Q` or `fixed:Y1,..,Yp` in chronological order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct InitialArg(pub String);

impl InitialArg {
    fn policy(&self, p: usize) -> Result<InitialPolicy> {
        let bad = || Error::InvalidArgument(format!("initial rule {:?} must be bernoulli:Q or fixed:Y1,..,Yp", self.0));
        let (kind, rest) = self.0.split_once(':').ok_or_else(bad)?;
        let policy = match kind {
            "bernoulli" => InitialPolicy::IidBernoulli { q: rest.trim().parse().map_err(|_| bad())? },
            "fixed" => {
                let block = rest
                    .split(',')
                    .map(|v| match v.trim() {
                        "0" => Ok(0u8),
                        "1" => Ok(1u8),
                        _ => Err(bad()),
                    })
                    .collect::<Result<Vec<u8>>>()?;
                if block.len() != p {
                    return invalid(format!("fixed initial block has {} values but p = {p}", block.len()));
                }
                InitialPolicy::Fixed { state: LagState::from_initial_block(&block)? }
            }
            _ => return Err(bad()),
        };
        policy.validate(p)?;
        Ok(policy)
    }
}

impl FromStr for InitialArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(Self(s.to_string()))
    }
}

impl TryFrom<String> for InitialArg {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Ok(Self(s))
    }
}

impl From<InitialArg> for String {
    fn from(a: InitialArg) -> String {
        a.0
    }
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Intercept then lag coefficients, e.g. `0.1,0.5`; the lag order is
    /// one less than the count.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub beta: Vec<f64>,

    /// Covariate coefficients; covariates x1..xl are iid standard normal.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alpha: Vec<f64>,

    /// Series length per subject.
    #[arg(long = "T")]
    pub t_len: usize,

    #[arg(long, default_value_t = 1)]
    pub n_subjects: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// `bernoulli:Q` or `fixed:Y1,..,Yp`.
    #[arg(long, default_value = "bernoulli:0.5")]
    pub initial: InitialArg,

    /// Panel CSV to write.
    #[arg(long)]
    pub out: PathBuf,
}

/// Simulated subjects, ids zero-padded so they sort in generation order.
pub fn simulate_subjects(args: &SimulateArgs) -> Result<Vec<Subject>> {
    if args.beta.len() < 2 {
        return invalid("--beta needs an intercept and at least one lag coefficient");
    }
    if args.n_subjects == 0 {
        return invalid("--n-subjects must be at least 1");
    }
    let spec = ModelSpec::new(args.beta.len() - 1, args.alpha.len())?;
    let theta = ParamVector::from_parts(spec, &args.alpha, &args.beta)?;
    let initial = args.initial.policy(spec.p())?;
    let exog = if spec.l() > 0 { ExogPolicy::IidStandardNormal } else { ExogPolicy::None };
    let width = (args.n_subjects - 1).to_string().len().max(1);
    (0..args.n_subjects)
        .map(|i| {
            let mut rng = replicate_rng(args.seed, SIMULATE_DOMAIN, i as u64);
            let (series, x) = simulate_series(&theta, args.t_len, &mut rng, initial, exog)?;
            Ok(Subject::new(format!("s{i:0width$}"), series, x))
        })
        .collect()
}

pub(super) fn run(args: &SimulateArgs) -> Result<Outcome> {
    let subjects = simulate_subjects(args)?;
    let data = PanelData::from_subjects(&subjects, None)?;
    let mut bytes = Vec::new();
    write_panel(&mut bytes, &data)?;
    write_file(&args.out, &bytes)?;

    let mut record = OutputRecord::of_file(&args.out)?;
    record.path = args.out.file_name().map_or_else(|| record.path.clone(), |n| n.to_string_lossy().into_owned());
    let manifest = RunManifest {
        metadata: RunMetadata::new("simulate", Some(args.seed), command_config(&Command::Simulate(args.clone()))),
        study: "simulate".into(),
        reference_version: REFERENCE_VERSION,
        outputs: vec![record],
    };
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".manifest.json");
    write_file(&PathBuf::from(sidecar), manifest.to_json()?.as_bytes())?;
    eprintln!("wrote {} rows for {} subject(s) to {}", data.n_rows(), data.subjects.len(), args.out.display());
    Ok(Outcome::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(initial: &str) -> SimulateArgs {
        SimulateArgs {
            beta: vec![0.1, 0.5, -0.3],
            alpha: vec![],
            t_len: 10,
            n_subjects: 12,
            seed: 4,
            initial: InitialArg(initial.into()),
            out: PathBuf::from("unused.csv"),
        }
    }

    #[test]
    fn fixed_initial_block_is_used() {
        let subjects = simulate_subjects(&args("fixed:1,0")).unwrap();
        assert_eq!(subjects.len(), 12);
        assert_eq!(subjects[0].id, "s00");
        assert_eq!(subjects[11].id, "s11");
        assert!(subjects.iter().all(|s| s.series.values()[..2] == [1, 0]));
    }

    #[test]
    fn bad_initial_rules() {
        for rule in ["fixed:1", "fixed:1,2", "bernoulli:1.5", "uniform:0.5", "bernoulli"] {
            assert!(simulate_subjects(&args(rule)).is_err(), "{rule}");
        }
    }
}
