//! Randomised cross-check of every applicable exact-information algorithm
//! against every other one.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{ex_fi, ExactAlgorithm, LagState, MAX_BRUTEFORCE_STEPS};
use crate::error::{invalid, Error, Result};
use crate::model::{ExogMatrix, ModelSpec, ParamVector, MAX_LAG_ORDER};
use crate::montecarlo::replicate_rng;

const ORACLE_DOMAIN: u64 = 0x0AC1E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSweep {
    pub p_min: usize,
    pub p_max: usize,
    /// Horizons run from `p + 1` to `t_max` for each order.
    pub t_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Covariate count; covariates are iid standard normal per trial.
    pub covariates: usize,
    /// θ entries are uniform on `[−bound, bound]`.
    pub theta_bound: f64,
    pub tolerance: f64,
}

impl Default for OracleSweep {
    fn default() -> Self {
        Self { p_min: 1, p_max: 3, t_max: 12, trials: 50, seed: 0, covariates: 0, theta_bound: 2.0, tolerance: 1e-10 }
    }
}

/// A compared pair with its inputs, enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub p: usize,
    pub t_len: usize,
    pub trial: usize,
    pub theta: Vec<f64>,
    /// `(y_p, .., y_1)`, most recent first.
    pub initial_lags: Vec<u8>,
    pub exog: Option<ExogMatrix>,
    pub first: ExactAlgorithm,
    pub second: ExactAlgorithm,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub configurations: usize,
    pub comparisons: usize,
    pub max_discrepancy: f64,
    pub worst: Option<OracleCase>,
    /// Every pair at or above the tolerance.
    pub failures: Vec<OracleCase>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl OracleSweep {
    pub fn validate(&self) -> Result<()> {
        if self.p_min == 0 || self.p_min > self.p_max || self.p_max > MAX_LAG_ORDER {
            return invalid(format!("lag order range {}..={} is invalid", self.p_min, self.p_max));
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.t_max < self.p_max + 1 {
            return invalid(format!("t_max = {} leaves no horizon for p = {}", self.t_max, self.p_max));
        }
        let steps = self.t_max - self.p_min;
        if steps > MAX_BRUTEFORCE_STEPS {
            return Err(Error::SizeLimit { paths_log2: steps, limit_log2: MAX_BRUTEFORCE_STEPS });
        }
        if !(self.theta_bound.is_finite() && self.theta_bound >= 0.0 && self.tolerance > 0.0) {
            return invalid("theta bound and tolerance must be finite and non-negative");
        }
        Ok(())
    }

    /// Runs the sweep. Configurations are visited in `(p, T, trial)` order
    /// and each draws from its own stream.
    pub fn run(&self) -> Result<OracleReport> {
        self.validate()?;
        let mut report = OracleReport {
            configurations: 0,
            comparisons: 0,
            max_discrepancy: 0.0,
            worst: None,
            failures: Vec::new(),
            tolerance: self.tolerance,
        };
        let mut case_index = 0u64;
        for p in self.p_min..=self.p_max {
            let spec = ModelSpec::new(p, self.covariates)?;
            for t_len in p + 1..=self.t_max {
                for trial in 0..self.trials {
                    let mut rng = replicate_rng(self.seed, ORACLE_DOMAIN, case_index);
                    case_index += 1;
                    let b = self.theta_bound;
                    let theta: Vec<f64> = (0..spec.dim()).map(|_| rng.random_range(-b..=b)).collect();
                    let theta = ParamVector::new(spec, theta)?;
                    let initial = LagState::from_code(p, rng.random_range(0..(1u32 << p)))?;
                    let exog = if self.covariates > 0 {
                        let data = (0..t_len * self.covariates).map(|_| rng.sample(StandardNormal)).collect();
                        Some(ExogMatrix::new(t_len, self.covariates, data)?)
                    } else {
                        None
                    };

                    let algos: Vec<ExactAlgorithm> =
                        ExactAlgorithm::ALL.into_iter().filter(|a| a.applicable(spec, t_len)).collect();
                    let results = algos
                        .iter()
                        .map(|&a| ex_fi(a, &theta, initial, t_len, exog.as_ref()))
                        .collect::<Result<Vec<_>>>()?;
                    report.configurations += 1;
                    for i in 0..results.len() {
                        for j in i + 1..results.len() {
                            let diff = results[i].max_abs_diff(&results[j]);
                            report.comparisons += 1;
                            let case = || OracleCase {
                                p,
                                t_len,
                                trial,
                                theta: theta.as_slice().to_vec(),
                                initial_lags: initial.lags(),
                                exog: exog.clone(),
                                first: algos[i],
                                second: algos[j],
                                discrepancy: diff,
                            };
                            if diff.is_nan() || diff >= self.tolerance {
                                report.failures.push(case());
                            }
                            if diff.is_nan() || diff > report.max_discrepancy {
                                report.max_discrepancy = diff;
                                report.worst = Some(case());
                            }
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes_and_is_reproducible() {
        let sweep = OracleSweep { trials: 3, t_max: 8, ..OracleSweep::default() };
        let a = sweep.run().unwrap();
        assert!(a.passed(), "{:?}", a.worst);
        assert_eq!(a.configurations, 3 * (7 + 6 + 5));
        assert_eq!(a, sweep.run().unwrap());
    }

    #[test]
    fn covariate_sweep_skips_closed_form() {
        let sweep = OracleSweep { trials: 2, t_max: 6, p_max: 1, covariates: 2, ..OracleSweep::default() };
        let r = sweep.run().unwrap();
        assert!(r.passed());
        // forward, iteration and brute force: three pairs per configuration.
        assert_eq!(r.comparisons, 3 * r.configurations);
    }

    #[test]
    fn refuses_oversized_horizon() {
        let sweep = OracleSweep { p_min: 1, p_max: 1, t_max: 31, ..OracleSweep::default() };
        assert!(matches!(sweep.run(), Err(Error::SizeLimit { paths_log2: 30, .. })));
    }
}
