use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::LagState;
use crate::model::{cond_prob, BinarySeries, ExogMatrix, ParamVector};

/// How the conditioning block `y_1..y_p` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialPolicy {
    Fixed { state: LagState },
    IidBernoulli { q: f64 },
}

impl Default for InitialPolicy {
    fn default() -> Self {
        InitialPolicy::IidBernoulli { q: 0.5 }
    }
}

impl InitialPolicy {
    pub fn validate(&self, p: usize) -> Result<()> {
        match *self {
            InitialPolicy::Fixed { state } if state.p() != p => {
                invalid(format!("fixed initial state has order {} but the model has p = {p}", state.p()))
            }
            InitialPolicy::IidBernoulli { q } if !(q > 0.0 && q < 1.0) => {
                invalid(format!("initial success probability {q} must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

/// How covariate trajectories are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExogPolicy {
    #[default]
    None,
    IidStandardNormal,
}

/// Independent generator for one replicate of one stream.
///
/// The key comes from `(seed, domain)` and the ChaCha stream id is the
/// replicate index, so a replicate's draws do not depend on how many other
/// replicates run or in which order.
pub fn replicate_rng(seed: u64, domain: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(replicate);
    rng
}

/// Draws a series of length `t_len` from the model.
///
/// Draw order: the whole covariate matrix, then the initial block, then
/// `y_{p+1}, .., y_T` in time order.
pub fn simulate_series<R: Rng + ?Sized>(
    theta: &ParamVector,
    t_len: usize,
    rng: &mut R,
    initial: InitialPolicy,
    exog: ExogPolicy,
) -> Result<(BinarySeries, Option<ExogMatrix>)> {
    let spec = theta.spec();
    let (p, l) = (spec.p(), spec.l());
    if t_len < p + 1 {
        return invalid(format!("series length {t_len} must exceed the lag order {p}"));
    }
    initial.validate(p)?;
    let x = match (exog, l) {
        (_, 0) => None,
        (ExogPolicy::None, _) => return invalid(format!("model has {l} covariates but no covariate policy")),
        (ExogPolicy::IidStandardNormal, _) => {
            let data: Vec<f64> = (0..t_len * l).map(|_| rng.sample(StandardNormal)).collect();
            Some(ExogMatrix::new(t_len, l, data)?)
        }
    };

    let mut y = vec![0u8; t_len];
    match initial {
        InitialPolicy::Fixed { state } => {
            // Lags are most recent first; the block is chronological.
            for (k, v) in state.lags().into_iter().enumerate() {
                y[p - 1 - k] = v;
            }
        }
        InitialPolicy::IidBernoulli { q } => {
            for v in y.iter_mut().take(p) {
                *v = u8::from(rng.random::<f64>() < q);
            }
        }
    }

    let mut lag = vec![0u8; p];
    let empty: [f64; 0] = [];
    for t in p..t_len {
        for (k, slot) in lag.iter_mut().enumerate() {
            *slot = y[t - 1 - k];
        }
        let xrow = x.as_ref().map_or(&empty[..], |m| m.row(t));
        let prob = cond_prob(theta, &lag, xrow)?;
        y[t] = u8::from(rng.random::<f64>() < prob);
    }
    Ok((BinarySeries::new(y)?, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expit;

    #[test]
    fn saturated_chain_stays_at_one() {
        let th = ParamVector::lar(&[0.0, 40.0]).unwrap();
        let init = InitialPolicy::Fixed { state: LagState::from_lags(&[1]).unwrap() };
        for r in 0..20 {
            let mut rng = replicate_rng(7, 0, r);
            let (y, _) = simulate_series(&th, 200, &mut rng, init, ExogPolicy::None).unwrap();
            assert!(y.values().iter().all(|&v| v == 1));
        }
    }

    #[test]
    fn fair_coin_mean() {
        let th = ParamVector::lar(&[0.0, 0.0]).unwrap();
        let mut rng = replicate_rng(11, 0, 0);
        let (y, _) = simulate_series(&th, 100_000, &mut rng, InitialPolicy::default(), ExogPolicy::None).unwrap();
        let mean = y.values().iter().map(|&v| f64::from(v)).sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.005, "{mean}");
    }

    #[test]
    fn transition_frequencies() {
        let th = ParamVector::lar(&[0.1, 0.5]).unwrap();
        let mut rng = replicate_rng(3, 0, 0);
        let (y, _) = simulate_series(&th, 1_000_001, &mut rng, InitialPolicy::default(), ExogPolicy::None).unwrap();
        let mut counts = [[0u64; 2]; 2];
        for w in y.values().windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1;
        }
        let f0 = counts[0][1] as f64 / (counts[0][0] + counts[0][1]) as f64;
        let f1 = counts[1][1] as f64 / (counts[1][0] + counts[1][1]) as f64;
        assert!((f0 - expit(0.1)).abs() < 0.002, "{f0}");
        assert!((f1 - expit(0.6)).abs() < 0.002, "{f1}");
    }

    #[test]
    fn reproducible_and_stream_separated() {
        let th = ParamVector::lar(&[0.1, 0.5]).unwrap();
        let draw = |seed, dom, rep| {
            let mut rng = replicate_rng(seed, dom, rep);
            simulate_series(&th, 64, &mut rng, InitialPolicy::default(), ExogPolicy::None).unwrap().0
        };
        assert_eq!(draw(1, 0, 5), draw(1, 0, 5));
        assert_ne!(draw(1, 0, 5), draw(1, 0, 6));
        assert_ne!(draw(1, 0, 5), draw(1, 1, 5));
        assert_ne!(draw(1, 0, 5), draw(2, 0, 5));
    }

    #[test]
    fn covariates_drawn_when_needed() {
        let spec = crate::model::ModelSpec::new(1, 2).unwrap();
        let th = ParamVector::from_parts(spec, &[0.5, -0.5], &[0.1, 0.5]).unwrap();
        let mut rng = replicate_rng(0, 0, 0);
        let (y, x) = simulate_series(&th, 30, &mut rng, InitialPolicy::default(), ExogPolicy::IidStandardNormal).unwrap();
        let x = x.unwrap();
        assert_eq!((y.len(), x.rows(), x.cols()), (30, 30, 2));
        let mut rng = replicate_rng(0, 0, 0);
        assert!(simulate_series(&th, 30, &mut rng, InitialPolicy::default(), ExogPolicy::None).is_err());
    }

    #[test]
    fn rejects_bad_policies() {
        let th = ParamVector::lar(&[0.1, 0.5, 0.2]).unwrap();
        let mut rng = replicate_rng(0, 0, 0);
        let wrong_order = InitialPolicy::Fixed { state: LagState::from_lags(&[1]).unwrap() };
        assert!(simulate_series(&th, 10, &mut rng, wrong_order, ExogPolicy::None).is_err());
        assert!(simulate_series(&th, 10, &mut rng, InitialPolicy::IidBernoulli { q: 1.0 }, ExogPolicy::None).is_err());
        assert!(simulate_series(&th, 2, &mut rng, InitialPolicy::default(), ExogPolicy::None).is_err());
    }
}
