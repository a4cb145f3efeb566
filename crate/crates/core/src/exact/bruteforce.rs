use rayon::prelude::*;

use super::{check_horizon, LagState};
use crate::error::{Error, Result};
use crate::model::{bernoulli_variance, design_row, expit, ExogMatrix, FisherMatrix, OuterAccumulator, ParamVector};

/// Largest `T − p` for which full path enumeration is attempted.
pub const MAX_BRUTEFORCE_STEPS: usize = 24;

const CHUNK_LOG2: usize = 12;

/// Result of enumerating every completion `(y_{p+1}, .., y_T)`.
#[derive(Debug, Clone)]
pub struct PathEnumeration {
    /// `Σ_paths P(path) · H(path)` with `H` the observed negated Hessian.
    pub fisher: FisherMatrix,
    /// `Σ_paths P(path)`; one up to rounding.
    pub total_probability: f64,
    pub paths: u64,
}

/// Exact information as a literal expectation over all `2^{T−p}` paths.
pub fn ex_fi_bruteforce(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<FisherMatrix> {
    enumerate_paths(theta, initial, t_len, exog).map(|e| e.fisher)
}

/// Enumerates paths in fixed-size chunks (in parallel), then reduces the
/// chunk partials pairwise in index order so the sum does not depend on
/// scheduling.
pub fn enumerate_paths(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<PathEnumeration> {
    let spec = check_horizon(theta, initial, t_len, exog)?;
    let p = spec.p();
    let steps = t_len - p;
    if steps > MAX_BRUTEFORCE_STEPS {
        return Err(Error::SizeLimit { paths_log2: steps, limit_log2: MAX_BRUTEFORCE_STEPS });
    }
    let n_paths = 1u64 << steps;
    let chunk = 1u64 << CHUNK_LOG2.min(steps);
    let n_chunks = n_paths / chunk;

    // Chronological prefix y_1..y_p from the initial state.
    let mut prefix: Vec<u8> = initial.lags();
    prefix.reverse();

    let partials: Vec<(OuterAccumulator, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let d = spec.dim();
            let mut y = vec![0u8; t_len];
            y[..p].copy_from_slice(&prefix);
            let mut z = vec![0.0; d];
            let mut acc = OuterAccumulator::new(d);
            let mut path_h = OuterAccumulator::new(d);
            let mut mass = 0.0;
            for code in c * chunk..(c + 1) * chunk {
                for k in 0..steps {
                    y[p + k] = ((code >> k) & 1) as u8;
                }
                let mut prob = 1.0;
                path_h.reset();
                for i in p..t_len {
                    let eta = design_row(theta, &y, exog, i, &mut z);
                    prob *= if y[i] == 1 { expit(eta) } else { expit(-eta) };
                    path_h.add(bernoulli_variance(eta), &z);
                }
                acc.add_scaled(prob, &path_h);
                mass += prob;
            }
            (acc, mass)
        })
        .collect();

    let (acc, total) = tree_reduce(partials);
    Ok(PathEnumeration { fisher: acc.finish(), total_probability: total, paths: n_paths })
}

fn tree_reduce(mut parts: Vec<(OuterAccumulator, f64)>) -> (OuterAccumulator, f64) {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some((mut a, ma)) = it.next() {
            if let Some((b, mb)) = it.next() {
                a.add_acc(&b);
                next.push((a, ma + mb));
            } else {
                next.push((a, ma));
            }
        }
        parts = next;
    }
    parts.pop().expect("at least one chunk")
}
