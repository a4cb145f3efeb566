//! Exact conditional Fisher information of LAR(p)/LARX(p) given the first
//! `p` observations.
//!
//! The information is `Σ_{t=p+1}^T E[v_t z_t z_t' | y_p, .., y_1]`, an
//! expectation over the `2^p` lag configurations that can precede time `t`.
//! Four routes compute it:
//!
//! * [`ex_fi_forward`] propagates the lag-state distribution `Q_t` forward
//!   one Chapman–Kolmogorov step at a time (`O(T·2^p)` kernel evaluations).
//!   This is the production path.
//! * [`ex_fi_functional_iteration`] evaluates each summand by backward
//!   iterated expectations (`O(T²·2^p)`), kept for cross-checking.
//! * [`ex_fi_lar1_closed_form`] is the geometric-sum formula for LAR(1).
//! * [`ex_fi_bruteforce`] enumerates every completion of the series and is
//!   the oracle for the other three.
//!
//! Covariates, when present, are treated as a fixed known trajectory, which
//! makes the transition kernel time-varying.

mod bruteforce;
mod closed_form;
mod forward;
mod iteration;
mod oracle;

use serde::{Deserialize, Serialize};

pub use bruteforce::{enumerate_paths, ex_fi_bruteforce, PathEnumeration, MAX_BRUTEFORCE_STEPS};
pub use closed_form::{ex_fi_lar1_closed_form, Lar1Kernel};
pub use forward::{ex_fi_forward, qt_forward};
pub use iteration::ex_fi_functional_iteration;
pub use oracle::{OracleCase, OracleReport, OracleSweep};

use crate::error::{invalid, Result};
use crate::model::{check_exog, BinarySeries, ExogMatrix, ModelSpec, ParamVector};

/// A configuration `(y_{t-1}, .., y_{t-p})` of the `p` most recent outcomes.
///
/// Encoded as an integer whose bit `k` holds `y_{t-1-k}`; the low bit is the
/// most recent outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LagState {
    p: usize,
    code: u32,
}

impl LagState {
    pub fn from_code(p: usize, code: u32) -> Result<Self> {
        if p == 0 || p > crate::model::MAX_LAG_ORDER {
            return invalid(format!("unsupported lag order {p}"));
        }
        if u64::from(code) >= 1u64 << p {
            return invalid(format!("state code {code} out of range for p = {p}"));
        }
        Ok(Self { p, code })
    }

    /// From `(y_{t-1}, .., y_{t-p})`, most recent first.
    pub fn from_lags(lags: &[u8]) -> Result<Self> {
        let mut code = 0u32;
        for (k, &y) in lags.iter().enumerate() {
            match y {
                0 => {}
                1 => code |= 1 << k,
                _ => return invalid(format!("lag value {y} is not binary")),
            }
        }
        Self::from_code(lags.len(), code)
    }

    /// The state at time `p+1` given the conditioning block `(y_1, .., y_p)`
    /// in chronological order.
    pub fn from_initial_block(block: &[u8]) -> Result<Self> {
        let lags: Vec<u8> = block.iter().rev().copied().collect();
        Self::from_lags(&lags)
    }

    /// The conditioning block of a series for lag order `p`.
    pub fn initial_of(series: &BinarySeries, p: usize) -> Result<Self> {
        if series.len() < p {
            return invalid(format!("series of length {} has no complete initial block for p = {p}", series.len()));
        }
        Self::from_initial_block(&series.values()[..p])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    /// `(y_{t-1}, .., y_{t-p})`.
    pub fn lags(&self) -> Vec<u8> {
        (0..self.p).map(|k| ((self.code >> k) & 1) as u8).collect()
    }

    /// The state one step later after observing `y`.
    pub fn shift_in(&self, y: u8) -> LagState {
        LagState { p: self.p, code: shift_in(self.code, y, self.p) }
    }
}

#[inline]
pub(crate) fn shift_in(code: u32, y: u8, p: usize) -> u32 {
    ((code << 1) | u32::from(y)) & ((1u32 << p) - 1)
}

/// Distribution `Q_t` over the lag states preceding time `t` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub t: usize,
    pub q: Vec<f64>,
}

impl StateDistribution {
    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }

    pub fn prob(&self, state: LagState) -> f64 {
        self.q[state.code() as usize]
    }
}

/// Which algorithm to use for the exact information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactAlgorithm {
    Forward,
    FunctionalIteration,
    ClosedForm,
    BruteForce,
}

impl ExactAlgorithm {
    pub const ALL: [ExactAlgorithm; 4] = [
        ExactAlgorithm::Forward,
        ExactAlgorithm::FunctionalIteration,
        ExactAlgorithm::ClosedForm,
        ExactAlgorithm::BruteForce,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExactAlgorithm::Forward => "forward",
            ExactAlgorithm::FunctionalIteration => "functional_iteration",
            ExactAlgorithm::ClosedForm => "closed_form",
            ExactAlgorithm::BruteForce => "bruteforce",
        }
    }

    /// Whether the algorithm can handle this model and horizon.
    pub fn applicable(&self, spec: ModelSpec, t_len: usize) -> bool {
        match self {
            ExactAlgorithm::ClosedForm => spec.p() == 1 && spec.l() == 0,
            ExactAlgorithm::BruteForce => t_len.saturating_sub(spec.p()) <= MAX_BRUTEFORCE_STEPS,
            _ => true,
        }
    }
}

/// Dispatches to the selected exact-information algorithm.
pub fn ex_fi(
    algorithm: ExactAlgorithm,
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<crate::model::FisherMatrix> {
    match algorithm {
        ExactAlgorithm::Forward => ex_fi_forward(theta, initial, t_len, exog),
        ExactAlgorithm::FunctionalIteration => ex_fi_functional_iteration(theta, initial, t_len, exog),
        ExactAlgorithm::ClosedForm => {
            if exog.is_some_and(|x| x.cols() > 0) {
                return invalid("the closed form covers LAR(1) without covariates only");
            }
            let y1 = initial.lags()[0];
            ex_fi_lar1_closed_form(theta, t_len, y1)
        }
        ExactAlgorithm::BruteForce => ex_fi_bruteforce(theta, initial, t_len, exog),
    }
}

/// Validates the common preconditions and returns the model spec.
pub(crate) fn check_horizon(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<ModelSpec> {
    let spec = theta.spec();
    if initial.p() != spec.p() {
        return invalid(format!("initial state has p = {} but the model has p = {}", initial.p(), spec.p()));
    }
    if t_len < spec.p() + 1 {
        return invalid(format!("horizon T = {t_len} is shorter than p + 1 = {}", spec.p() + 1));
    }
    check_exog(spec, t_len, exog)?;
    Ok(spec)
}

/// Evaluates `z = (x_i, 1, lags(code))` at 0-based time `i` and returns `η`.
#[inline]
pub(crate) fn state_row(
    theta: &ParamVector,
    exog: Option<&ExogMatrix>,
    i: usize,
    code: u32,
    z: &mut [f64],
) -> f64 {
    let spec = theta.spec();
    let l = spec.l();
    if l > 0 {
        if let Some(x) = exog {
            z[..l].copy_from_slice(x.row(i));
        }
    }
    z[l] = 1.0;
    for k in 0..spec.p() {
        z[l + 1 + k] = f64::from((code >> k) & 1);
    }
    theta.as_slice().iter().zip(z.iter()).map(|(a, b)| a * b).sum()
}
