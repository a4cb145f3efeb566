//! Logistic autoregressive model: conditional probabilities, conditional
//! log-likelihood, score and observed (empirical) information.
//!
//! Parameters are laid out as `(α₁..α_l, β₀, β₁..β_p)` everywhere in the
//! crate. `β_k` multiplies `y_{t-k}`. The first `p` observations of a series
//! are the conditioning block and never contribute likelihood terms.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Lag order `p` and exogenous dimension `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    p: usize,
    l: usize,
}

/// Largest lag order for which the `2^p` state space is materialised.
pub const MAX_LAG_ORDER: usize = 20;

impl ModelSpec {
    pub fn new(p: usize, l: usize) -> Result<Self> {
        if p == 0 {
            return invalid("lag order p must be at least 1");
        }
        if p > MAX_LAG_ORDER {
            return invalid(format!("lag order p = {p} exceeds the supported maximum {MAX_LAG_ORDER}"));
        }
        Ok(Self { p, l })
    }

    /// LAR(p): no exogenous covariates.
    pub fn lar(p: usize) -> Result<Self> {
        Self::new(p, 0)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Parameter dimension `l + p + 1`.
    pub fn dim(&self) -> usize {
        self.l + self.p + 1
    }

    pub fn intercept_index(&self) -> usize {
        self.l
    }

    /// Index of `β_k` (coefficient of `y_{t-k}`), `1 ≤ k ≤ p`.
    pub fn lag_index(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.p);
        self.l + k
    }

    /// Number of lag configurations, `2^p`.
    pub fn n_states(&self) -> usize {
        1usize << self.p
    }

    /// Human readable coefficient names in layout order.
    pub fn coefficient_names(&self, covariates: Option<&[String]>) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim());
        for i in 0..self.l {
            match covariates.and_then(|c| c.get(i)) {
                Some(n) => names.push(format!("alpha[{n}]")),
                None => names.push(format!("alpha{}", i + 1)),
            }
        }
        for k in 0..=self.p {
            names.push(format!("beta{k}"));
        }
        names
    }
}

/// Coefficients on the log-odds scale, `(α₁..α_l, β₀..β_p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    spec: ModelSpec,
    values: Vec<f64>,
}

impl ParamVector {
    pub fn new(spec: ModelSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.dim() {
            return invalid(format!(
                "parameter vector has length {} but the model needs {}",
                values.len(),
                spec.dim()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("parameter {i} is not finite"));
        }
        Ok(Self { spec, values })
    }

    pub fn zeros(spec: ModelSpec) -> Self {
        Self { spec, values: vec![0.0; spec.dim()] }
    }

    pub fn from_parts(spec: ModelSpec, alpha: &[f64], beta: &[f64]) -> Result<Self> {
        if alpha.len() != spec.l() || beta.len() != spec.p() + 1 {
            return invalid(format!(
                "expected {} alpha and {} beta coefficients, got {} and {}",
                spec.l(),
                spec.p() + 1,
                alpha.len(),
                beta.len()
            ));
        }
        let mut values = alpha.to_vec();
        values.extend_from_slice(beta);
        Self::new(spec, values)
    }

    /// Convenience constructor for LAR(p) from `(β₀..β_p)`.
    pub fn lar(beta: &[f64]) -> Result<Self> {
        if beta.len() < 2 {
            return invalid("LAR needs at least (beta0, beta1)");
        }
        Self::new(ModelSpec::lar(beta.len() - 1)?, beta.to_vec())
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn alpha(&self) -> &[f64] {
        &self.values[..self.spec.l()]
    }

    pub fn beta(&self) -> &[f64] {
        &self.values[self.spec.l()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy with coordinate `i` replaced.
    pub fn with(&self, i: usize, value: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[i] = value;
        Self::new(self.spec, values)
    }

    /// Linear predictor `x'α + (1, lag)'β`.
    pub fn eta(&self, lag: &[u8], xrow: &[f64]) -> f64 {
        let (alpha, beta) = (self.alpha(), self.beta());
        let mut eta = beta[0];
        for (a, x) in alpha.iter().zip(xrow) {
            eta += a * x;
        }
        for (b, &y) in beta[1..].iter().zip(lag) {
            if y == 1 {
                eta += b;
            }
        }
        eta
    }
}

/// Observed 0/1 outcomes of one subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySeries {
    y: Vec<u8>,
}

impl BinarySeries {
    pub fn new(y: Vec<u8>) -> Result<Self> {
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return invalid(format!("series value at t = {} is {}, expected 0 or 1", i + 1, y[i]));
        }
        Ok(Self { y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn values(&self) -> &[u8] {
        &self.y
    }

    /// Value at 1-based time `t`.
    pub fn at(&self, t: usize) -> u8 {
        self.y[t - 1]
    }
}

/// Time-aligned exogenous covariates, one row per time point (row-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ExogMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return invalid(format!("exogenous data has {} values, expected {rows}x{cols}", data.len()));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!("exogenous value at t = {}, column {} is not finite", i / cols.max(1) + 1, i % cols.max(1) + 1));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return invalid("exogenous rows have differing lengths");
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row for 0-based time index `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Symmetric positive-semidefinite information matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct FisherMatrix {
    m: DMatrix<f64>,
}

impl From<FisherMatrix> for Vec<Vec<f64>> {
    fn from(m: FisherMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for FisherMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return invalid("information matrix rows must form a square matrix");
        }
        Self::from_row_major(d, &rows.concat())
    }
}

impl FisherMatrix {
    pub fn zeros(d: usize) -> Self {
        Self { m: DMatrix::zeros(d, d) }
    }

    /// Wraps a matrix after checking that it is square and exactly symmetric.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return invalid("information matrix must be square");
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return invalid(format!("information matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn from_row_major(d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * d {
            return invalid(format!("expected {} entries for a {d}x{d} matrix", d * d));
        }
        Self::from_matrix(DMatrix::from_row_slice(d, d, values))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d).map(|k| self.m[(k / d, k % d)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| self.m[(i, j)]).collect()).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// All eigenvalues ≥ `-tol · max(trace, 1)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol * self.trace().abs().max(1.0)
    }

    pub fn max_abs_diff(&self, other: &FisherMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.m
            .iter()
            .zip(other.m.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn frobenius_distance(&self, other: &FisherMatrix) -> f64 {
        (&self.m - &other.m).norm()
    }

    /// Inverse through a Cholesky factorisation; fails for non-PD input.
    pub fn inverse(&self, what: &str) -> Result<DMatrix<f64>> {
        match self.m.clone().cholesky() {
            Some(ch) => {
                let inv = ch.inverse();
                if inv.iter().all(|v| v.is_finite()) {
                    Ok(inv)
                } else {
                    Err(Error::NotPositiveDefinite { what: what.to_string() })
                }
            }
            None => Err(Error::NotPositiveDefinite { what: what.to_string() }),
        }
    }

    /// Inverse that is exactly symmetric (upper triangle mirrored).
    pub fn inverse_fisher(&self, what: &str) -> Result<FisherMatrix> {
        let mut inv = self.inverse(what)?;
        let d = inv.nrows();
        for i in 0..d {
            for j in 0..i {
                inv[(i, j)] = inv[(j, i)];
            }
        }
        Ok(FisherMatrix { m: inv })
    }

    pub fn scaled(&self, factor: f64) -> FisherMatrix {
        FisherMatrix { m: &self.m * factor }
    }
}

impl std::ops::Add<&FisherMatrix> for FisherMatrix {
    type Output = FisherMatrix;
    fn add(mut self, rhs: &FisherMatrix) -> FisherMatrix {
        self.m += &rhs.m;
        self
    }
}

impl std::ops::AddAssign<&FisherMatrix> for FisherMatrix {
    fn add_assign(&mut self, rhs: &FisherMatrix) {
        self.m += &rhs.m;
    }
}

/// Accumulates `Σ w·z z'` on the upper triangle and mirrors on completion,
/// so the result is symmetric bit for bit.
#[derive(Debug, Clone)]
pub(crate) struct OuterAccumulator {
    d: usize,
    upper: Vec<f64>,
}

impl OuterAccumulator {
    pub(crate) fn new(d: usize) -> Self {
        Self { d, upper: vec![0.0; d * d] }
    }

    #[inline]
    pub(crate) fn add(&mut self, w: f64, z: &[f64]) {
        debug_assert_eq!(z.len(), self.d);
        for i in 0..self.d {
            let wi = w * z[i];
            if wi == 0.0 {
                continue;
            }
            let row = &mut self.upper[i * self.d..(i + 1) * self.d];
            for j in i..self.d {
                row[j] += wi * z[j];
            }
        }
    }

    pub(crate) fn reset(&mut self) {
        self.upper.iter_mut().for_each(|v| *v = 0.0);
    }

    pub(crate) fn add_scaled(&mut self, w: f64, other: &OuterAccumulator) {
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += w * b;
        }
    }

    /// `a + (b − a)·w`, entrywise.
    pub(crate) fn lerp(a: &OuterAccumulator, b: &OuterAccumulator, w: f64) -> OuterAccumulator {
        let upper = a.upper.iter().zip(&b.upper).map(|(x, y)| x + (y - x) * w).collect();
        OuterAccumulator { d: a.d, upper }
    }

    pub(crate) fn add_acc(&mut self, other: &OuterAccumulator) {
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += b;
        }
    }

    pub(crate) fn finish(self) -> FisherMatrix {
        let d = self.d;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = self.upper[i * d + j];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        FisherMatrix { m }
    }
}

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn expit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(eta))` without overflow.
#[inline]
pub fn log1p_exp(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Bernoulli variance `P(1-P)` at log-odds `eta`, computed without cancellation.
#[inline]
pub fn bernoulli_variance(eta: f64) -> f64 {
    expit(eta) * expit(-eta)
}

/// `P(Y_t = 1 | lag, x_t)`.
pub fn cond_prob(theta: &ParamVector, lag: &[u8], xrow: &[f64]) -> Result<f64> {
    let spec = theta.spec();
    if lag.len() != spec.p() {
        return invalid(format!("lag vector has length {} but p = {}", lag.len(), spec.p()));
    }
    if xrow.len() != spec.l() {
        return invalid(format!("covariate row has length {} but l = {}", xrow.len(), spec.l()));
    }
    if let Some(i) = lag.iter().position(|&v| v > 1) {
        return invalid(format!("lag value {i} is not binary"));
    }
    Ok(expit(theta.eta(lag, xrow)))
}

/// Checks the data against the parameter's model and returns `(T, p)`.
pub(crate) fn check_data(
    theta: &ParamVector,
    series: &BinarySeries,
    exog: Option<&ExogMatrix>,
) -> Result<(usize, usize)> {
    let spec = theta.spec();
    let t_len = series.len();
    if t_len < spec.p() + 1 {
        return invalid(format!("series length {t_len} is shorter than p + 1 = {}", spec.p() + 1));
    }
    check_exog(spec, t_len, exog)?;
    Ok((t_len, spec.p()))
}

pub(crate) fn check_exog(spec: ModelSpec, t_len: usize, exog: Option<&ExogMatrix>) -> Result<()> {
    match (spec.l(), exog) {
        (0, None) => Ok(()),
        (0, Some(x)) if x.cols() == 0 => Ok(()),
        (0, Some(_)) => invalid("covariates supplied for a model without exogenous terms"),
        (l, None) => invalid(format!("model has {l} exogenous covariates but none were supplied")),
        (l, Some(x)) => {
            if x.cols() != l {
                invalid(format!("covariate matrix has {} columns, expected {l}", x.cols()))
            } else if x.rows() != t_len {
                invalid(format!("covariate matrix has {} rows, expected {t_len}", x.rows()))
            } else {
                Ok(())
            }
        }
    }
}

/// Fills `z = (x_i, 1, y_{i-1}, .., y_{i-p})` for 0-based time index `i`
/// and returns the linear predictor.
#[inline]
pub(crate) fn design_row(
    theta: &ParamVector,
    y: &[u8],
    exog: Option<&ExogMatrix>,
    i: usize,
    z: &mut [f64],
) -> f64 {
    let spec = theta.spec();
    let l = spec.l();
    if let Some(x) = exog.filter(|_| l > 0) {
        z[..l].copy_from_slice(x.row(i));
    }
    z[l] = 1.0;
    for k in 1..=spec.p() {
        z[l + k] = f64::from(y[i - k]);
    }
    theta.as_slice().iter().zip(z.iter()).map(|(a, b)| a * b).sum()
}

/// Conditional log-likelihood `Σ_{t=p+1}^T [y_t η_t − log(1 + e^{η_t})]`.
pub fn log_likelihood(theta: &ParamVector, series: &BinarySeries, exog: Option<&ExogMatrix>) -> Result<f64> {
    let (t_len, p) = check_data(theta, series, exog)?;
    let y = series.values();
    let mut z = vec![0.0; theta.spec().dim()];
    let mut ll = 0.0;
    for i in p..t_len {
        let eta = design_row(theta, y, exog, i, &mut z);
        // y·η − log(1+e^η) written as −log(1+e^{∓η}) to stay finite.
        ll -= if y[i] == 1 { log1p_exp(-eta) } else { log1p_exp(eta) };
    }
    Ok(ll)
}

/// Score `Σ z_t (y_t − P_t)`.
pub fn score(theta: &ParamVector, series: &BinarySeries, exog: Option<&ExogMatrix>) -> Result<Vec<f64>> {
    let (t_len, p) = check_data(theta, series, exog)?;
    let y = series.values();
    let d = theta.spec().dim();
    let mut z = vec![0.0; d];
    let mut u = vec![0.0; d];
    for i in p..t_len {
        let eta = design_row(theta, y, exog, i, &mut z);
        let resid = if y[i] == 1 { expit(-eta) } else { -expit(eta) };
        for (uk, zk) in u.iter_mut().zip(&z) {
            *uk += zk * resid;
        }
    }
    Ok(u)
}

/// Negated Hessian `Σ P_t(1−P_t) z_t z_t'` of the conditional log-likelihood.
pub fn hessian(theta: &ParamVector, series: &BinarySeries, exog: Option<&ExogMatrix>) -> Result<FisherMatrix> {
    let (t_len, p) = check_data(theta, series, exog)?;
    let y = series.values();
    let d = theta.spec().dim();
    let mut z = vec![0.0; d];
    let mut acc = OuterAccumulator::new(d);
    for i in p..t_len {
        let eta = design_row(theta, y, exog, i, &mut z);
        acc.add(bernoulli_variance(eta), &z);
    }
    Ok(acc.finish())
}

/// Empirical Fisher information: the negated Hessian at `theta` on the observed data.
///
/// Evaluate at the MLE for plug-in inference or at a known parameter for
/// calibration studies.
pub fn em_fi(theta: &ParamVector, series: &BinarySeries, exog: Option<&ExogMatrix>) -> Result<FisherMatrix> {
    hessian(theta, series, exog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lar1(b0: f64, b1: f64) -> ParamVector {
        ParamVector::lar(&[b0, b1]).unwrap()
    }

    fn series(y: &[u8]) -> BinarySeries {
        BinarySeries::new(y.to_vec()).unwrap()
    }

    #[test]
    fn spec_rejects_zero_lag() {
        assert!(ModelSpec::new(0, 0).is_err());
        assert!(ModelSpec::new(21, 0).is_err());
        assert_eq!(ModelSpec::new(2, 3).unwrap().dim(), 6);
    }

    #[test]
    fn param_layout() {
        let spec = ModelSpec::new(2, 1).unwrap();
        let th = ParamVector::from_parts(spec, &[0.5], &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(th.as_slice(), &[0.5, 0.1, 0.2, 0.3]);
        assert_eq!(th.alpha(), &[0.5]);
        assert_eq!(th.beta(), &[0.1, 0.2, 0.3]);
        assert_eq!(spec.lag_index(2), 3);
        assert!(ParamVector::new(spec, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ParamVector::new(spec, vec![0.0; 3]).is_err());
    }

    #[test]
    fn cond_prob_values() {
        assert_eq!(cond_prob(&lar1(0.0, 0.0), &[1], &[]).unwrap(), 0.5);
        assert_relative_eq!(cond_prob(&lar1(0.1, 0.5), &[1], &[]).unwrap(), 0.645656306, epsilon = 1e-9);
        let spec = ModelSpec::new(1, 1).unwrap();
        let th = ParamVector::from_parts(spec, &[0.5], &[0.1, 1.0]).unwrap();
        assert_relative_eq!(cond_prob(&th, &[0], &[0.0]).unwrap(), 0.524979187, epsilon = 1e-9);
    }

    #[test]
    fn cond_prob_dimension_errors() {
        assert!(cond_prob(&lar1(0.0, 0.0), &[1, 0], &[]).is_err());
        assert!(cond_prob(&lar1(0.0, 0.0), &[1], &[1.0]).is_err());
        assert!(cond_prob(&lar1(0.0, 0.0), &[2], &[]).is_err());
    }

    #[test]
    fn expit_is_stable_at_extremes() {
        assert_eq!(expit(800.0), 1.0);
        assert_eq!(expit(-800.0), 0.0);
        assert!(expit(-40.0) > 0.0);
        assert!(bernoulli_variance(40.0) > 0.0);
        assert!(log1p_exp(800.0).is_finite());
        assert_relative_eq!(log1p_exp(0.0), std::f64::consts::LN_2);
    }

    #[test]
    fn loglik_zero_theta() {
        let s = series(&[1, 0, 0, 1, 1, 0, 1]);
        let ll = log_likelihood(&lar1(0.0, 0.0), &s, None).unwrap();
        assert_relative_eq!(ll, -6.0 * std::f64::consts::LN_2, epsilon = 1e-14);
    }

    #[test]
    fn loglik_single_term() {
        let ll = log_likelihood(&lar1(0.1, 0.5), &series(&[1, 1]), None).unwrap();
        assert_relative_eq!(ll, -0.437487950, epsilon = 1e-9);
    }

    #[test]
    fn loglik_increases_under_separation() {
        let s = series(&[1; 10]);
        let mut prev = f64::NEG_INFINITY;
        for b0 in [-1.0, 0.0, 1.0, 5.0, 20.0] {
            let ll = log_likelihood(&lar1(b0, 0.0), &s, None).unwrap();
            assert!(ll > prev);
            assert!(ll < 0.0);
            prev = ll;
        }
    }

    #[test]
    fn score_at_zero() {
        let y = [1u8, 0, 1, 1, 0, 0, 1];
        let u = score(&lar1(0.0, 0.0), &series(&y), None).unwrap();
        let mut expect = [0.0; 2];
        for t in 1..y.len() {
            let r = f64::from(y[t]) - 0.5;
            expect[0] += r;
            expect[1] += r * f64::from(y[t - 1]);
        }
        assert_eq!(u, expect.to_vec());
    }

    #[test]
    fn hessian_at_zero() {
        let y = [0u8, 1, 1, 0, 1, 0];
        let h = hessian(&lar1(0.0, 0.0), &series(&y), None).unwrap();
        let k = y[..y.len() - 1].iter().filter(|&&v| v == 1).count() as f64;
        assert_eq!(h.get(0, 0), 0.25 * 5.0);
        assert_eq!(h.get(0, 1), 0.25 * k);
        assert_eq!(h.get(1, 1), 0.25 * k);
        assert_eq!(em_fi(&lar1(0.0, 0.0), &series(&y), None).unwrap(), h);
    }

    #[test]
    fn larx_zero_covariate_matches_lar() {
        let y = series(&[0, 1, 1, 0, 1, 1, 1, 0]);
        let spec = ModelSpec::new(1, 2).unwrap();
        let thx = ParamVector::from_parts(spec, &[0.7, -0.3], &[0.2, 0.9]).unwrap();
        let x = ExogMatrix::zeros(8, 2);
        let hx = hessian(&thx, &y, Some(&x)).unwrap();
        let h = hessian(&lar1(0.2, 0.9), &y, None).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(hx.get(2 + i, 2 + j), h.get(i, j));
            }
            for j in 0..4 {
                assert_eq!(hx.get(i, j), 0.0);
            }
        }
        assert_eq!(
            log_likelihood(&thx, &y, Some(&x)).unwrap(),
            log_likelihood(&lar1(0.2, 0.9), &y, None).unwrap()
        );
    }

    #[test]
    fn data_dimension_errors() {
        let th = lar1(0.0, 0.0);
        assert!(log_likelihood(&th, &series(&[1]), None).is_err());
        let spec = ModelSpec::new(1, 1).unwrap();
        let thx = ParamVector::zeros(spec);
        assert!(score(&thx, &series(&[1, 0, 1]), None).is_err());
        assert!(score(&thx, &series(&[1, 0, 1]), Some(&ExogMatrix::zeros(2, 1))).is_err());
        assert!(score(&thx, &series(&[1, 0, 1]), Some(&ExogMatrix::zeros(3, 2))).is_err());
        assert!(BinarySeries::new(vec![0, 2]).is_err());
    }

    #[test]
    fn fisher_inverse_rejects_singular() {
        let m = FisherMatrix::from_row_major(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(m.inverse("test"), Err(Error::NotPositiveDefinite { .. })));
        let m = FisherMatrix::from_row_major(2, &[4.0, 0.0, 0.0, 25.0]).unwrap();
        let inv = m.inverse("test").unwrap();
        assert_relative_eq!(inv[(1, 1)], 0.04, epsilon = 1e-15);
        assert!(FisherMatrix::from_row_major(2, &[1.0, 0.5, 0.4, 1.0]).is_err());
    }
}
