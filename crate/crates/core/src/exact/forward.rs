use super::{check_horizon, state_row, LagState, StateDistribution};
use crate::error::Result;
use crate::model::{bernoulli_variance, expit, ExogMatrix, FisherMatrix, OuterAccumulator, ParamVector};

/// `Q_t` for `t = p+1 .. T`, starting from the point mass on `initial`.
pub fn qt_forward(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<Vec<StateDistribution>> {
    let spec = check_horizon(theta, initial, t_len, exog)?;
    let p = spec.p();
    let mut out = Vec::with_capacity(t_len - p);
    let mut q = point_mass(spec.n_states(), initial);
    let mut scratch = ForwardScratch::new(theta);
    for i in p..t_len {
        if i > p {
            q = scratch.step(theta, exog, i - 1, &q);
        }
        out.push(StateDistribution { t: i + 1, q: q.clone() });
    }
    Ok(out)
}

/// Exact conditional information by forward propagation of `Q_t`.
pub fn ex_fi_forward(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<FisherMatrix> {
    let spec = check_horizon(theta, initial, t_len, exog)?;
    let p = spec.p();
    let d = spec.dim();
    let mut acc = OuterAccumulator::new(d);
    let mut z = vec![0.0; d];
    let mut q = point_mass(spec.n_states(), initial);
    let mut scratch = ForwardScratch::new(theta);
    for i in p..t_len {
        if i > p {
            q = scratch.step(theta, exog, i - 1, &q);
        }
        for (code, &mass) in q.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let eta = state_row(theta, exog, i, code as u32, &mut z);
            acc.add(mass * bernoulli_variance(eta), &z);
        }
    }
    Ok(acc.finish())
}

fn point_mass(n: usize, initial: LagState) -> Vec<f64> {
    let mut q = vec![0.0; n];
    q[initial.code() as usize] = 1.0;
    q
}

struct ForwardScratch {
    p: usize,
    z: Vec<f64>,
    p_one: Vec<f64>,
    p_zero: Vec<f64>,
}

impl ForwardScratch {
    fn new(theta: &ParamVector) -> Self {
        let spec = theta.spec();
        Self { p: spec.p(), z: vec![0.0; spec.dim()], p_one: vec![0.0; spec.n_states()], p_zero: vec![0.0; spec.n_states()] }
    }

    /// One Chapman–Kolmogorov step: from `Q` over states preceding time
    /// index `i` to `Q` over states preceding `i + 1`.
    ///
    /// New state `s' = (y_i, y_{i-1}, .., y_{i-p+1})` collects mass from the
    /// two predecessors `(y_{i-1}, .., y_{i-p+1}, w)`, `w ∈ {0, 1}`.
    fn step(&mut self, theta: &ParamVector, exog: Option<&ExogMatrix>, i: usize, q: &[f64]) -> Vec<f64> {
        let p = self.p;
        for code in 0..self.p_one.len() {
            let eta = state_row(theta, exog, i, code as u32, &mut self.z);
            self.p_one[code] = expit(eta);
            self.p_zero[code] = expit(-eta);
        }
        let high = (p - 1) as u32;
        let mut next = vec![0.0; q.len()];
        for (new, slot) in next.iter_mut().enumerate() {
            let new = new as u32;
            let y = new & 1;
            let rest = new >> 1;
            let mut mass = 0.0;
            for w in 0..2u32 {
                let prev = (rest | (w << high)) as usize;
                let pr = if y == 1 { self.p_one[prev] } else { self.p_zero[prev] };
                mass += pr * q[prev];
            }
            *slot = mass;
        }
        next
    }
}
