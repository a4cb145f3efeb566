use super::{check_horizon, shift_in, state_row, LagState};
use crate::error::Result;
use crate::model::{bernoulli_variance, expit, ExogMatrix, FisherMatrix, OuterAccumulator, ParamVector};

/// Exact conditional information by backward iterated expectations.
///
/// For each `t0` the per-time integrand `f₁(s) = v z z'` over the states at
/// `t0` is smoothed back to the initial state with
/// `f_k(s) = f_{k-1}(s⁰) + (f_{k-1}(s¹) − f_{k-1}(s⁰))·P(1 | s)`, where `s^y`
/// is `s` with `y` shifted in as the newest outcome. Quadratic in `T`; used
/// to cross-check [`super::ex_fi_forward`].
pub fn ex_fi_functional_iteration(
    theta: &ParamVector,
    initial: LagState,
    t_len: usize,
    exog: Option<&ExogMatrix>,
) -> Result<FisherMatrix> {
    let spec = check_horizon(theta, initial, t_len, exog)?;
    let (p, d, n) = (spec.p(), spec.dim(), spec.n_states());
    let mut z = vec![0.0; d];
    let mut total = OuterAccumulator::new(d);
    let mut p_one = vec![0.0; n];

    for i0 in p..t_len {
        let mut f: Vec<OuterAccumulator> = (0..n)
            .map(|code| {
                let eta = state_row(theta, exog, i0, code as u32, &mut z);
                let mut acc = OuterAccumulator::new(d);
                acc.add(bernoulli_variance(eta), &z);
                acc
            })
            .collect();

        for i in (p..i0).rev() {
            for (code, slot) in p_one.iter_mut().enumerate() {
                *slot = expit(state_row(theta, exog, i, code as u32, &mut z));
            }
            f = (0..n)
                .map(|code| {
                    let c = code as u32;
                    let f0 = &f[shift_in(c, 0, p) as usize];
                    let f1 = &f[shift_in(c, 1, p) as usize];
                    OuterAccumulator::lerp(f0, f1, p_one[code])
                })
                .collect();
        }
        total.add_acc(&f[initial.code() as usize]);
    }
    Ok(total.finish())
}
