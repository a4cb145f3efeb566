use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{expit, FisherMatrix, ParamVector};

/// LAR(1) transition kernel: `p(y) = P(Y_t = 1 | Y_{t-1} = y)` and
/// `v(y) = p(y)(1 − p(y))`.
///
/// `p0` and `p1` are rows of a transition matrix, so they need not sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lar1Kernel {
    pub p0: f64,
    pub p1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Lar1Kernel {
    pub fn new(theta: &ParamVector) -> Result<Self> {
        let spec = theta.spec();
        if spec.p() != 1 || spec.l() != 0 {
            return invalid(format!(
                "closed form requires LAR(1) without covariates, got p = {}, l = {}",
                spec.p(),
                spec.l()
            ));
        }
        let b = theta.beta();
        let (e0, e1) = (b[0], b[0] + b[1]);
        Ok(Self { p0: expit(e0), p1: expit(e1), v0: expit(e0) * expit(-e0), v1: expit(e1) * expit(-e1) })
    }

    pub fn p(&self, y: u8) -> f64 {
        if y == 1 {
            self.p1
        } else {
            self.p0
        }
    }

    pub fn v(&self, y: u8) -> f64 {
        if y == 1 {
            self.v1
        } else {
            self.v0
        }
    }

    /// Long-run probability of a one, `p0 / (1 − p1 + p0)`.
    pub fn stationary_one(&self) -> f64 {
        self.p0 / (1.0 - self.p1 + self.p0)
    }
}

/// Closed-form exact information of LAR(1) conditional on `y₁`.
///
/// With `r = p(1) − p(0)`, `D = 1 − r` and `π = p(0)/D`:
///
/// ```text
/// I11 = (v1 − v0)(p(y1) − π)(1 − r^{T−2})/D + (T−2)(p0 v1 + v0 − v0 p1)/D + v(y1)
/// I12 = v1 (p(y1) − π)(1 − r^{T−2})/D + (T−2) p0 v1 / D + v(y1) y1
/// I22 = I12
/// ```
pub fn ex_fi_lar1_closed_form(theta: &ParamVector, t_len: usize, y1: u8) -> Result<FisherMatrix> {
    let k = Lar1Kernel::new(theta)?;
    if t_len < 2 {
        return invalid(format!("horizon T = {t_len} is shorter than 2"));
    }
    if y1 > 1 {
        return invalid(format!("initial value {y1} is not binary"));
    }
    let n = (t_len - 2) as f64;
    let r = k.p1 - k.p0;
    let denom = 1.0 - k.p1 + k.p0;
    let pi = k.p0 / denom;
    let transient = (k.p(y1) - pi) * (1.0 - pow_usize(r, t_len - 2)) / denom;
    let vy = k.v(y1);
    let yf = f64::from(y1);

    let i11 = (k.v1 - k.v0) * transient + n * (k.p0 * k.v1 + k.v0 - k.v0 * k.p1) / denom + vy;
    let i12 = k.v1 * transient + n * k.p0 * k.v1 / denom + vy * yf;
    FisherMatrix::from_row_major(2, &[i11, i12, i12, i12])
}

fn pow_usize(base: f64, exp: usize) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn zero_theta_t4() {
        let th = ParamVector::lar(&[0.0, 0.0]).unwrap();
        let fi = ex_fi_lar1_closed_form(&th, 4, 0).unwrap();
        assert_eq!(fi.to_row_major(), vec![0.75, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn zero_theta_linear_growth() {
        let th = ParamVector::lar(&[0.0, 0.0]).unwrap();
        for t in 2..40 {
            let fi = ex_fi_lar1_closed_form(&th, t, 1).unwrap();
            assert_eq!(fi.get(0, 0), 0.25 * (t - 1) as f64);
        }
    }

    #[test]
    fn horizon_two_is_deterministic_term() {
        let th = ParamVector::lar(&[0.3, 0.9]).unwrap();
        for y1 in 0..2u8 {
            let k = Lar1Kernel::new(&th).unwrap();
            let v = k.v(y1);
            let y = f64::from(y1);
            let fi = ex_fi_lar1_closed_form(&th, 2, y1).unwrap();
            assert_eq!(fi.to_row_major(), vec![v, v * y, v * y, v * y]);
        }
    }

    #[test]
    fn rejects_other_models() {
        assert!(ex_fi_lar1_closed_form(&ParamVector::lar(&[0.0, 0.0, 0.0]).unwrap(), 5, 0).is_err());
        let spec = ModelSpec::new(1, 1).unwrap();
        assert!(ex_fi_lar1_closed_form(&ParamVector::zeros(spec), 5, 0).is_err());
        assert!(ex_fi_lar1_closed_form(&ParamVector::lar(&[0.0, 0.0]).unwrap(), 1, 0).is_err());
    }

    #[test]
    fn kernel_rows_do_not_sum_to_one() {
        let k = Lar1Kernel::new(&ParamVector::lar(&[0.1, 0.5]).unwrap()).unwrap();
        assert!((k.p0 + k.p1 - 1.0).abs() > 0.1);
    }
}
