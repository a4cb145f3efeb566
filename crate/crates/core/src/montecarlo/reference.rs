//! Published simulation results used as a comparison column by the
//! reproduction commands, plus the parameter settings that produced them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::inference::FiSource;
use crate::model::{ModelSpec, ParamVector};

/// Bumped whenever a stored value changes.
pub const REFERENCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Low,
    High,
}

impl Ratio {
    pub const BOTH: [Ratio; 2] = [Ratio::Low, Ratio::High];

    pub fn as_str(&self) -> &'static str {
        match self {
            Ratio::Low => "low",
            Ratio::High => "high",
        }
    }
}

/// The three published scenario tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableStudy {
    /// LAR(1), testing the lag coefficient.
    Table1,
    /// LAR(2), testing each lag coefficient.
    Table2,
    /// LARX(1) with one normal covariate, testing the covariate and the lag.
    Table3,
}

impl TableStudy {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableStudy::Table1 => "table1",
            TableStudy::Table2 => "table2",
            TableStudy::Table3 => "table3",
        }
    }

    pub fn spec(&self) -> ModelSpec {
        match self {
            TableStudy::Table1 => ModelSpec::lar(1),
            TableStudy::Table2 => ModelSpec::lar(2),
            TableStudy::Table3 => ModelSpec::new(1, 1),
        }
        .expect("static spec")
    }

    /// Tested coefficients as `(name, coordinate)`.
    pub fn tested(&self) -> &'static [(&'static str, usize)] {
        match self {
            TableStudy::Table1 => &[("beta1", 1)],
            TableStudy::Table2 => &[("beta1", 1), ("beta2", 2)],
            TableStudy::Table3 => &[("alpha1", 0), ("beta1", 2)],
        }
    }

    pub const T_GRID: [usize; 3] = [20, 50, 200];

    /// Scenario parameter. The high-ratio covariate coefficient for
    /// [`TableStudy::Table3`] is 0.5 unless overridden.
    pub fn theta(&self, ratio: Ratio, alpha_override: Option<f64>) -> ParamVector {
        let beta: &[f64] = match (self, ratio) {
            (TableStudy::Table1, Ratio::Low) => &[0.1, 0.5],
            (TableStudy::Table1, Ratio::High) => &[0.1, 1.0],
            (TableStudy::Table2, Ratio::Low) => &[0.1, 0.3, 0.5],
            (TableStudy::Table2, Ratio::High) => &[0.1, 1.0, 1.5],
            (TableStudy::Table3, Ratio::Low) => &[0.1, 0.5],
            (TableStudy::Table3, Ratio::High) => &[0.1, 1.0],
        };
        let alpha: Vec<f64> = match self {
            TableStudy::Table3 => vec![alpha_override.unwrap_or(0.5)],
            _ => vec![],
        };
        ParamVector::from_parts(self.spec(), &alpha, beta).expect("static parameters")
    }
}

impl std::str::FromStr for TableStudy {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(TableStudy::Table1),
            "table2" => Ok(TableStudy::Table2),
            "table3" => Ok(TableStudy::Table3),
            other => invalid(format!("unknown table study {other:?}")),
        }
    }
}

/// One published cell group: a (study, T, ratio, coefficient, source) row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedRow {
    pub study: TableStudy,
    pub t_len: usize,
    pub ratio: Ratio,
    pub coefficient: &'static str,
    pub source: FiSource,
    pub type1: f64,
    pub avg_se: f64,
    pub se_at_truth: f64,
    pub mc_se: f64,
    pub observed_sd: f64,
}

use FiSource::{Empirical as EM, Exact as EX};
use Ratio::{High as HI, Low as LO};
use TableStudy::{Table1 as T1, Table2 as T2, Table3 as T3};

macro_rules! rows {
    ($(($st:expr, $t:expr, $r:expr, $c:expr, $s:expr, $a:expr, $b:expr, $cc:expr, $d:expr, $e:expr)),* $(,)?) => {
        &[$(PublishedRow { study: $st, t_len: $t, ratio: $r, coefficient: $c, source: $s,
            type1: $a, avg_se: $b, se_at_truth: $cc, mc_se: $d, observed_sd: $e }),*]
    };
}

/// Published values, 10,000 replicates per scenario.
pub static PUBLISHED: &[PublishedRow] = rows![
    (T1, 20, LO, "beta1", EX, 0.031, 3.737, 2.320, 0.324, 2.290),
    (T1, 20, LO, "beta1", EM, 0.030, 32.870, 12.290, 2.438, 2.290),
    (T1, 20, HI, "beta1", EX, 0.008, 7.868, 3.075, 0.543, 3.015),
    (T1, 20, HI, "beta1", EM, 0.011, 362.300, 30.343, 14.355, 3.015),
    (T1, 50, LO, "beta1", EX, 0.048, 0.617, 0.630, 0.084, 0.632),
    (T1, 50, LO, "beta1", EM, 0.044, 0.956, 0.748, 0.055, 0.632),
    (T1, 50, HI, "beta1", EX, 0.039, 1.065, 1.070, 0.064, 1.074),
    (T1, 50, HI, "beta1", EM, 0.039, 1.222, 1.148, 0.056, 1.074),
    (T1, 200, LO, "beta1", EX, 0.052, 0.299, 0.299, 0.006, 0.299),
    (T1, 200, LO, "beta1", EM, 0.052, 0.297, 0.298, 0.004, 0.299),
    (T1, 200, HI, "beta1", EX, 0.051, 0.332, 0.326, 0.008, 0.325),
    (T1, 200, HI, "beta1", EM, 0.053, 0.324, 0.325, 0.005, 0.325),
    (T2, 20, LO, "beta1", EX, 0.030, 8.960, 4.351, 2.354, 4.312),
    (T2, 20, LO, "beta1", EM, 0.031, 294.409, 56.294, 21.343, 4.312),
    (T2, 20, HI, "beta1", EX, 0.027, 10.149, 8.102, 2.895, 7.944),
    (T2, 20, HI, "beta1", EM, 0.028, 254.576, 42.135, 20.540, 7.944),
    (T2, 20, LO, "beta2", EX, 0.042, 8.001, 3.942, 2.103, 3.901),
    (T2, 20, LO, "beta2", EM, 0.041, 363.611, 64.239, 24.031, 3.901),
    (T2, 20, HI, "beta2", EX, 0.028, 7.868, 7.041, 3.012, 6.931),
    (T2, 20, HI, "beta2", EM, 0.031, 190.567, 36.356, 27.012, 6.931),
    (T2, 50, LO, "beta1", EX, 0.048, 1.031, 1.250, 0.073, 1.247),
    (T2, 50, LO, "beta1", EM, 0.047, 1.544, 1.532, 0.085, 1.247),
    (T2, 50, HI, "beta1", EX, 0.030, 3.339, 3.286, 0.054, 3.284),
    (T2, 50, HI, "beta1", EM, 0.031, 6.433, 1.845, 0.125, 3.284),
    (T2, 50, LO, "beta2", EX, 0.042, 1.011, 0.942, 0.051, 0.949),
    (T2, 50, LO, "beta2", EM, 0.041, 1.836, 1.825, 0.044, 0.949),
    (T2, 50, HI, "beta2", EX, 0.043, 5.025, 3.995, 0.083, 3.993),
    (T2, 50, HI, "beta2", EM, 0.042, 5.806, 4.024, 0.121, 3.993),
    (T2, 200, LO, "beta1", EX, 0.052, 0.734, 0.614, 0.008, 0.612),
    (T2, 200, LO, "beta1", EM, 0.051, 0.849, 0.753, 0.004, 0.612),
    (T2, 200, HI, "beta1", EX, 0.047, 2.562, 2.521, 1.042, 2.522),
    (T2, 200, HI, "beta1", EM, 0.045, 4.834, 3.454, 1.021, 2.522),
    (T2, 200, LO, "beta2", EX, 0.048, 0.801, 0.702, 0.007, 0.701),
    (T2, 200, LO, "beta2", EM, 0.050, 0.913, 0.645, 0.004, 0.701),
    (T2, 200, HI, "beta2", EX, 0.048, 1.762, 1.504, 0.542, 1.503),
    (T2, 200, HI, "beta2", EM, 0.050, 1.864, 1.735, 0.842, 1.503),
    (T3, 20, LO, "alpha1", EX, 0.027, 10.801, 6.382, 2.753, 6.363),
    (T3, 20, LO, "alpha1", EM, 0.029, 241.515, 24.352, 8.954, 6.363),
    (T3, 20, HI, "alpha1", EX, 0.031, 18.535, 17.302, 4.435, 17.522),
    (T3, 20, HI, "alpha1", EM, 0.032, 352.153, 31.233, 14.983, 17.522),
    (T3, 20, LO, "beta1", EX, 0.032, 13.242, 5.942, 2.021, 6.018),
    (T3, 20, LO, "beta1", EM, 0.035, 134.542, 34.240, 10.324, 6.018),
    (T3, 20, HI, "beta1", EX, 0.038, 17.322, 12.011, 4.321, 11.460),
    (T3, 20, HI, "beta1", EM, 0.036, 179.222, 14.324, 9.921, 11.460),
    (T3, 50, LO, "alpha1", EX, 0.048, 0.334, 0.332, 0.062, 0.332),
    (T3, 50, LO, "alpha1", EM, 0.047, 0.852, 0.344, 0.053, 0.332),
    (T3, 50, HI, "alpha1", EX, 0.033, 0.566, 0.529, 0.041, 0.531),
    (T3, 50, HI, "alpha1", EM, 0.033, 0.963, 0.552, 0.063, 0.531),
    (T3, 50, LO, "beta1", EX, 0.042, 0.783, 0.694, 0.073, 0.691),
    (T3, 50, LO, "beta1", EM, 0.041, 1.333, 0.723, 0.042, 0.691),
    (T3, 50, HI, "beta1", EX, 0.038, 0.785, 0.763, 0.050, 0.769),
    (T3, 50, HI, "beta1", EM, 0.039, 1.420, 0.774, 0.041, 0.769),
    (T3, 200, LO, "alpha1", EX, 0.051, 0.194, 0.184, 0.006, 0.185),
    (T3, 200, LO, "alpha1", EM, 0.050, 0.199, 0.193, 0.007, 0.185),
    (T3, 200, HI, "alpha1", EX, 0.048, 0.198, 0.198, 0.003, 0.198),
    (T3, 200, HI, "alpha1", EM, 0.046, 0.196, 0.196, 0.004, 0.198),
    (T3, 200, LO, "beta1", EX, 0.049, 0.315, 0.314, 0.007, 0.314),
    (T3, 200, LO, "beta1", EM, 0.051, 0.316, 0.315, 0.006, 0.314),
    (T3, 200, HI, "beta1", EX, 0.050, 0.343, 0.343, 0.005, 0.343),
    (T3, 200, HI, "beta1", EM, 0.051, 0.342, 0.340, 0.005, 0.343),
];

pub fn published(study: TableStudy, t_len: usize, ratio: Ratio, coefficient: &str, source: FiSource) -> Option<&'static PublishedRow> {
    PUBLISHED.iter().find(|r| {
        r.study == study && r.t_len == t_len && r.ratio == ratio && r.coefficient == coefficient && r.source == source
    })
}

/// Replicates behind every published number.
pub const PUBLISHED_REPLICATES: usize = 10_000;
/// Replicates behind the published CI-length and Frobenius curves.
pub const PUBLISHED_CURVE_REPLICATES: usize = 1_000;
