//! Exact conditional Fisher information for logistic autoregressive models
//! of binary time series, with maximum-likelihood fitting, Wald inference
//! and a Monte Carlo harness for comparing exact and empirical information.

pub mod cli;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod inference;
pub mod io;
pub mod model;
pub mod montecarlo;

pub use error::{Error, Result};
pub use model::{BinarySeries, ExogMatrix, FisherMatrix, ModelSpec, ParamVector};
