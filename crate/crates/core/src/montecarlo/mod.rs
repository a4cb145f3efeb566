//! Simulation of LAR/LARX series and the Monte Carlo studies comparing
//! exact and empirical information.
//!
//! Every replicate draws from its own ChaCha stream keyed by the study seed,
//! so results are reproducible and independent of thread count.

mod reference;
mod scenario;
mod sim;
mod studies;

pub use reference::{
    published, PublishedRow, Ratio, TableStudy, PUBLISHED, PUBLISHED_CURVE_REPLICATES, PUBLISHED_REPLICATES,
    REFERENCE_VERSION,
};
pub use scenario::{
    mean_sd, run_replicate, run_scenario, run_scenario_detailed, summarize, McSummary, ReplicateOutcome,
    ScenarioConfig, SourceSummary,
};
pub use sim::{replicate_rng, simulate_series, ExogPolicy, InitialPolicy};
pub use studies::{
    ci_length_study, frobenius_discrepancy, frobenius_study, CiLengthRow, FrobeniusMode, FrobeniusRow, GridPoint,
    StudySettings,
};
