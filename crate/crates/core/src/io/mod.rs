//! Panel CSV files, JSON result documents and run manifests.

mod document;
mod panel;

pub use document::{
    config_hash, content_hash, CoefficientInference, CoefficientReport, DataSummary, FunctionalReport, ModelSummary,
    OutputRecord, ResultDocument, RunManifest, RunMetadata, TOOL_NAME, TOOL_VERSION,
};
pub use panel::{read_panel, write_panel, PanelData, PanelSubject, Threshold};
