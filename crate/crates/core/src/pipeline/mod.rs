//! Experiment sweeps: generation through transport for a grid of seeds,
//! densities, refinement levels and matrix permeabilities, with a manifest of
//! every artifact and summary tables.

mod config;
mod report;
mod run;

pub use config::{IsolatedMode, MeshConfig, RunConfig, Stage};
pub use report::{report_tables, write_tables, PercolationClass, Tables};
pub use run::{
    file_sha256, run_pipeline, Artifact, FlowRow, Manifest, MeshRow, NetworkRow, RunFailure, Summary, TransportRow,
    CONFIG_FILE, MANIFEST_FILE, SUMMARY_FILE,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Network(#[from] crate::network::NetworkError),
    #[error(transparent)]
    Upscale(#[from] crate::upscale::UpscaleError),
    #[error(transparent)]
    Transport(#[from] crate::transport::TransportError),
}

#[cfg(test)]
mod tests;
