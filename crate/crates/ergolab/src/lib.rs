//! Experiment runner for `ergolab-core`: versioned JSON configs, CSV reports,
//! certificate files and their independent revalidation.

pub mod certificate;
pub mod config;
pub mod formats;
pub mod report;
pub mod runner;

pub use ergolab_core as core;

use config::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] ergolab_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("invalid configuration:\n{}", list(.0))]
    Config(Vec<Diagnostic>),
    #[error("{0}")]
    Format(String),
}

fn list(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}
