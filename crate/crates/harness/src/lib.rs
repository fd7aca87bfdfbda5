//! Experiment harness for Chebyshev-time HMC: invariant verification,
//! contraction-curve data, leapfrog benchmarks and ideal-flow benchmarks.
//!
//! Every file written through [`output::OutputDir`] gets a
//! `<file>.provenance.json` sidecar holding the configuration, seeds and
//! content hashes of the inputs.

pub mod bench;
pub mod config;
pub mod figure;
pub mod ideal;
pub mod output;
pub mod stats;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] chebhmc::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
