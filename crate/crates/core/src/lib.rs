//! Procedural generation, ground truth, rendering, scoring and analysis for
//! two visuospatial perspective-taking evaluations: the Rotating Figure Task
//! (RFT) and the Director Task.

pub mod analysis;
pub mod dataset;
pub mod director;
pub mod geometry;
pub mod oracle;
pub mod prompts;
pub mod render;
pub mod rft;
pub mod scoring;
pub mod seed;
pub mod store;
pub mod symbols;
pub mod transcript;
pub mod trial;

/// Version string written into dataset manifests.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
