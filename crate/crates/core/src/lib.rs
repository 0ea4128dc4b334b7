//! HHL circuit-depth estimation and suitability classification for linear
//! systems.

pub mod circuit;
pub mod matrix;
pub mod hhl;
pub mod features;
pub mod dataset;
pub mod metrics;
pub mod mlp;
