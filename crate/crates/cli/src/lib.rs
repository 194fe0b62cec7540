//! Experiment driver for the foil-winding engine: configuration, the
//! perturbation and conductance studies, noise metrics, CSV and SVG output.

pub mod config;
pub mod experiments;
pub mod metrics;
pub mod output;

pub use config::{Drive, ExperimentConfig, MeshChoice};
