//! Spatial uncertainty metrics for raster wildfire predictions.
//!
//! The crate is organised bottom-up:
//!
//! - [`raster`]: grid geometry, masks, probability maps, prediction stacks and file formats
//! - [`morphology`]: exterior boundaries, centroids, exact Euclidean distance transform, line tracing
//! - [`metrics`]: centroid-oriented boundary distance, average surface distance, Hausdorff distance
//! - [`uncertainty`]: mean / variance aggregation over stochastic prediction stacks
//! - [`calibration`]: ECE, Brier score, NLL and average precision
//! - [`buffer`]: Gaussian KDE over per-event distances and peak (buffer-zone) extraction
//! - [`synthetic`]: deterministic masks and noisy prediction stacks for tests and demos

pub mod buffer;
pub mod calibration;
pub mod error;
pub mod metrics;
pub mod morphology;
pub mod raster;
pub mod synthetic;
pub mod uncertainty;

pub use error::{Error, Result};
pub use raster::{BinaryMask, GridGeometry, Pixel, ProbabilityMap, PredictionStack};

/// Pixel resolution of the input rasters, in meters.
pub const DEFAULT_RESOLUTION_M: f64 = 375.0;

/// Probability at or above which a mean ensemble prediction counts as burned.
pub const DEFAULT_THRESHOLD: f64 = 0.95;
