//! Buffer-zone estimation: a Gaussian KDE over per-event boundary distances and
//! its modal ("peak") distance.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, DistanceReport, MetricStatus};
use crate::raster::{self, BinaryMask, PredictionStack};
use crate::uncertainty;

pub const DEFAULT_KDE_GRID: usize = 512;
pub const MIN_KDE_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    Centroid,
    Asd,
    Hausdorff,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 3] = [Self::Centroid, Self::Asd, Self::Hausdorff];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Centroid => "centroid",
            Self::Asd => "asd",
            Self::Hausdorff => "hausdorff",
        }
    }

    fn pick(&self, r: &DistanceReport) -> (Option<f64>, MetricStatus) {
        match self {
            Self::Centroid => (r.centroid_boundary_m, r.centroid_status),
            Self::Asd => (r.asd_m, r.asd_status),
            Self::Hausdorff => (r.hausdorff_m, r.hausdorff_status),
        }
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-event distances (meters) for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSamples {
    pub metric: DistanceMetric,
    pub values: Vec<f64>,
    pub event_ids: Vec<String>,
}

impl DistanceSamples {
    pub fn new(metric: DistanceMetric, values: Vec<f64>, event_ids: Vec<String>) -> Result<Self> {
        if values.len() != event_ids.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values but {} event ids",
                values.len(),
                event_ids.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParameter(format!("distance sample {v} is not a finite non-negative value")));
        }
        Ok(Self { metric, values, event_ids })
    }

    pub fn kde(&self, bandwidth: Option<f64>, grid_points: usize) -> Result<DensityCurve> {
        kde(&self.values, bandwidth, grid_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KdeStatus {
    Ok,
    /// All samples identical and no bandwidth given: the curve is a point mass.
    DegenerateBandwidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub bandwidth: f64,
    pub status: KdeStatus,
}

impl DensityCurve {
    /// Distance between neighbouring grid points (0 for a point mass).
    pub fn grid_spacing(&self) -> f64 {
        match self.xs.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        if self.status == KdeStatus::DegenerateBandwidth {
            return self.ys.iter().sum();
        }
        self.xs
            .windows(2)
            .zip(self.ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Grid positions that are strictly higher than both neighbours.
    pub fn local_maxima(&self) -> Vec<f64> {
        (1..self.ys.len().saturating_sub(1))
            .filter(|&i| self.ys[i] > self.ys[i - 1] && self.ys[i] > self.ys[i + 1])
            .map(|i| self.xs[i])
            .collect()
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule of thumb `0.9 * min(sd, IQR / 1.34) * n^(-1/5)`.
///
/// Uses the sample standard deviation. When the IQR is zero but the spread is
/// not, the standard deviation alone is used. Returns 0 for constant data.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density over `[max(0, min - 3h), max + 3h]` sampled at `grid_points` points.
pub fn kde(values: &[f64], bandwidth: Option<f64>, grid_points: usize) -> Result<DensityCurve> {
    if values.len() < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: values.len() });
    }
    if grid_points < MIN_KDE_GRID {
        return Err(Error::InvalidParameter(format!("KDE grid needs at least {MIN_KDE_GRID} points, got {grid_points}")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite KDE sample {v}")));
    }
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => return Err(Error::InvalidParameter(format!("KDE bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(values),
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if h == 0.0 {
        return Ok(DensityCurve { xs: vec![min], ys: vec![1.0], bandwidth: 0.0, status: KdeStatus::DegenerateBandwidth });
    }

    let lo = (min - 3.0 * h).max(0.0);
    let hi = max + 3.0 * h;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let xs: Vec<f64> = (0..grid_points).map(|i| lo + i as f64 * step).collect();
    let ys = xs
        .iter()
        .map(|&x| {
            norm * values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();
    Ok(DensityCurve { xs, ys, bandwidth: h, status: KdeStatus::Ok })
}

/// Grid position of the global density maximum; ties go to the smaller distance.
pub fn peak_distance(curve: &DensityCurve) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for (&x, &y) in curve.xs.iter().zip(&curve.ys) {
        if best.is_none_or(|(_, by)| y > by) {
            best = Some((x, y));
        }
    }
    best.map(|(x, _)| x)
        .ok_or_else(|| Error::InvalidParameter("empty density curve".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferConfig {
    pub threshold: f64,
    /// Overrides the resolution carried by the ground-truth rasters.
    pub resolution_m: Option<f64>,
    pub kde_bandwidth: Option<f64>,
    pub kde_grid: usize,
}

impl Default for BufferConfig {
    fn default() -> Self {
        Self {
            threshold: crate::DEFAULT_THRESHOLD,
            resolution_m: None,
            kde_bandwidth: None,
            kde_grid: DEFAULT_KDE_GRID,
        }
    }
}

/// One ground truth and the stochastic predictions for it.
#[derive(Debug, Clone)]
pub struct BufferEvent {
    pub event_id: String,
    pub gt: BinaryMask,
    pub stack: PredictionStack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventDistances {
    pub event_id: String,
    #[serde(flatten)]
    pub distances: DistanceReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakStatus {
    Ok,
    DegenerateBandwidth,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPeak {
    pub metric: DistanceMetric,
    pub status: PeakStatus,
    pub n_samples: usize,
    pub peak_m: Option<f64>,
    pub bandwidth_m: Option<f64>,
    pub grid_spacing_m: Option<f64>,
    /// Events without a value, counted by status.
    pub skipped: BTreeMap<String, usize>,
    #[serde(skip)]
    pub samples: Vec<f64>,
    #[serde(skip)]
    pub curve: Option<DensityCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferReport {
    pub events: Vec<EventDistances>,
    pub metrics: Vec<MetricPeak>,
}

impl BufferReport {
    pub fn metric(&self, metric: DistanceMetric) -> &MetricPeak {
        self.metrics.iter().find(|m| m.metric == metric).expect("all metrics present")
    }
}

/// Distances for a single event: aggregate the stack, threshold the mean and
/// compare the result with the ground truth.
pub fn event_distances(event: &BufferEvent, config: &BufferConfig) -> Result<EventDistances> {
    let g = match config.resolution_m {
        Some(s) => event.gt.geometry().with_resolution(s)?,
        None => *event.gt.geometry(),
    };
    event.gt.geometry().ensure_same_shape(event.stack.geometry())?;
    let summary = uncertainty::aggregate_stack(&event.stack);
    let pred = raster::threshold(&summary.mean, config.threshold)?.with_resolution(g.resolution_m())?;
    let gt = event.gt.with_resolution(g.resolution_m())?;
    Ok(EventDistances { event_id: event.event_id.clone(), distances: metrics::distance_report(&gt, &pred, &g)? })
}

fn summarize(metric: DistanceMetric, events: &[EventDistances], config: &BufferConfig) -> Result<MetricPeak> {
    let mut samples = Vec::new();
    let mut skipped = BTreeMap::new();
    for e in events {
        match metric.pick(&e.distances) {
            (Some(v), MetricStatus::Ok) => samples.push(v),
            (_, status) => *skipped.entry(status.as_str().to_string()).or_insert(0) += 1,
        }
    }
    let mut peak = MetricPeak {
        metric,
        status: PeakStatus::Unavailable,
        n_samples: samples.len(),
        peak_m: None,
        bandwidth_m: None,
        grid_spacing_m: None,
        skipped,
        samples,
        curve: None,
    };
    if peak.samples.len() < 2 {
        return Ok(peak);
    }
    let curve = kde(&peak.samples, config.kde_bandwidth, config.kde_grid)?;
    peak.status = match curve.status {
        KdeStatus::Ok => PeakStatus::Ok,
        KdeStatus::DegenerateBandwidth => PeakStatus::DegenerateBandwidth,
    };
    peak.peak_m = Some(peak_distance(&curve)?);
    peak.bandwidth_m = Some(curve.bandwidth);
    peak.grid_spacing_m = Some(curve.grid_spacing());
    peak.curve = Some(curve);
    Ok(peak)
}

/// Runs the full per-event pipeline in parallel (output keeps input order) and
/// estimates the KDE peak distance for each metric.
pub fn buffer_report(events: &[BufferEvent], config: &BufferConfig) -> Result<BufferReport> {
    if events.len() < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: events.len() });
    }
    if config.kde_grid < MIN_KDE_GRID {
        return Err(Error::InvalidParameter(format!("KDE grid needs at least {MIN_KDE_GRID} points")));
    }
    let per_event = events
        .par_iter()
        .map(|e| event_distances(e, config))
        .collect::<Result<Vec<_>>>()?;
    let metrics = DistanceMetric::ALL
        .iter()
        .map(|&m| summarize(m, &per_event, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(BufferReport { events: per_event, metrics })
}
