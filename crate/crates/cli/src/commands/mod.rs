pub mod synth;
pub mod verify;

use std::path::{Path, PathBuf};

use fireline_uq_core::buffer::{self, BufferEvent};
use fireline_uq_core::calibration::CalibrationReport;
use fireline_uq_core::metrics::{self, DistanceReport};
use fireline_uq_core::raster::{self, io};
use fireline_uq_core::uncertainty;
use fireline_uq_core::{BinaryMask, GridGeometry, PredictionStack, ProbabilityMap};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{manifest, output, svg};

fn load_gt(config: &RunConfig, path: &Path) -> Result<BinaryMask, CliError> {
    Ok(io::load_mask(path, config.input_format(path), config.resolution_m)?)
}

fn load_stack(config: &RunConfig, path: &Path) -> Result<PredictionStack, CliError> {
    Ok(io::load_stack(path, config.input_format(path), config.resolution_m)?)
}

/// Mean probability of a stack, on the ground truth's grid.
fn mean_on_grid(stack: &PredictionStack, g: &GridGeometry) -> Result<ProbabilityMap, CliError> {
    g.ensure_same_shape(stack.geometry())?;
    Ok(uncertainty::aggregate_stack(stack).mean.with_resolution(g.resolution_m())?)
}

#[derive(Serialize)]
struct MetricsReport {
    n_members: usize,
    #[serde(flatten)]
    distances: DistanceReport,
}

pub fn metrics(config: &RunConfig, gt_path: &Path, pred_path: &Path) -> Result<(), CliError> {
    let gt = load_gt(config, gt_path)?;
    let stack = load_stack(config, pred_path)?;
    let g = *gt.geometry();
    let pred = raster::threshold(&mean_on_grid(&stack, &g)?, config.threshold)?;
    let report = MetricsReport { n_members: stack.len(), distances: metrics::distance_report(&gt, &pred, &g)? };
    output::emit("metrics", config, &report)
}

fn write_reliability_svg(config: &RunConfig, report: &CalibrationReport) -> Result<(), CliError> {
    if let Some(dir) = &config.svg {
        output::create_dir(dir)?;
        output::write_file(&dir.join("reliability.svg"), svg::reliability_plot(&report.reliability).as_bytes())?;
    }
    Ok(())
}

fn calibration_report(config: &RunConfig, pairs: &[(ProbabilityMap, BinaryMask)]) -> Result<CalibrationReport, CliError> {
    let refs: Vec<(&ProbabilityMap, &BinaryMask)> = pairs.iter().map(|(p, y)| (p, y)).collect();
    let report = CalibrationReport::pooled(&refs, config.ece_bins, config.nll_epsilon)?;
    write_reliability_svg(config, &report)?;
    Ok(report)
}

pub fn calibrate(config: &RunConfig, prob_path: &Path, gt_path: &Path) -> Result<(), CliError> {
    let gt = load_gt(config, gt_path)?;
    let mean = mean_on_grid(&load_stack(config, prob_path)?, gt.geometry())?;
    let report = calibration_report(config, &[(mean, gt)])?;
    output::emit("calibrate", config, &report)
}

#[derive(Serialize)]
struct PooledCalibration<'a> {
    event_ids: Vec<&'a str>,
    #[serde(flatten)]
    report: CalibrationReport,
}

pub fn calibrate_manifest(config: &RunConfig, manifest_path: &Path) -> Result<(), CliError> {
    let entries = manifest::read(manifest_path)?;
    let pairs = entries
        .par_iter()
        .map(|e| {
            let gt = load_gt(config, &e.gt_path)?;
            let mean = mean_on_grid(&load_stack(config, &e.stack_path)?, gt.geometry())?;
            Ok((mean, gt))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = calibration_report(config, &pairs)?;
    let pooled = PooledCalibration { event_ids: entries.iter().map(|e| e.event_id.as_str()).collect(), report };
    output::emit("calibrate", config, &pooled)
}

pub fn buffer(config: &RunConfig, manifest_path: &Path) -> Result<(), CliError> {
    let entries = manifest::read(manifest_path)?;
    let events = entries
        .par_iter()
        .map(|e| {
            Ok(BufferEvent {
                event_id: e.event_id.clone(),
                gt: load_gt(config, &e.gt_path)?,
                stack: load_stack(config, &e.stack_path)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = buffer::buffer_report(&events, &config.buffer_config())?;
    if let Some(dir) = &config.svg {
        output::create_dir(dir)?;
        for peak in &report.metrics {
            let path = dir.join(format!("{}_kde.svg", peak.metric.as_str()));
            output::write_file(&path, svg::density_plot(peak).as_bytes())?;
        }
    }
    output::emit("buffer", config, &report)
}

#[derive(Serialize)]
struct AggregateSummary {
    n_samples: usize,
    height: usize,
    width: usize,
    resolution_m: f64,
    max_variance: f64,
    files: Vec<String>,
}

pub fn aggregate(config: &RunConfig, stack_paths: &[PathBuf]) -> Result<(), CliError> {
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Input("aggregate needs --out <directory>".into()))?;
    let stacks = stack_paths.iter().map(|p| load_stack(config, p)).collect::<Result<Vec<_>, _>>()?;
    let pooled = uncertainty::pool_ensembles(&stacks)?;
    let summary = uncertainty::aggregate_stack(&pooled);
    output::create_dir(out)?;
    let format = config.output_format();
    let mut files = Vec::new();
    for (name, map) in [("mean", &summary.mean), ("variance", &summary.variance), ("std", &summary.std)] {
        let file = format!("{name}.{}", format.extension());
        io::save_probability(&out.join(&file), format, map)?;
        files.push(file);
    }
    let g = summary.geometry();
    let report = AggregateSummary {
        n_samples: summary.n_samples,
        height: g.height(),
        width: g.width(),
        resolution_m: g.resolution_m(),
        max_variance: summary.variance.max(),
        files,
    };
    output::print("aggregate", config, &report)
}
