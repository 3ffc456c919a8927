use std::path::{Path, PathBuf};

use fireline_uq_core::buffer::{BufferConfig, MIN_KDE_GRID};
use fireline_uq_core::raster::RasterFormat;
use serde::Serialize;

use crate::error::CliError;
use crate::{FormatArg, RunArgs};

/// Effective settings for one invocation; embedded verbatim in every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub threshold: f64,
    /// `None` keeps the resolution stored in f32bin headers.
    pub resolution_m: Option<f64>,
    pub ece_bins: usize,
    pub nll_epsilon: f64,
    pub kde_bandwidth: Option<f64>,
    pub kde_grid: usize,
    pub format: Option<&'static str>,
    #[serde(skip)]
    pub raster_format: Option<RasterFormat>,
    #[serde(skip)]
    pub svg: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn invalid(msg: String) -> CliError {
    CliError::Input(msg)
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, CliError> {
        if !(0.0..=1.0).contains(&args.threshold) {
            return Err(invalid(format!("--threshold must lie in [0, 1], got {}", args.threshold)));
        }
        if let Some(s) = args.resolution_m {
            if !(s.is_finite() && s > 0.0) {
                return Err(invalid(format!("--resolution-m must be positive, got {s}")));
            }
        }
        if args.ece_bins == 0 {
            return Err(invalid("--ece-bins must be at least 1".into()));
        }
        if !(args.nll_epsilon > 0.0 && args.nll_epsilon < 0.5) {
            return Err(invalid(format!("--nll-epsilon must lie in (0, 0.5), got {}", args.nll_epsilon)));
        }
        if let Some(h) = args.kde_bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid(format!("--kde-bandwidth must be positive, got {h}")));
            }
        }
        if args.kde_grid < MIN_KDE_GRID {
            return Err(invalid(format!("--kde-grid must be at least {MIN_KDE_GRID}, got {}", args.kde_grid)));
        }
        let raster_format = args.format.map(|f| match f {
            FormatArg::F32bin => RasterFormat::F32Bin,
            FormatArg::Csv => RasterFormat::Csv,
            FormatArg::Pgm => RasterFormat::Pgm,
        });
        Ok(Self {
            threshold: args.threshold,
            resolution_m: args.resolution_m,
            ece_bins: args.ece_bins,
            nll_epsilon: args.nll_epsilon,
            kde_bandwidth: args.kde_bandwidth,
            kde_grid: args.kde_grid,
            format: raster_format.map(|f| f.extension()),
            raster_format,
            svg: args.svg.clone(),
            out: args.out.clone(),
        })
    }

    pub fn buffer_config(&self) -> BufferConfig {
        BufferConfig {
            threshold: self.threshold,
            resolution_m: self.resolution_m,
            kde_bandwidth: self.kde_bandwidth,
            kde_grid: self.kde_grid,
        }
    }

    /// Format of an input path: `--format`, else the extension, else f32bin.
    ///
    /// For directories without `--format`, the first format with matching files wins.
    pub fn input_format(&self, path: &Path) -> RasterFormat {
        if let Some(f) = self.raster_format {
            return f;
        }
        if path.is_dir() {
            let entries: Vec<PathBuf> = std::fs::read_dir(path)
                .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
                .unwrap_or_default();
            return [RasterFormat::F32Bin, RasterFormat::Csv, RasterFormat::Pgm]
                .into_iter()
                .find(|f| entries.iter().any(|p| RasterFormat::from_path(p) == Some(*f)))
                .unwrap_or(RasterFormat::F32Bin);
        }
        RasterFormat::from_path(path).unwrap_or(RasterFormat::F32Bin)
    }

    pub fn output_format(&self) -> RasterFormat {
        self.raster_format.unwrap_or(RasterFormat::F32Bin)
    }
}
