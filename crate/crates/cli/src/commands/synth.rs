use clap::{Args, ValueEnum};
use fireline_uq_core::raster::{io, RasterFormat};
use fireline_uq_core::synthetic::{self, Shape, SuiteSpec, SyntheticSpec};
use fireline_uq_core::{GridGeometry, DEFAULT_RESOLUTION_M};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::{manifest, output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeArg {
    Disk,
    Rectangle,
    TwoBlobs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// Number of events
    #[arg(long, default_value_t = 50)]
    pub events: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, value_enum, default_value_t = ShapeArg::Rectangle)]
    pub shape: ShapeArg,
    /// Rectangle side, or disk diameter, in pixels
    #[arg(long, default_value_t = 10)]
    pub size: usize,
    /// Row shift of the prediction relative to the ground truth
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub offset_row: i64,
    /// Column shift of the prediction relative to the ground truth
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    pub offset_col: i64,
    /// 3x3 dilations applied to the shifted prediction
    #[arg(long, default_value_t = 1)]
    pub dilate_by: usize,
    /// Flip probability for perimeter cells
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Prediction members per event
    #[arg(long, default_value_t = 20)]
    pub members: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum per-axis translation of each event's shape
    #[arg(long, default_value_t = 4)]
    pub jitter: usize,
}

fn centered_shape(args: &SynthArgs) -> Result<Shape, CliError> {
    let (h, w, size) = (args.height, args.width, args.size);
    if size == 0 || size > h || size > w {
        return Err(CliError::Input(format!("--size {size} does not fit a {h}x{w} grid")));
    }
    let radius = size / 2;
    Ok(match args.shape {
        ShapeArg::Rectangle => Shape::Rectangle { top: (h - size) / 2, left: (w - size) / 2, height: size, width: size },
        ShapeArg::Disk => Shape::Disk { center: (h / 2, w / 2), radius },
        ShapeArg::TwoBlobs => Shape::TwoBlobs {
            first: (h / 2, w / 4),
            first_radius: radius,
            second: (h / 2, 3 * w / 4),
            second_radius: radius,
        },
    })
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    #[serde(flatten)]
    args: &'a SynthArgs,
    resolution_m: f64,
    manifest: &'static str,
}

pub fn run(config: &RunConfig, args: &SynthArgs) -> Result<(), CliError> {
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Input("synth needs --out <directory>".into()))?;
    let resolution_m = config.resolution_m.unwrap_or(DEFAULT_RESOLUTION_M);
    let suite = SuiteSpec {
        n_events: args.events,
        geometry: GridGeometry::new(args.height, args.width, resolution_m)?,
        template: SyntheticSpec {
            shape: centered_shape(args)?,
            offset: (args.offset_row, args.offset_col),
            dilate_by: args.dilate_by,
            noise: args.noise,
            seed: args.seed,
            n_members: args.members,
        },
        jitter: args.jitter,
    };
    let events = synthetic::make_suite(&suite)?;

    output::create_dir(out)?;
    let format = config.output_format();
    let ext = format.extension();
    let mut rows = Vec::with_capacity(events.len());
    for event in &events {
        let dir = out.join(&event.event_id);
        output::create_dir(&dir)?;
        let gt_rel = format!("{}/gt.{ext}", event.event_id);
        io::save_mask(&out.join(&gt_rel), format, &event.gt)?;
        let stack_rel = if format == RasterFormat::F32Bin {
            let rel = format!("{}/stack.f32bin", event.event_id);
            io::save_stack(&out.join(&rel), &event.stack)?;
            rel
        } else {
            let rel = format!("{}/stack", event.event_id);
            let stack_dir = out.join(&rel);
            output::create_dir(&stack_dir)?;
            for (i, member) in event.stack.members().iter().enumerate() {
                io::save_probability(&stack_dir.join(format!("member_{i:03}.{ext}")), format, member)?;
            }
            rel
        };
        rows.push((event.event_id.clone(), gt_rel, stack_rel));
    }
    manifest::write(&out.join("manifest.csv"), &rows)?;
    output::print("synth", config, &SynthSummary { args, resolution_m, manifest: "manifest.csv" })
}
