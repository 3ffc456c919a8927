use clap::Args;
use fireline_uq_core::{metrics, morphology, BinaryMask, GridGeometry, DEFAULT_RESOLUTION_M};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Random masks for the distance-transform suite
    #[arg(long, default_value_t = 1000)]
    pub dt_cases: usize,
    /// Largest side of the distance-transform masks
    #[arg(long, default_value_t = 16)]
    pub dt_max_size: usize,
    /// Random mask pairs for the Hausdorff suite
    #[arg(long, default_value_t = 500)]
    pub hd_cases: usize,
    /// Side of the Hausdorff masks
    #[arg(long, default_value_t = 32)]
    pub hd_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct SuiteResult {
    name: &'static str,
    cases: usize,
    mismatches: usize,
    first_mismatch: Option<usize>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    args: &'a VerifyArgs,
    passed: bool,
    suites: Vec<SuiteResult>,
}

fn random_mask(rng: &mut ChaCha8Rng, g: GridGeometry) -> BinaryMask {
    let density: f64 = rng.random_range(0.02..0.9);
    BinaryMask::from_fn(g, |_, _| rng.random_bool(density))
}

fn suite(name: &'static str, outcomes: Vec<bool>) -> SuiteResult {
    SuiteResult {
        name,
        cases: outcomes.len(),
        mismatches: outcomes.iter().filter(|ok| !**ok).count(),
        first_mismatch: outcomes.iter().position(|ok| !ok),
    }
}

fn distance_transform_suite(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let mut masks = Vec::with_capacity(args.dt_cases);
    while masks.len() < args.dt_cases {
        let h = rng.random_range(1..=args.dt_max_size);
        let w = rng.random_range(1..=args.dt_max_size);
        let m = random_mask(rng, GridGeometry::new(h, w, DEFAULT_RESOLUTION_M)?);
        if !m.is_empty() {
            masks.push(m);
        }
    }
    let outcomes = masks
        .par_iter()
        .map(|m| {
            let fast = morphology::distance_transform(m)?;
            let slow = morphology::distance_transform_bruteforce(m)?;
            Ok(fast.squared() == slow.squared() && fast.cells() == slow.cells())
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(suite("distance_transform", outcomes))
}

fn hausdorff_suite(args: &VerifyArgs, rng: &mut ChaCha8Rng) -> Result<SuiteResult, CliError> {
    let g = GridGeometry::new(args.hd_size, args.hd_size, DEFAULT_RESOLUTION_M)?;
    let mut pairs = Vec::with_capacity(args.hd_cases);
    while pairs.len() < args.hd_cases {
        let a = random_mask(rng, g);
        let b = random_mask(rng, g);
        if !morphology::boundary(&a).is_empty() && !morphology::boundary(&b).is_empty() {
            pairs.push((a, b));
        }
    }
    let outcomes = pairs
        .par_iter()
        .map(|(a, b)| {
            let fast = metrics::hausdorff_distance(a, b, &g)?;
            let slow = metrics::hausdorff_bruteforce(a, b, &g)?;
            Ok(fast == slow)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(suite("hausdorff", outcomes))
}

pub fn run(config: &RunConfig, args: &VerifyArgs) -> Result<(), CliError> {
    if args.dt_max_size == 0 || args.hd_size == 0 {
        return Err(CliError::Input("mask sizes must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let suites = vec![distance_transform_suite(args, &mut rng)?, hausdorff_suite(args, &mut rng)?];
    let passed = suites.iter().all(|s| s.mismatches == 0);
    output::emit("verify", config, &VerifyReport { args, passed, suites })?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Internal("accelerated results disagree with brute force".into()))
    }
}
