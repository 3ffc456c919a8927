//! Per-pixel mean and epistemic spread over stochastic prediction stacks
//! (MC-dropout passes, ensemble members).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{GridGeometry, PredictionStack, ProbabilityMap};

/// Mean probability plus population variance / std of the members at each cell.
///
/// Variance and std are stored as [`ProbabilityMap`]s because both stay within
/// `[0, 0.25]` and `[0, 0.5]` respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySummary {
    pub mean: ProbabilityMap,
    pub variance: ProbabilityMap,
    pub std: ProbabilityMap,
    pub n_samples: usize,
}

impl UncertaintySummary {
    pub fn geometry(&self) -> &GridGeometry {
        self.mean.geometry()
    }
}

/// Cellwise mean and population variance (divide by n).
///
/// Member values at each cell are sorted before summation, so the result depends
/// only on the multiset of members and is bit-identical under any member order
/// or thread count.
pub fn aggregate_stack(stack: &PredictionStack) -> UncertaintySummary {
    let g = *stack.geometry();
    let n = stack.len();
    let members = stack.members();

    let stats: Vec<(f64, f64)> = (0..g.len())
        .into_par_iter()
        .with_min_len(256)
        .map_init(
            || Vec::with_capacity(n),
            |values, i| {
                values.clear();
                values.extend(members.iter().map(|m| m.cells()[i]));
                values.sort_by(f64::total_cmp);
                let mean = (values.iter().sum::<f64>() / n as f64).clamp(values[0], values[n - 1]);
                let mut deviations: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
                deviations.sort_by(f64::total_cmp);
                let variance = (deviations.iter().sum::<f64>() / n as f64).min(0.25);
                (mean, variance)
            },
        )
        .collect();

    let mean = stats.iter().map(|s| s.0).collect();
    let variance: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let std = variance.iter().map(|v| v.sqrt()).collect();
    UncertaintySummary {
        mean: ProbabilityMap::from_valid(g, mean),
        variance: ProbabilityMap::from_valid(g, variance),
        std: ProbabilityMap::from_valid(g, std),
        n_samples: n,
    }
}

/// Concatenates the members of several stacks, in order, into one flat stack.
///
/// Members are weighted equally, so models with more passes weigh more.
pub fn pool_ensembles(stacks: &[PredictionStack]) -> Result<PredictionStack> {
    let first = stacks.first().ok_or(Error::EmptyStack)?;
    let mut members = Vec::with_capacity(stacks.iter().map(PredictionStack::len).sum());
    for s in stacks {
        first.geometry().ensure_same_grid(s.geometry())?;
        members.extend(s.members().iter().cloned());
    }
    PredictionStack::new(members)
}
