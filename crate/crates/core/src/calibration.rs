//! Probabilistic quality scores of a probability map against binary labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, ProbabilityMap};

pub const DEFAULT_ECE_BINS: usize = 10;
pub const DEFAULT_NLL_EPSILON: f64 = 1e-7;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn check(p: &ProbabilityMap, y: &BinaryMask) -> Result<()> {
    p.geometry().ensure_same_shape(y.geometry())
}

fn label(y: bool) -> f64 {
    if y {
        1.0
    } else {
        0.0
    }
}

pub fn brier_scores(probs: &[f64], labels: &[bool]) -> f64 {
    let mut acc = CompensatedSum::default();
    for (&p, &y) in probs.iter().zip(labels) {
        let d = p - label(y);
        acc.add(d * d);
    }
    acc.total() / probs.len() as f64
}

pub fn nll_scores(probs: &[f64], labels: &[bool], epsilon: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (&p, &y) in probs.iter().zip(labels) {
        let p = p.clamp(epsilon, 1.0 - epsilon);
        acc.add(-if y { p.ln() } else { (1.0 - p).ln() });
    }
    acc.total() / probs.len() as f64
}

/// Per-bin statistics of an equal-width reliability histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_confidence: f64,
    pub accuracy: f64,
}

/// Equal-width bins over `[0, 1]`, left-inclusive, with the last bin also closed on the right.
pub fn reliability_bins(probs: &[f64], labels: &[bool], n_bins: usize) -> Vec<ReliabilityBin> {
    let mut conf = vec![CompensatedSum::default(); n_bins];
    let mut positives = vec![0usize; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (&p, &y) in probs.iter().zip(labels) {
        let b = ((p * n_bins as f64) as usize).min(n_bins - 1);
        conf[b].add(p);
        counts[b] += 1;
        positives[b] += usize::from(y);
    }
    (0..n_bins)
        .map(|b| {
            let n = counts[b];
            let (mean_confidence, accuracy) = if n == 0 {
                (0.0, 0.0)
            } else {
                (conf[b].total() / n as f64, positives[b] as f64 / n as f64)
            };
            ReliabilityBin {
                lower: b as f64 / n_bins as f64,
                upper: (b + 1) as f64 / n_bins as f64,
                count: n,
                mean_confidence,
                accuracy,
            }
        })
        .collect()
}

pub fn ece_scores(probs: &[f64], labels: &[bool], n_bins: usize) -> Result<f64> {
    if n_bins == 0 {
        return Err(Error::InvalidParameter("ECE needs at least one bin".into()));
    }
    let total = probs.len() as f64;
    let mut acc = CompensatedSum::default();
    for bin in reliability_bins(probs, labels, n_bins) {
        if bin.count > 0 {
            acc.add(bin.count as f64 / total * (bin.accuracy - bin.mean_confidence).abs());
        }
    }
    Ok(acc.total())
}

/// Non-interpolated average precision: `sum_k (R_k - R_{k-1}) * P_k` over
/// descending distinct score thresholds. Tied scores enter together.
pub fn average_precision_scores(probs: &[f64], labels: &[bool]) -> Result<f64> {
    let total_pos = labels.iter().filter(|&&y| y).count();
    if total_pos == 0 {
        return Err(Error::NoPositiveLabels);
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));

    let (mut tp, mut seen) = (0usize, 0usize);
    // Accumulate sum(delta_tp * precision) and divide once, so a perfect ranking gives exactly 1.
    let mut acc = CompensatedSum::default();
    let mut i = 0;
    while i < order.len() {
        let score = probs[order[i]];
        let mut group_tp = 0;
        while i < order.len() && probs[order[i]] == score {
            group_tp += usize::from(labels[order[i]]);
            seen += 1;
            i += 1;
        }
        tp += group_tp;
        if group_tp > 0 {
            acc.add(group_tp as f64 * (tp as f64 / seen as f64));
        }
    }
    Ok(acc.total() / total_pos as f64)
}

/// Mean squared error between probability and outcome.
pub fn brier(p: &ProbabilityMap, y: &BinaryMask) -> Result<f64> {
    check(p, y)?;
    Ok(brier_scores(p.cells(), y.cells()))
}

/// Mean binary negative log-likelihood with probabilities clamped to `[eps, 1 - eps]`.
pub fn nll(p: &ProbabilityMap, y: &BinaryMask, epsilon: f64) -> Result<f64> {
    check(p, y)?;
    check_epsilon(epsilon)?;
    Ok(nll_scores(p.cells(), y.cells(), epsilon))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("NLL epsilon must lie in (0, 0.5), got {epsilon}")))
    }
}

/// Expected calibration error over `n_bins` equal-width confidence bins.
pub fn ece(p: &ProbabilityMap, y: &BinaryMask, n_bins: usize) -> Result<f64> {
    check(p, y)?;
    ece_scores(p.cells(), y.cells(), n_bins)
}

pub fn average_precision(p: &ProbabilityMap, y: &BinaryMask) -> Result<f64> {
    check(p, y)?;
    average_precision_scores(p.cells(), y.cells())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub ece: f64,
    pub brier: f64,
    pub nll: f64,
    /// `None` when the labels contain no positives.
    pub average_precision: Option<f64>,
    pub n_pixels: usize,
    pub n_bins: usize,
    pub epsilon: f64,
    pub per_event_ece: Vec<f64>,
    pub reliability: Vec<ReliabilityBin>,
}

impl CalibrationReport {
    /// Scores every pixel of every event as one pooled sample; ECE is also
    /// reported per event.
    pub fn pooled(events: &[(&ProbabilityMap, &BinaryMask)], n_bins: usize, epsilon: f64) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::InsufficientSamples { required: 1, actual: 0 });
        }
        if n_bins == 0 {
            return Err(Error::InvalidParameter("ECE needs at least one bin".into()));
        }
        check_epsilon(epsilon)?;
        let mut probs = Vec::new();
        let mut labels = Vec::new();
        let mut per_event_ece = Vec::with_capacity(events.len());
        for (p, y) in events {
            check(p, y)?;
            per_event_ece.push(ece_scores(p.cells(), y.cells(), n_bins)?);
            probs.extend_from_slice(p.cells());
            labels.extend_from_slice(y.cells());
        }
        let average_precision = match average_precision_scores(&probs, &labels) {
            Ok(ap) => Some(ap),
            Err(Error::NoPositiveLabels) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            ece: ece_scores(&probs, &labels, n_bins)?,
            brier: brier_scores(&probs, &labels),
            nll: nll_scores(&probs, &labels, epsilon),
            average_precision,
            n_pixels: probs.len(),
            n_bins,
            epsilon,
            per_event_ece,
            reliability: reliability_bins(&probs, &labels, n_bins),
        })
    }
}
