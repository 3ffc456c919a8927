//! Boundary distance metrics between a ground-truth region and a false-positive
//! (or any other) region.
//!
//! All three metrics work on exterior boundary pixel sets and report meters:
//! pixel distances are multiplied by the grid resolution at the very end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morphology::{self, PixelPoint};
use crate::raster::{BinaryMask, GridGeometry, Pixel};

/// Why a metric has (or lacks) a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricStatus {
    Ok,
    NoFalsePositives,
    EmptyGt,
    NoIntersection,
    /// One of two arbitrary masks has no exterior boundary (empty or raster-filling).
    EmptyBoundary,
}

impl MetricStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricStatus::Ok => "ok",
            MetricStatus::NoFalsePositives => "no_false_positives",
            MetricStatus::EmptyGt => "empty_gt",
            MetricStatus::NoIntersection => "no_intersection",
            MetricStatus::EmptyBoundary => "empty_boundary",
        }
    }
}

/// Outcome of the centroid-oriented boundary distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentroidBoundary {
    pub distance_m: f64,
    pub distance_px: f64,
    pub gt_centroid: PixelPoint,
    pub fp_centroid: PixelPoint,
    /// First ground-truth boundary pixel met walking from the ground-truth centroid.
    pub gt_hit: Pixel,
    /// First false-positive boundary pixel met walking back from the false-positive centroid.
    pub fp_hit: Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hausdorff {
    pub symmetric_m: f64,
    pub a_to_b_m: f64,
    pub b_to_a_m: f64,
}

fn check_pair(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<()> {
    a.geometry().ensure_same_grid(b.geometry())?;
    a.geometry().ensure_same_shape(g)
}

/// Distance between the ground-truth fireline and the false-positive fireline,
/// measured along the axis joining the two region centroids.
pub fn centroid_boundary_distance(gt: &BinaryMask, pred: &BinaryMask, g: &GridGeometry) -> Result<CentroidBoundary> {
    check_pair(gt, pred, g)?;
    if gt.is_empty() {
        return Err(Error::Degenerate(MetricStatus::EmptyGt));
    }
    let fp = morphology::false_positive_mask(pred, gt)?;
    if fp.is_empty() {
        return Err(Error::Degenerate(MetricStatus::NoFalsePositives));
    }
    let gt_centroid = morphology::centroid(gt)?;
    let fp_centroid = morphology::centroid(&fp)?;
    let gt_boundary = morphology::boundary(gt);
    let fp_boundary = morphology::boundary(&fp);

    let axis = morphology::trace_line(gt_centroid, fp_centroid);
    let gt_hit = axis.iter().find(|p| gt_boundary.get(p.row, p.col));
    let fp_hit = axis.iter().rev().find(|p| fp_boundary.get(p.row, p.col));
    let (Some(&gt_hit), Some(&fp_hit)) = (gt_hit, fp_hit) else {
        return Err(Error::Degenerate(MetricStatus::NoIntersection));
    };
    let distance_px = gt_hit.distance(&fp_hit);
    Ok(CentroidBoundary {
        distance_m: distance_px * g.resolution_m(),
        distance_px,
        gt_centroid,
        fp_centroid,
        gt_hit,
        fp_hit,
    })
}

/// Order-independent mean: sorting first makes the sum depend only on the multiset.
fn mean_sorted(mut values: Vec<f64>) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let max = *values.last().expect("nonempty");
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean.min(max), max)
}

fn ensure_boundary(set: &BinaryMask) -> Result<()> {
    if set.is_empty() {
        Err(Error::Degenerate(MetricStatus::EmptyBoundary))
    } else {
        Ok(())
    }
}

/// Average surface distance between two point sets (already boundaries), in meters.
pub fn average_surface_distance_between_sets(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<f64> {
    check_pair(a, b, g)?;
    ensure_boundary(a)?;
    ensure_boundary(b)?;
    let to_b = morphology::distance_transform(b)?;
    let to_a = morphology::distance_transform(a)?;
    let (mean_ab, _) = mean_sorted(a.pixels().map(|p| to_b.get(p.row, p.col)).collect());
    let (mean_ba, _) = mean_sorted(b.pixels().map(|p| to_a.get(p.row, p.col)).collect());
    Ok(0.5 * (mean_ab + mean_ba) * g.resolution_m())
}

/// Symmetric mean of nearest-boundary distances between the exterior boundaries of `a` and `b`.
pub fn average_surface_distance(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<f64> {
    check_pair(a, b, g)?;
    average_surface_distance_between_sets(&morphology::boundary(a), &morphology::boundary(b), g)
}

fn directed_max_sq(from: &BinaryMask, field: &morphology::DistanceField) -> u64 {
    from.pixels().map(|p| field.get_squared(p.row, p.col)).max().expect("nonempty")
}

fn hausdorff_from_sq(ab_sq: u64, ba_sq: u64, g: &GridGeometry) -> Hausdorff {
    let s = g.resolution_m();
    let ab = (ab_sq as f64).sqrt();
    let ba = (ba_sq as f64).sqrt();
    Hausdorff { symmetric_m: ab.max(ba) * s, a_to_b_m: ab * s, b_to_a_m: ba * s }
}

/// Hausdorff distance between two point sets via distance transforms.
pub fn hausdorff_between_sets(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<Hausdorff> {
    check_pair(a, b, g)?;
    ensure_boundary(a)?;
    ensure_boundary(b)?;
    let to_b = morphology::distance_transform(b)?;
    let to_a = morphology::distance_transform(a)?;
    Ok(hausdorff_from_sq(directed_max_sq(a, &to_b), directed_max_sq(b, &to_a), g))
}

/// Symmetric and directed Hausdorff distances between the exterior boundaries of `a` and `b`.
pub fn hausdorff_distance(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<Hausdorff> {
    check_pair(a, b, g)?;
    hausdorff_between_sets(&morphology::boundary(a), &morphology::boundary(b), g)
}

/// Pairwise max-min Hausdorff between two point sets. O(|a|·|b|).
pub fn hausdorff_bruteforce_between_sets(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<Hausdorff> {
    check_pair(a, b, g)?;
    ensure_boundary(a)?;
    ensure_boundary(b)?;
    let pa: Vec<Pixel> = a.pixels().collect();
    let pb: Vec<Pixel> = b.pixels().collect();
    let directed = |from: &[Pixel], to: &[Pixel]| {
        from.iter()
            .map(|p| to.iter().map(|q| p.distance_sq(q)).min().unwrap())
            .max()
            .unwrap()
    };
    Ok(hausdorff_from_sq(directed(&pa, &pb), directed(&pb, &pa), g))
}

/// Brute-force twin of [`hausdorff_distance`], kept for verification.
pub fn hausdorff_bruteforce(a: &BinaryMask, b: &BinaryMask, g: &GridGeometry) -> Result<Hausdorff> {
    check_pair(a, b, g)?;
    hausdorff_bruteforce_between_sets(&morphology::boundary(a), &morphology::boundary(b), g)
}

/// All distance metrics for one (ground truth, prediction) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub centroid_boundary_m: Option<f64>,
    pub asd_m: Option<f64>,
    pub hausdorff_m: Option<f64>,
    pub directed_hd_gt_to_fp_m: Option<f64>,
    pub directed_hd_fp_to_gt_m: Option<f64>,
    pub centroid_status: MetricStatus,
    pub asd_status: MetricStatus,
    pub hausdorff_status: MetricStatus,
    pub centroid_detail: Option<CentroidBoundary>,
    pub resolution_m: f64,
    pub gt_pixels: usize,
    pub pred_pixels: usize,
    pub fp_pixels: usize,
}

fn split<T>(r: Result<T>) -> Result<(Option<T>, MetricStatus)> {
    match r {
        Ok(v) => Ok((Some(v), MetricStatus::Ok)),
        Err(Error::Degenerate(status)) => Ok((None, status)),
        Err(e) => Err(e),
    }
}

/// Evaluates every metric between `gt` and the false-positive region `pred & !gt`.
///
/// Degenerate inputs show up as per-metric statuses; only geometry mismatches error.
pub fn distance_report(gt: &BinaryMask, pred: &BinaryMask, g: &GridGeometry) -> Result<DistanceReport> {
    check_pair(gt, pred, g)?;
    let fp = morphology::false_positive_mask(pred, gt)?;
    let (centroid, centroid_status) = split(centroid_boundary_distance(gt, pred, g))?;

    let region_status = if gt.is_empty() {
        MetricStatus::EmptyGt
    } else if fp.is_empty() {
        MetricStatus::NoFalsePositives
    } else {
        MetricStatus::Ok
    };
    let (asd, asd_status, hd, hd_status) = if region_status == MetricStatus::Ok {
        let (asd, asd_status) = split(average_surface_distance(gt, &fp, g))?;
        let (hd, hd_status) = split(hausdorff_distance(gt, &fp, g))?;
        (asd, asd_status, hd, hd_status)
    } else {
        (None, region_status, None, region_status)
    };

    Ok(DistanceReport {
        centroid_boundary_m: centroid.map(|c| c.distance_m),
        asd_m: asd,
        hausdorff_m: hd.map(|h| h.symmetric_m),
        directed_hd_gt_to_fp_m: hd.map(|h| h.a_to_b_m),
        directed_hd_fp_to_gt_m: hd.map(|h| h.b_to_a_m),
        centroid_status,
        asd_status,
        hausdorff_status: hd_status,
        centroid_detail: centroid,
        resolution_m: g.resolution_m(),
        gt_pixels: gt.count(),
        pred_pixels: pred.count(),
        fp_pixels: fp.count(),
    })
}
