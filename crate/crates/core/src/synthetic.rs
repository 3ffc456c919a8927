//! Deterministic ground-truth masks and noisy prediction stacks.
//!
//! Noise is drawn from a ChaCha stream keyed by `(seed, member)`, one draw per
//! cell in row-major order, so every `(seed, member, cell)` triple maps to a
//! fixed random value no matter how members are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::buffer::BufferEvent;
use crate::error::{Error, Result};
use crate::morphology;
use crate::raster::{BinaryMask, GridGeometry, PredictionStack, ProbabilityMap};

/// Soft value for predicted fire; just above the default 0.95 threshold.
pub const FIRE_VALUE: f64 = 0.98;
/// Soft value for predicted background.
pub const BACKGROUND_VALUE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Shape {
    /// All pixels within `radius` (Euclidean) of `center`.
    Disk { center: (usize, usize), radius: usize },
    Rectangle { top: usize, left: usize, height: usize, width: usize },
    TwoBlobs { first: (usize, usize), first_radius: usize, second: (usize, usize), second_radius: usize },
}

fn disk_bounds(center: (usize, usize), radius: usize) -> (i64, i64, i64, i64) {
    let (r, c, rad) = (center.0 as i64, center.1 as i64, radius as i64);
    (r - rad, c - rad, r + rad, c + rad)
}

impl Shape {
    /// Inclusive bounding box `(top, left, bottom, right)`.
    fn bounds(&self) -> (i64, i64, i64, i64) {
        match *self {
            Shape::Disk { center, radius } => disk_bounds(center, radius),
            Shape::Rectangle { top, left, height, width } => {
                (top as i64, left as i64, (top + height) as i64 - 1, (left + width) as i64 - 1)
            }
            Shape::TwoBlobs { first, first_radius, second, second_radius } => {
                let a = disk_bounds(first, first_radius);
                let b = disk_bounds(second, second_radius);
                (a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3))
            }
        }
    }

    fn fits(&self, g: &GridGeometry) -> bool {
        if let Shape::Rectangle { height, width, .. } = self {
            if *height == 0 || *width == 0 {
                return false;
            }
        }
        let (t, l, b, r) = self.bounds();
        g.contains(t, l) && g.contains(b, r)
    }

    fn contains(&self, row: usize, col: usize) -> bool {
        let in_disk = |center: (usize, usize), radius: usize| {
            let dr = row.abs_diff(center.0);
            let dc = col.abs_diff(center.1);
            dr * dr + dc * dc <= radius * radius
        };
        match *self {
            Shape::Disk { center, radius } => in_disk(center, radius),
            Shape::Rectangle { top, left, height, width } => {
                (top..top + height).contains(&row) && (left..left + width).contains(&col)
            }
            Shape::TwoBlobs { first, first_radius, second, second_radius } => {
                in_disk(first, first_radius) || in_disk(second, second_radius)
            }
        }
    }

    /// The same shape moved by `(drow, dcol)`; `None` if a coordinate would go negative.
    pub fn translated(&self, drow: i64, dcol: i64) -> Option<Shape> {
        let mv = |p: (usize, usize)| -> Option<(usize, usize)> {
            Some((usize::try_from(p.0 as i64 + drow).ok()?, usize::try_from(p.1 as i64 + dcol).ok()?))
        };
        Some(match *self {
            Shape::Disk { center, radius } => Shape::Disk { center: mv(center)?, radius },
            Shape::Rectangle { top, left, height, width } => {
                let (top, left) = mv((top, left))?;
                Shape::Rectangle { top, left, height, width }
            }
            Shape::TwoBlobs { first, first_radius, second, second_radius } => Shape::TwoBlobs {
                first: mv(first)?,
                first_radius,
                second: mv(second)?,
                second_radius,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub shape: Shape,
    /// Shift of the prediction relative to the ground truth, `(drow, dcol)`.
    pub offset: (i64, i64),
    /// Number of 3x3 dilations applied to the shifted prediction.
    pub dilate_by: usize,
    /// Probability of flipping each perimeter cell, per member.
    pub noise: f64,
    pub seed: u64,
    pub n_members: usize,
}

impl SyntheticSpec {
    pub fn new(shape: Shape) -> Self {
        Self { shape, offset: (0, 0), dilate_by: 0, noise: 0.0, seed: 0, n_members: 1 }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidParameter(format!("noise must lie in [0, 1], got {}", self.noise)));
        }
        if self.n_members == 0 {
            return Err(Error::InvalidParameter("n_members must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn make_mask(spec: &SyntheticSpec, g: &GridGeometry) -> Result<BinaryMask> {
    spec.validate()?;
    if !spec.shape.fits(g) {
        return Err(Error::InvalidParameter(format!("{:?} does not fit in {g}", spec.shape)));
    }
    Ok(BinaryMask::from_fn(*g, |r, c| spec.shape.contains(r, c)))
}

/// Cells on either side of the mask edge: exterior plus interior boundary.
pub fn perimeter(m: &BinaryMask) -> BinaryMask {
    morphology::boundary(m).or(&morphology::inner_boundary(m)).expect("same geometry")
}

/// The deterministic (noise-free) prediction: `gt` shifted by `offset`, then dilated.
pub fn base_prediction(gt: &BinaryMask, spec: &SyntheticSpec) -> BinaryMask {
    let mut pred = gt.shifted(spec.offset.0, spec.offset.1);
    for _ in 0..spec.dilate_by {
        pred = morphology::dilate(&pred);
    }
    pred
}

/// `n_members` soft predictions of `gt`: the base prediction mapped to
/// {[`BACKGROUND_VALUE`], [`FIRE_VALUE`]}, with each perimeter cell flipped
/// independently with probability `noise`.
pub fn make_prediction_stack(gt: &BinaryMask, spec: &SyntheticSpec) -> Result<PredictionStack> {
    spec.validate()?;
    let base = base_prediction(gt, spec);
    let edge = perimeter(&base);
    let g = *gt.geometry();
    let members = (0..spec.n_members)
        .into_par_iter()
        .map(|member| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(member as u64);
            let cells = base
                .cells()
                .iter()
                .zip(edge.cells())
                .map(|(&fire, &on_edge)| {
                    let u: f64 = rng.random();
                    let fire = if on_edge && u < spec.noise { !fire } else { fire };
                    if fire {
                        FIRE_VALUE
                    } else {
                        BACKGROUND_VALUE
                    }
                })
                .collect();
            ProbabilityMap::from_valid(g, cells)
        })
        .collect();
    PredictionStack::new(members)
}

/// A set of events built from one template, each translated by a random jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub n_events: usize,
    pub geometry: GridGeometry,
    pub template: SyntheticSpec,
    /// Maximum per-axis translation of each event's shape, in pixels.
    pub jitter: usize,
}

/// Builds `n_events` events named `event_000`, `event_001`, ...
pub fn make_suite(suite: &SuiteSpec) -> Result<Vec<BufferEvent>> {
    let g = suite.geometry;
    let (top, left, bottom, right) = suite.template.shape.bounds();
    if !suite.template.shape.fits(&g) {
        return Err(Error::InvalidParameter(format!("{:?} does not fit in {g}", suite.template.shape)));
    }
    let j = suite.jitter as i64;
    let row_range = (-j).max(-top)..=j.min(g.height() as i64 - 1 - bottom);
    let col_range = (-j).max(-left)..=j.min(g.width() as i64 - 1 - right);

    let mut rng = ChaCha8Rng::seed_from_u64(suite.template.seed);
    (0..suite.n_events)
        .map(|i| {
            let dr = rng.random_range(row_range.clone());
            let dc = rng.random_range(col_range.clone());
            let shape = suite.template.shape.translated(dr, dc).expect("jitter keeps shape in bounds");
            let spec = SyntheticSpec { shape, seed: rng.next_u64(), ..suite.template };
            let gt = make_mask(&spec, &g)?;
            let stack = make_prediction_stack(&gt, &spec)?;
            Ok(BufferEvent { event_id: format!("event_{i:03}"), gt, stack })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::threshold;
    use crate::uncertainty::aggregate_stack;

    fn geom(h: usize, w: usize) -> GridGeometry {
        GridGeometry::new(h, w, 375.0).unwrap()
    }

    #[test]
    fn disk_radius_zero_is_one_pixel() {
        let spec = SyntheticSpec::new(Shape::Disk { center: (5, 5), radius: 0 });
        let m = make_mask(&spec, &geom(10, 10)).unwrap();
        assert_eq!(m.count(), 1);
        assert!(m.get(5, 5));
    }

    #[test]
    fn rectangle_pixel_count() {
        let spec = SyntheticSpec::new(Shape::Rectangle { top: 1, left: 1, height: 4, width: 4 });
        assert_eq!(make_mask(&spec, &geom(8, 8)).unwrap().count(), 16);
    }

    #[test]
    fn out_of_bounds_shapes_rejected() {
        let g = geom(8, 8);
        let spec = SyntheticSpec::new(Shape::Rectangle { top: 5, left: 1, height: 4, width: 4 });
        assert!(make_mask(&spec, &g).is_err());
        let spec = SyntheticSpec::new(Shape::Disk { center: (1, 4), radius: 2 });
        assert!(make_mask(&spec, &g).is_err());
        let spec = SyntheticSpec::new(Shape::Rectangle { top: 1, left: 1, height: 0, width: 4 });
        assert!(make_mask(&spec, &g).is_err());
    }

    #[test]
    fn invalid_spec_parameters() {
        let g = geom(8, 8);
        let mut spec = SyntheticSpec::new(Shape::Disk { center: (4, 4), radius: 1 });
        spec.noise = 1.5;
        assert!(make_mask(&spec, &g).is_err());
        spec.noise = 0.0;
        spec.n_members = 0;
        assert!(make_mask(&spec, &g).is_err());
    }

    #[test]
    fn two_blobs_are_disjoint_disks() {
        let spec = SyntheticSpec::new(Shape::TwoBlobs { first: (5, 5), first_radius: 2, second: (5, 15), second_radius: 1 });
        let m = make_mask(&spec, &geom(12, 20)).unwrap();
        assert_eq!(m.count(), 13 + 5);
    }

    #[test]
    fn generation_is_deterministic() {
        let g = geom(24, 24);
        let spec = SyntheticSpec {
            noise: 0.3,
            seed: 7,
            n_members: 8,
            ..SyntheticSpec::new(Shape::Disk { center: (12, 12), radius: 5 })
        };
        let gt = make_mask(&spec, &g).unwrap();
        assert_eq!(make_mask(&spec, &g).unwrap(), gt);
        let a = make_prediction_stack(&gt, &spec).unwrap();
        let b = make_prediction_stack(&gt, &spec).unwrap();
        assert_eq!(a, b);
        let other = make_prediction_stack(&gt, &SyntheticSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn noise_free_identity_thresholds_back_to_gt() {
        let g = geom(20, 20);
        let spec = SyntheticSpec { n_members: 5, ..SyntheticSpec::new(Shape::Disk { center: (10, 10), radius: 4 }) };
        let gt = make_mask(&spec, &g).unwrap();
        for m in make_prediction_stack(&gt, &spec).unwrap().members() {
            assert_eq!(threshold(m, 0.95).unwrap(), gt);
        }
    }

    #[test]
    fn one_pixel_dilation_false_positives_are_the_exterior_ring() {
        let g = geom(20, 20);
        let spec = SyntheticSpec { dilate_by: 1, ..SyntheticSpec::new(Shape::Disk { center: (10, 10), radius: 4 }) };
        let gt = make_mask(&spec, &g).unwrap();
        let stack = make_prediction_stack(&gt, &spec).unwrap();
        let pred = threshold(&stack.members()[0], 0.95).unwrap();
        let fp = morphology::false_positive_mask(&pred, &gt).unwrap();
        assert_eq!(fp, morphology::boundary(&gt));
    }

    #[test]
    fn perimeter_noise_concentrates_variance_on_the_perimeter() {
        let g = geom(24, 24);
        let spec = SyntheticSpec {
            noise: 0.5,
            seed: 11,
            n_members: 50,
            ..SyntheticSpec::new(Shape::Rectangle { top: 6, left: 6, height: 10, width: 12 })
        };
        let gt = make_mask(&spec, &g).unwrap();
        let summary = aggregate_stack(&make_prediction_stack(&gt, &spec).unwrap());
        let edge = perimeter(&gt);
        for (i, &v) in summary.variance.cells().iter().enumerate() {
            if edge.cells()[i] {
                assert!(v > 0.0);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn suite_events_are_translated_copies() {
        let suite = SuiteSpec {
            n_events: 6,
            geometry: geom(32, 32),
            template: SyntheticSpec::new(Shape::Rectangle { top: 10, left: 10, height: 8, width: 8 }),
            jitter: 3,
        };
        let events = make_suite(&suite).unwrap();
        assert_eq!(events.len(), 6);
        assert_eq!(events[5].event_id, "event_005");
        for e in &events {
            assert_eq!(e.gt.count(), 64);
        }
        let again = make_suite(&suite).unwrap();
        assert!(events.iter().zip(&again).all(|(a, b)| a.gt == b.gt && a.stack == b.stack));
    }
}
