use fireline_uq_core::buffer::{self, BufferConfig, BufferEvent, DistanceMetric, PeakStatus};
use fireline_uq_core::metrics::{self, MetricStatus};
use fireline_uq_core::raster::io::{self, Raster};
use fireline_uq_core::raster::{self, RasterFormat};
use fireline_uq_core::synthetic::{self, Shape, SuiteSpec, SyntheticSpec};
use fireline_uq_core::{uncertainty, BinaryMask, GridGeometry, PredictionStack};
use proptest::prelude::*;

fn geom(h: usize, w: usize) -> GridGeometry {
    GridGeometry::new(h, w, 375.0).unwrap()
}

fn shifted_square_suite(n: usize) -> Vec<BufferEvent> {
    let suite = SuiteSpec {
        n_events: n,
        geometry: geom(48, 48),
        template: SyntheticSpec {
            offset: (0, 3),
            n_members: 6,
            ..SyntheticSpec::new(Shape::Rectangle { top: 18, left: 18, height: 10, width: 10 })
        },
        jitter: 6,
    };
    synthetic::make_suite(&suite).unwrap()
}

#[test]
fn suite_survives_a_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let events = shifted_square_suite(4);
    let mut reloaded = Vec::new();
    for e in &events {
        let gt_path = dir.path().join(format!("{}_gt.f32bin", e.event_id));
        let stack_path = dir.path().join(format!("{}_stack.f32bin", e.event_id));
        io::save_mask(&gt_path, RasterFormat::F32Bin, &e.gt).unwrap();
        io::save_stack(&stack_path, &e.stack).unwrap();
        reloaded.push(BufferEvent {
            event_id: e.event_id.clone(),
            gt: io::load_mask(&gt_path, RasterFormat::F32Bin, None).unwrap(),
            stack: io::load_stack(&stack_path, RasterFormat::F32Bin, None).unwrap(),
        });
    }
    let config = BufferConfig::default();
    assert_eq!(buffer::buffer_report(&events, &config).unwrap(), buffer::buffer_report(&reloaded, &config).unwrap());
}

#[test]
fn report_keeps_input_order_and_counts() {
    let events = shifted_square_suite(9);
    let report = buffer::buffer_report(&events, &BufferConfig::default()).unwrap();
    let ids: Vec<_> = report.events.iter().map(|e| e.event_id.as_str()).collect();
    let want: Vec<_> = events.iter().map(|e| e.event_id.as_str()).collect();
    assert_eq!(ids, want);
    for m in &report.metrics {
        assert_eq!(m.n_samples + m.skipped.values().sum::<usize>(), 9);
    }
    let c = report.metric(DistanceMetric::Centroid);
    assert_eq!(c.status, PeakStatus::DegenerateBandwidth);
    assert_eq!(c.peak_m, Some(375.0));
}

#[test]
fn resolution_override_scales_every_distance() {
    let events = shifted_square_suite(3);
    let base = buffer::buffer_report(&events, &BufferConfig::default()).unwrap();
    let config = BufferConfig { resolution_m: Some(30.0), ..BufferConfig::default() };
    let scaled = buffer::buffer_report(&events, &config).unwrap();
    for (a, b) in base.events.iter().zip(&scaled.events) {
        let ratio = b.distances.hausdorff_m.unwrap() / a.distances.hausdorff_m.unwrap();
        assert!((ratio - 30.0 / 375.0).abs() < 1e-12);
        assert_eq!(b.distances.resolution_m, 30.0);
    }
}

#[test]
fn mixed_offsets_peak_at_the_majority_distance() {
    // Detached false-positive blocks: a gap of 0 columns gives 1 px, a gap of 3 gives 2 px.
    let g = geom(24, 40);
    let gt = BinaryMask::from_fn(g, |r, c| (8..16).contains(&r) && (4..12).contains(&c));
    let make = |id: &str, gap: usize| {
        let pred = gt.or(&BinaryMask::from_fn(g, |r, c| (8..16).contains(&r) && (12 + gap..18 + gap).contains(&c))).unwrap();
        BufferEvent {
            event_id: id.into(),
            gt: gt.clone(),
            stack: PredictionStack::new(vec![pred.to_probability()]).unwrap(),
        }
    };
    let events = vec![make("a", 0), make("b", 0), make("c", 0), make("d", 3)];
    let report = buffer::buffer_report(&events, &BufferConfig::default()).unwrap();
    let values: Vec<_> = report.events.iter().map(|e| e.distances.centroid_boundary_m.unwrap()).collect();
    assert_eq!(values, vec![375.0, 375.0, 375.0, 750.0]);
    let c = report.metric(DistanceMetric::Centroid);
    assert_eq!(c.status, PeakStatus::Ok);
    assert!((c.peak_m.unwrap() - 375.0).abs() <= c.grid_spacing_m.unwrap());
}

#[test]
fn pure_dilation_of_symmetric_shape_misses_the_boundary() {
    let g = geom(32, 32);
    let spec = SyntheticSpec { dilate_by: 1, ..SyntheticSpec::new(Shape::Disk { center: (16, 16), radius: 6 }) };
    let gt = synthetic::make_mask(&spec, &g).unwrap();
    let pred = raster::threshold(&synthetic::make_prediction_stack(&gt, &spec).unwrap().members()[0], 0.95).unwrap();
    let report = metrics::distance_report(&gt, &pred, &g).unwrap();
    assert_eq!(report.centroid_status, MetricStatus::NoIntersection);
    // An 8-connected one-pixel dilation moves the boundary by at most one diagonal step.
    let hd = report.hausdorff_m.unwrap();
    assert!((375.0..=375.0 * 2f64.sqrt() + 1e-9).contains(&hd), "{hd}");
}

#[test]
fn stacks_in_member_directories_match_kind_2_files() {
    let dir = tempfile::tempdir().unwrap();
    let stack = shifted_square_suite(1).remove(0).stack;
    let members = dir.path().join("members");
    std::fs::create_dir(&members).unwrap();
    for (i, m) in stack.members().iter().enumerate() {
        io::write_f32bin(&members.join(format!("{i:02}.f32bin")), &Raster::Probability(m.clone())).unwrap();
    }
    let single = dir.path().join("stack.f32bin");
    io::save_stack(&single, &stack).unwrap();
    let a = io::load_stack(&members, RasterFormat::F32Bin, None).unwrap();
    let b = io::load_stack(&single, RasterFormat::F32Bin, None).unwrap();
    assert_eq!(uncertainty::aggregate_stack(&a), uncertainty::aggregate_stack(&b));
}

fn arb_mask(h: usize, w: usize) -> impl Strategy<Value = BinaryMask> {
    prop::collection::vec(any::<bool>(), h * w).prop_map(move |cells| BinaryMask::new(geom(h, w), cells).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_statuses_are_consistent(gt in arb_mask(12, 12), pred in arb_mask(12, 12)) {
        let g = geom(12, 12);
        let r = metrics::distance_report(&gt, &pred, &g).unwrap();
        prop_assert_eq!(r.centroid_boundary_m.is_some(), r.centroid_status == MetricStatus::Ok);
        prop_assert_eq!(r.asd_m.is_some(), r.asd_status == MetricStatus::Ok);
        prop_assert_eq!(r.hausdorff_m.is_some(), r.hausdorff_status == MetricStatus::Ok);
        if let (Some(asd), Some(hd)) = (r.asd_m, r.hausdorff_m) {
            prop_assert!(asd <= hd);
        }
        if gt.is_empty() {
            prop_assert_eq!(r.centroid_status, MetricStatus::EmptyGt);
        }
    }

    #[test]
    fn higher_thresholds_never_add_false_positives(
        cells in prop::collection::vec(0.0f64..=1.0, 100),
        t1 in 0.0f64..=1.0,
        t2 in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let g = geom(10, 10);
        let p = fireline_uq_core::ProbabilityMap::new(g, cells).unwrap();
        let gt = BinaryMask::from_fn(g, |r, c| r < 5 && c < 5);
        let fp = |t| fireline_uq_core::morphology::false_positive_mask(&raster::threshold(&p, t).unwrap(), &gt).unwrap();
        let (a, b) = (fp(lo), fp(hi));
        prop_assert!(b.cells().iter().zip(a.cells()).all(|(&x, &y)| !x || y));
    }
}
