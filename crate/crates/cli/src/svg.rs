//! Standalone SVG plots with inline styling.

use std::fmt::Write;

use fireline_uq_core::buffer::{MetricPeak, PeakStatus};
use fireline_uq_core::calibration::ReliabilityBin;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Maps data coordinates onto the plot area.
struct Frame {
    x0: f64,
    x1: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
        let y1 = if y1 > 0.0 { y1 } else { 1.0 };
        Self { x0, x1, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - y / self.y1 * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
    let _ = writeln!(out, r##"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"##, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (bx, by) = (LEFT, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r##"<path d="M{bx:.2} {TOP:.2} L{bx:.2} {by:.2} L{:.2} {by:.2}" fill="none" stroke="black" stroke-width="1"/>"##,
        WIDTH - RIGHT
    );
    for i in 0..=4 {
        let x = frame.x0 + (frame.x1 - frame.x0) * f64::from(i) / 4.0;
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, frame.px(x), by + 16.0, tick(x));
        let y = frame.y1 * f64::from(i) / 4.0;
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##, bx - 6.0, frame.py(y) + 4.0, tick(y));
    }
    let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, (LEFT + WIDTH - RIGHT) / 2.0, HEIGHT - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r##"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"##,
        (TOP + by) / 2.0,
        (TOP + by) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e5) {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Histogram of the per-event samples (as a density) with the KDE curve and its peak.
pub fn density_plot(peak: &MetricPeak) -> String {
    let mut out = String::new();
    let title = format!("{} distance: KDE over {} events", peak.metric.as_str(), peak.n_samples);
    open(&mut out, &title);

    let samples = &peak.samples;
    let (curve_lo, curve_hi, curve_top) = match &peak.curve {
        Some(c) if c.xs.len() > 1 => (c.xs[0], c.xs[c.xs.len() - 1], c.ys.iter().copied().fold(0.0, f64::max)),
        _ => {
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() {
                (lo - 1.0, hi + 1.0, 0.0)
            } else {
                (0.0, 1.0, 0.0)
            }
        }
    };

    let n_bins = ((samples.len() as f64).sqrt().ceil() as usize).clamp(1, 50);
    let bin_width = (curve_hi - curve_lo) / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in samples {
        let b = (((v - curve_lo) / bin_width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let densities: Vec<f64> = counts.iter().map(|&c| c as f64 / (samples.len().max(1) as f64 * bin_width)).collect();
    let hist_top = densities.iter().copied().fold(0.0, f64::max);
    let frame = Frame::new(curve_lo, curve_hi, curve_top.max(hist_top) * 1.05);

    axes(&mut out, &frame, "distance (m)", "density");
    let _ = writeln!(out, r##"<g fill="#f4a261" fill-opacity="0.6" stroke="#c4622d" stroke-width="0.5">"##);
    for (i, &d) in densities.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let x = frame.px(curve_lo + i as f64 * bin_width);
        let w = frame.px(curve_lo + (i + 1) as f64 * bin_width) - x;
        let y = frame.py(d);
        let _ = writeln!(out, r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}"/>"##, HEIGHT - BOTTOM - y);
    }
    out.push_str("</g>\n");

    if let Some(curve) = &peak.curve {
        let points: Vec<String> = if curve.xs.len() > 1 {
            curve.xs.iter().zip(&curve.ys).map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect()
        } else {
            // Point mass: a vertical spike at the single location.
            let x = frame.px(curve.xs[0]);
            vec![format!("{x:.2},{:.2}", frame.py(0.0)), format!("{x:.2},{:.2}", frame.py(frame.y1))]
        };
        let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#264653" stroke-width="2"/>"##, points.join(" "));
    }
    if let Some(p) = peak.peak_m {
        let x = frame.px(p);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e63946" stroke-width="1.5" stroke-dasharray="5 3"/>"##,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#e63946">peak {} m</text>"##, x + 4.0, TOP + 12.0, tick(p));
    }
    let note = match peak.status {
        PeakStatus::Ok => None,
        PeakStatus::DegenerateBandwidth => Some("zero-spread samples: point-mass density"),
        PeakStatus::Unavailable => Some("fewer than two usable events: no density"),
    };
    if let Some(note) = note {
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#555555">{note}</text>"##, WIDTH - RIGHT, TOP + 12.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Observed frequency per confidence bin against the diagonal.
pub fn reliability_plot(bins: &[ReliabilityBin]) -> String {
    let mut out = String::new();
    open(&mut out, "Reliability diagram");
    let frame = Frame::new(0.0, 1.0, 1.0);
    axes(&mut out, &frame, "predicted probability", "observed frequency");
    let _ = writeln!(out, r##"<g fill="#2a9d8f" fill-opacity="0.7" stroke="#1d6f65" stroke-width="0.5">"##);
    for b in bins.iter().filter(|b| b.count > 0) {
        let x = frame.px(b.lower);
        let w = frame.px(b.upper) - x;
        let y = frame.py(b.accuracy);
        let _ = writeln!(out, r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}"/>"##, HEIGHT - BOTTOM - y);
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555555" stroke-dasharray="4 3"/>"##,
        frame.px(0.0),
        frame.py(0.0),
        frame.px(1.0),
        frame.py(1.0)
    );
    out.push_str("</svg>\n");
    out
}
