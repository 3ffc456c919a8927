//! Geometric primitives behind the distance metrics.
//!
//! Boundaries are *exterior*: `boundary(M) = dilate(M) & !M` with a full 3x3
//! (8-connected) structuring element. Dilation is clipped at the raster edge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, GridGeometry, Pixel};

const NEIGHBOURS_8: [(i64, i64); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// Sub-pixel position, `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub row: f64,
    pub col: f64,
}

impl PixelPoint {
    pub fn new(row: f64, col: f64) -> Self {
        Self { row, col }
    }

    /// Nearest integer pixel (halves round away from zero). Negative coordinates clamp to 0.
    pub fn nearest_pixel(&self) -> Pixel {
        Pixel { row: self.row.round().max(0.0) as usize, col: self.col.round().max(0.0) as usize }
    }
}

impl From<Pixel> for PixelPoint {
    fn from(p: Pixel) -> Self {
        Self { row: p.row as f64, col: p.col as f64 }
    }
}

/// 3x3 binary dilation.
pub fn dilate(m: &BinaryMask) -> BinaryMask {
    let g = *m.geometry();
    let mut out = m.cells().to_vec();
    for p in m.pixels() {
        for (dr, dc) in NEIGHBOURS_8 {
            let (r, c) = (p.row as i64 + dr, p.col as i64 + dc);
            if g.contains(r, c) {
                out[g.index(r as usize, c as usize)] = true;
            }
        }
    }
    BinaryMask::new(g, out).expect("same geometry")
}

/// 3x3 binary erosion. Neighbours outside the raster are ignored.
pub fn erode(m: &BinaryMask) -> BinaryMask {
    let g = *m.geometry();
    BinaryMask::from_fn(g, |row, col| {
        m.get(row, col)
            && NEIGHBOURS_8.iter().all(|&(dr, dc)| {
                let (r, c) = (row as i64 + dr, col as i64 + dc);
                !g.contains(r, c) || m.get(r as usize, c as usize)
            })
    })
}

/// Exterior boundary `dilate(m) & !m`.
pub fn boundary(m: &BinaryMask) -> BinaryMask {
    dilate(m).and_not(m).expect("same geometry")
}

/// Interior boundary `m & !erode(m)`: true pixels touching a false pixel.
pub fn inner_boundary(m: &BinaryMask) -> BinaryMask {
    m.and_not(&erode(m)).expect("same geometry")
}

/// Mean `(row, col)` of the true pixels.
pub fn centroid(m: &BinaryMask) -> Result<PixelPoint> {
    let (mut n, mut sr, mut sc) = (0u64, 0u64, 0u64);
    for p in m.pixels() {
        n += 1;
        sr += p.row as u64;
        sc += p.col as u64;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(PixelPoint { row: sr as f64 / n as f64, col: sc as f64 / n as f64 })
}

/// Pixels predicted as fire that are not fire in the ground truth.
pub fn false_positive_mask(pred: &BinaryMask, gt: &BinaryMask) -> Result<BinaryMask> {
    pred.and_not(gt)
}

/// Exact Euclidean distance (in pixels) from every cell to the nearest source pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    geometry: GridGeometry,
    squared: Vec<u64>,
    cells: Vec<f64>,
}

impl DistanceField {
    fn from_squared(geometry: GridGeometry, squared: Vec<u64>) -> Self {
        let cells = squared.iter().map(|&d| (d as f64).sqrt()).collect();
        Self { geometry, squared, cells }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Squared distances; exact integers.
    pub fn squared(&self) -> &[u64] {
        &self.squared
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[self.geometry.index(row, col)]
    }

    pub fn get_squared(&self, row: usize, col: usize) -> u64 {
        self.squared[self.geometry.index(row, col)]
    }
}

/// Exact Euclidean distance transform in O(N) (Meijster, Roerdink & Hesselink).
///
/// All arithmetic is on integers, so every cell equals `sqrt(dr² + dc²)` for the
/// nearest source pixel with no rounding beyond the final square root.
pub fn distance_transform(source: &BinaryMask) -> Result<DistanceField> {
    if source.is_empty() {
        return Err(Error::EmptySource);
    }
    let g = *source.geometry();
    let (h, w) = (g.height(), g.width());
    // Larger than any in-grid distance.
    let inf = (h + w) as i64;

    // Phase 1: vertical distance to the nearest source pixel in the same column.
    let mut col_dist = vec![inf; h * w];
    for c in 0..w {
        if source.get(0, c) {
            col_dist[c] = 0;
        }
        for r in 1..h {
            col_dist[r * w + c] =
                if source.get(r, c) { 0 } else { (col_dist[(r - 1) * w + c] + 1).min(inf) };
        }
        for r in (0..h.saturating_sub(1)).rev() {
            let below = col_dist[(r + 1) * w + c];
            if below < col_dist[r * w + c] {
                col_dist[r * w + c] = below + 1;
            }
        }
    }

    // Phase 2: lower envelope of parabolas along each row.
    let mut squared = vec![0u64; h * w];
    squared.par_chunks_mut(w).enumerate().for_each(|(r, out)| {
        let gcol = &col_dist[r * w..(r + 1) * w];
        let f = |x: i64, i: i64| (x - i) * (x - i) + gcol[i as usize] * gcol[i as usize];
        let sep = |i: i64, u: i64| {
            (u * u - i * i + gcol[u as usize] * gcol[u as usize] - gcol[i as usize] * gcol[i as usize])
                .div_euclid(2 * (u - i))
        };
        let mut s = vec![0i64; w];
        let mut t = vec![0i64; w];
        let mut q: usize = 0;
        for u in 1..w as i64 {
            while f(t[q], s[q]) > f(t[q], u) {
                if q == 0 {
                    break;
                }
                q -= 1;
            }
            if q == 0 && f(t[0], s[0]) > f(t[0], u) {
                s[0] = u;
                continue;
            }
            let wsep = 1 + sep(s[q], u);
            if wsep < w as i64 {
                q += 1;
                s[q] = u;
                t[q] = wsep;
            }
        }
        for u in (0..w as i64).rev() {
            out[u as usize] = f(u, s[q]) as u64;
            if q > 0 && u == t[q] {
                q -= 1;
            }
        }
    });
    Ok(DistanceField::from_squared(g, squared))
}

/// All-pairs nearest-source scan. O(N * |source|); kept as a verification oracle.
pub fn distance_transform_bruteforce(source: &BinaryMask) -> Result<DistanceField> {
    let sources: Vec<Pixel> = source.pixels().collect();
    if sources.is_empty() {
        return Err(Error::EmptySource);
    }
    let g = *source.geometry();
    let squared = (0..g.len())
        .map(|i| {
            let p = g.pixel(i);
            sources.iter().map(|s| p.distance_sq(s)).min().unwrap()
        })
        .collect();
    Ok(DistanceField::from_squared(g, squared))
}

/// Bresenham segment between integer pixels, both endpoints included.
///
/// The segment is always rasterized from the lexicographically smaller endpoint,
/// so `bresenham(a, b)` and `bresenham(b, a)` cover the same pixel set.
pub fn bresenham(a: Pixel, b: Pixel) -> Vec<Pixel> {
    if b < a {
        let mut line = bresenham(b, a);
        line.reverse();
        return line;
    }
    let (mut r, mut c) = (a.row as i64, a.col as i64);
    let (r1, c1) = (b.row as i64, b.col as i64);
    let dx = (c1 - c).abs();
    let dy = -(r1 - r).abs();
    let sx = if c < c1 { 1 } else { -1 };
    let sy = if r < r1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity(dx.max(-dy) as usize + 1);
    loop {
        out.push(Pixel { row: r as usize, col: c as usize });
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            c += sx;
        }
        if e2 <= dx {
            err += dx;
            r += sy;
        }
    }
    out
}

/// Discrete segment from `round(a)` to `round(b)`, ordered from `a` to `b`.
pub fn trace_line(a: PixelPoint, b: PixelPoint) -> Vec<Pixel> {
    bresenham(a.nearest_pixel(), b.nearest_pixel())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geom(h: usize, w: usize) -> GridGeometry {
        GridGeometry::new(h, w, 1.0).unwrap()
    }

    fn px(row: usize, col: usize) -> Pixel {
        Pixel::new(row, col)
    }

    fn arb_mask(max: usize) -> impl Strategy<Value = BinaryMask> {
        (1..=max, 1..=max).prop_flat_map(|(h, w)| {
            prop::collection::vec(prop::bool::weighted(0.3), h * w)
                .prop_map(move |cells| BinaryMask::new(geom(h, w), cells).unwrap())
        })
    }

    #[test]
    fn boundary_of_single_pixel_is_its_ring() {
        let m = BinaryMask::from_pixels(geom(5, 5), [px(2, 2)]).unwrap();
        let b = boundary(&m);
        assert_eq!(b.count(), 8);
        for r in 1..=3 {
            for c in 1..=3 {
                assert_eq!(b.get(r, c), (r, c) != (2, 2));
            }
        }
    }

    #[test]
    fn boundary_of_empty_and_full() {
        assert!(boundary(&BinaryMask::empty(geom(4, 4))).is_empty());
        assert!(boundary(&BinaryMask::full(geom(4, 4))).is_empty());
    }

    #[test]
    fn boundary_of_square_is_outer_ring() {
        let g = geom(7, 7);
        let m = BinaryMask::from_fn(g, |r, c| (2..=4).contains(&r) && (2..=4).contains(&c));
        let expected = BinaryMask::from_fn(g, |r, c| {
            (1..=5).contains(&r) && (1..=5).contains(&c) && !((2..=4).contains(&r) && (2..=4).contains(&c))
        });
        assert_eq!(expected.count(), 16);
        assert_eq!(boundary(&m), expected);
    }

    #[test]
    fn boundary_is_clipped_at_edges() {
        let m = BinaryMask::from_pixels(geom(3, 3), [px(0, 0)]).unwrap();
        let b = boundary(&m);
        assert_eq!(b.pixels().collect::<Vec<_>>(), vec![px(0, 1), px(1, 0), px(1, 1)]);
    }

    #[test]
    fn inner_boundary_of_square() {
        let g = geom(7, 7);
        let m = BinaryMask::from_fn(g, |r, c| (1..=5).contains(&r) && (1..=5).contains(&c));
        assert_eq!(inner_boundary(&m).count(), 16);
        assert!(!inner_boundary(&m).get(3, 3));
    }

    #[test]
    fn centroid_examples() {
        let g = geom(8, 8);
        let c = centroid(&BinaryMask::from_pixels(g, [px(3, 4)]).unwrap()).unwrap();
        assert_eq!(c, PixelPoint::new(3.0, 4.0));
        let c = centroid(&BinaryMask::from_pixels(g, [px(0, 0), px(0, 2)]).unwrap()).unwrap();
        assert_eq!(c, PixelPoint::new(0.0, 1.0));
        let square = BinaryMask::from_fn(g, |r, c| (1..=4).contains(&r) && (1..=4).contains(&c));
        assert_eq!(centroid(&square).unwrap(), PixelPoint::new(2.5, 2.5));
        assert!(matches!(centroid(&BinaryMask::empty(g)), Err(Error::EmptyMask)));
    }

    #[test]
    fn false_positive_examples() {
        let g = geom(2, 2);
        let pred = BinaryMask::new(g, vec![true, true, false, false]).unwrap();
        let gt = BinaryMask::new(g, vec![true, false, true, false]).unwrap();
        assert_eq!(false_positive_mask(&pred, &gt).unwrap().cells(), &[false, true, false, false]);
        assert!(false_positive_mask(&gt, &gt).unwrap().is_empty());
        assert!(false_positive_mask(&BinaryMask::full(g), &BinaryMask::empty(g)).unwrap().is_full());
        let other = BinaryMask::empty(geom(2, 3));
        assert!(matches!(false_positive_mask(&pred, &other), Err(Error::GeometryMismatch { .. })));
    }

    #[test]
    fn distance_transform_examples() {
        let full = distance_transform(&BinaryMask::full(geom(3, 4))).unwrap();
        assert!(full.cells().iter().all(|&d| d == 0.0));

        let dt = distance_transform(&BinaryMask::from_pixels(geom(5, 6), [px(0, 0)]).unwrap()).unwrap();
        assert_eq!(dt.get(3, 4), 5.0);
        assert_eq!(dt.get_squared(4, 5), 41);

        assert!(matches!(distance_transform(&BinaryMask::empty(geom(2, 2))), Err(Error::EmptySource)));
        assert!(matches!(
            distance_transform_bruteforce(&BinaryMask::empty(geom(2, 2))),
            Err(Error::EmptySource)
        ));
    }

    #[test]
    fn distance_transform_thin_rasters() {
        let row = BinaryMask::from_pixels(geom(1, 7), [px(0, 2)]).unwrap();
        let dt = distance_transform(&row).unwrap();
        assert_eq!(dt.cells(), &[2.0, 1.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        let col = BinaryMask::from_pixels(geom(5, 1), [px(4, 0)]).unwrap();
        assert_eq!(distance_transform(&col).unwrap().cells(), &[4.0, 3.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn trace_line_examples() {
        let line = trace_line(PixelPoint::new(0.0, 0.0), PixelPoint::new(0.0, 3.0));
        assert_eq!(line, vec![px(0, 0), px(0, 1), px(0, 2), px(0, 3)]);

        let line = trace_line(PixelPoint::new(2.2, 2.4), PixelPoint::new(1.8, 1.6));
        assert_eq!(line, vec![px(2, 2)]);

        let line = trace_line(PixelPoint::new(0.0, 0.0), PixelPoint::new(2.0, 5.0));
        assert_eq!(line, vec![px(0, 0), px(0, 1), px(1, 2), px(1, 3), px(2, 4), px(2, 5)]);
    }

    #[test]
    fn trace_line_rounds_centroids() {
        let line = trace_line(PixelPoint::new(4.5, 4.5), PixelPoint::new(4.5, 7.4));
        assert_eq!(line.first(), Some(&px(5, 5)));
        assert_eq!(line.last(), Some(&px(5, 7)));
    }

    /// Classic floating-point DDA: one pixel per step along the major axis.
    fn reference_line(a: Pixel, b: Pixel) -> Vec<Pixel> {
        let (r0, c0, r1, c1) = (a.row as f64, a.col as f64, b.row as f64, b.col as f64);
        let steps = (r1 - r0).abs().max((c1 - c0).abs()) as usize;
        if steps == 0 {
            return vec![a];
        }
        (0..=steps)
            .map(|k| {
                let t = k as f64 / steps as f64;
                Pixel::new((r0 + t * (r1 - r0)).round() as usize, (c0 + t * (c1 - c0)).round() as usize)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn boundary_is_exterior(m in arb_mask(12)) {
            prop_assert!(boundary(&m).and(&m).unwrap().is_empty());
        }

        #[test]
        fn boundary_commutes_with_rotation(m in arb_mask(12)) {
            prop_assert_eq!(boundary(&m.rotated_cw()), boundary(&m).rotated_cw());
        }

        #[test]
        fn distance_transform_matches_bruteforce(m in arb_mask(16)) {
            prop_assume!(!m.is_empty());
            prop_assert_eq!(distance_transform(&m).unwrap(), distance_transform_bruteforce(&m).unwrap());
        }

        #[test]
        fn trace_line_is_symmetric_and_connected(r0 in 0usize..30, c0 in 0usize..30, r1 in 0usize..30, c1 in 0usize..30) {
            let (a, b) = (px(r0, c0), px(r1, c1));
            let ab = bresenham(a, b);
            let mut ba = bresenham(b, a);
            prop_assert_eq!(ab.first(), Some(&a));
            prop_assert_eq!(ab.last(), Some(&b));
            prop_assert_eq!(ab.len(), r0.abs_diff(r1).max(c0.abs_diff(c1)) + 1);
            for w in ab.windows(2) {
                prop_assert!(w[0].row.abs_diff(w[1].row) <= 1 && w[0].col.abs_diff(w[1].col) <= 1);
                prop_assert!(w[0] != w[1]);
            }
            ba.reverse();
            prop_assert_eq!(&ab, &ba);
            // Each pixel lies within half a pixel of the ideal line along the minor axis.
            let reference = reference_line(a.min(b), a.max(b));
            let mut ours = bresenham(a.min(b), a.max(b));
            ours.sort();
            let mut theirs = reference;
            theirs.sort();
            for (p, q) in ours.iter().zip(&theirs) {
                prop_assert!(p.row.abs_diff(q.row) <= 1 && p.col.abs_diff(q.col) <= 1);
            }
        }

        #[test]
        fn centroid_is_translation_equivariant(
            pixels in prop::collection::vec((0usize..10, 0usize..10), 1..20),
            dr in 0usize..6,
            dc in 0usize..6,
        ) {
            let g = geom(16, 16);
            let m = BinaryMask::from_pixels(g, pixels.iter().map(|&(r, c)| px(r, c))).unwrap();
            let shifted = m.shifted(dr as i64, dc as i64);
            let a = centroid(&m).unwrap();
            let b = centroid(&shifted).unwrap();
            prop_assert!((b.row - a.row - dr as f64).abs() < 1e-9);
            prop_assert!((b.col - a.col - dc as f64).abs() < 1e-9);
        }
    }
}
