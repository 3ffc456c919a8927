//! Raster domain types shared by every other module.
//!
//! All rasters are row-major with the origin at the top-left corner. Coordinates
//! are `(row, col)` pairs; `row` grows downwards and `col` grows to the right.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod io;

pub use io::{Raster, RasterFormat, RasterKind};

/// Raster dimensions plus the ground size of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    height: usize,
    width: usize,
    resolution_m: f64,
}

impl GridGeometry {
    pub fn new(height: usize, width: usize, resolution_m: f64) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidGeometry(format!(
                "dimensions must be positive, got {height}x{width}"
            )));
        }
        if !(resolution_m.is_finite() && resolution_m > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "resolution must be positive and finite, got {resolution_m}"
            )));
        }
        Ok(Self { height, width, resolution_m })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Meters per pixel.
    pub fn resolution_m(&self) -> f64 {
        self.resolution_m
    }

    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn with_resolution(&self, resolution_m: f64) -> Result<Self> {
        Self::new(self.height, self.width, resolution_m)
    }

    /// Same dimensions and resolution.
    pub fn same_grid(&self, other: &GridGeometry) -> bool {
        self == other
    }

    /// Same dimensions, resolution ignored.
    pub fn same_shape(&self, other: &GridGeometry) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn ensure_same_grid(&self, other: &GridGeometry) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch { left: *self, right: *other })
        }
    }

    pub fn ensure_same_shape(&self, other: &GridGeometry) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::GeometryMismatch { left: *self, right: *other })
        }
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> Pixel {
        Pixel { row: index / self.width, col: index % self.width }
    }

    pub fn contains(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }
}

impl fmt::Display for GridGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} @ {} m", self.height, self.width, self.resolution_m)
    }
}

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Squared Euclidean distance in pixel units.
    pub fn distance_sq(&self, other: &Pixel) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }

    pub fn distance(&self, other: &Pixel) -> f64 {
        (self.distance_sq(other) as f64).sqrt()
    }
}

/// Fire / no-fire raster.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    geometry: GridGeometry,
    cells: Vec<bool>,
}

impl BinaryMask {
    pub fn new(geometry: GridGeometry, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::CellCount { expected: geometry.len(), actual: cells.len() });
        }
        Ok(Self { geometry, cells })
    }

    pub fn empty(geometry: GridGeometry) -> Self {
        Self { geometry, cells: vec![false; geometry.len()] }
    }

    pub fn full(geometry: GridGeometry) -> Self {
        Self { geometry, cells: vec![true; geometry.len()] }
    }

    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(geometry.len());
        for row in 0..geometry.height {
            for col in 0..geometry.width {
                cells.push(f(row, col));
            }
        }
        Self { geometry, cells }
    }

    /// Builds a mask with exactly the listed pixels set. Pixels outside the grid are rejected.
    pub fn from_pixels(geometry: GridGeometry, pixels: impl IntoIterator<Item = Pixel>) -> Result<Self> {
        let mut cells = vec![false; geometry.len()];
        for p in pixels {
            if p.row >= geometry.height || p.col >= geometry.width {
                return Err(Error::InvalidParameter(format!(
                    "pixel ({}, {}) outside {geometry}",
                    p.row, p.col
                )));
            }
            cells[geometry.index(p.row, p.col)] = true;
        }
        Ok(Self { geometry, cells })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[self.geometry.index(row, col)]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn is_full(&self) -> bool {
        self.cells.iter().all(|&c| c)
    }

    /// True pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        let g = self.geometry;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| g.pixel(i))
    }

    /// Same cells on a grid with a different pixel resolution.
    pub fn with_resolution(&self, resolution_m: f64) -> Result<Self> {
        Ok(Self { geometry: self.geometry.with_resolution(resolution_m)?, cells: self.cells.clone() })
    }

    pub fn not(&self) -> Self {
        Self { geometry: self.geometry, cells: self.cells.iter().map(|c| !c).collect() }
    }

    pub fn and(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && !b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.geometry.ensure_same_grid(&other.geometry)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { geometry: self.geometry, cells })
    }

    /// Mask moved by `(drow, dcol)`; pixels shifted off the grid are dropped.
    pub fn shifted(&self, drow: i64, dcol: i64) -> Self {
        let g = self.geometry;
        let mut out = vec![false; g.len()];
        for p in self.pixels() {
            let r = p.row as i64 + drow;
            let c = p.col as i64 + dcol;
            if g.contains(r, c) {
                out[g.index(r as usize, c as usize)] = true;
            }
        }
        Self { geometry: g, cells: out }
    }

    /// Rotates the mask 90° clockwise. Height and width swap.
    pub fn rotated_cw(&self) -> Self {
        let g = self.geometry;
        let rotated = GridGeometry { height: g.width, width: g.height, resolution_m: g.resolution_m };
        Self::from_fn(rotated, |r, c| self.get(g.height - 1 - c, r))
    }

    /// Probability map holding 1.0 on true cells and 0.0 elsewhere.
    pub fn to_probability(&self) -> ProbabilityMap {
        ProbabilityMap {
            geometry: self.geometry,
            cells: self.cells.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Raster of burn probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    geometry: GridGeometry,
    cells: Vec<f64>,
}

impl ProbabilityMap {
    pub fn new(geometry: GridGeometry, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::CellCount { expected: geometry.len(), actual: cells.len() });
        }
        if let Some((index, &value)) =
            cells.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
        Ok(Self { geometry, cells })
    }

    pub fn filled(geometry: GridGeometry, value: f64) -> Result<Self> {
        Self::new(geometry, vec![value; geometry.len()])
    }

    pub fn from_fn(geometry: GridGeometry, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut cells = Vec::with_capacity(geometry.len());
        for row in 0..geometry.height {
            for col in 0..geometry.width {
                cells.push(f(row, col));
            }
        }
        Self::new(geometry, cells)
    }

    /// Skips validation; callers guarantee every value lies in `[0, 1]`.
    pub(crate) fn from_valid(geometry: GridGeometry, cells: Vec<f64>) -> Self {
        debug_assert!(cells.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { geometry, cells }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[self.geometry.index(row, col)]
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    pub fn with_resolution(&self, resolution_m: f64) -> Result<Self> {
        Ok(Self { geometry: self.geometry.with_resolution(resolution_m)?, cells: self.cells.clone() })
    }
}

/// Binarizes a probability map: a cell is burned iff its probability is `>= t`.
pub fn threshold(p: &ProbabilityMap, t: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidThreshold(t));
    }
    Ok(BinaryMask {
        geometry: p.geometry,
        cells: p.cells.iter().map(|&v| v >= t).collect(),
    })
}

/// Ordered collection of probability maps from stochastic passes or ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionStack {
    geometry: GridGeometry,
    members: Vec<ProbabilityMap>,
}

impl PredictionStack {
    pub fn new(members: Vec<ProbabilityMap>) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptyStack)?;
        let geometry = first.geometry;
        for m in &members[1..] {
            geometry.ensure_same_grid(&m.geometry)?;
        }
        Ok(Self { geometry, members })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn members(&self) -> &[ProbabilityMap] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn into_members(self) -> Vec<ProbabilityMap> {
        self.members
    }

    pub fn with_resolution(&self, resolution_m: f64) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|m| m.with_resolution(resolution_m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }
}
