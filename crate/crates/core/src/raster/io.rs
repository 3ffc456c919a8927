//! Raster file formats.
//!
//! `f32bin` layout (all integers and floats little-endian):
//!
//! ```text
//! "FUQ1" | u32 height | u32 width | f64 resolution_m | u8 kind
//! kind 0 (probability), 1 (mask): height*width f32 cells, row-major
//! kind 2 (stack):                 u32 member_count, then member_count blocks of height*width f32
//! ```
//!
//! Cells are stored as `f32`, so saving an `f64` probability rounds it to the nearest `f32`.
//! Loading then saving is bit-exact.
//!
//! `csv` is one line per raster row with comma-separated decimals; `pgm` is plain
//! (`P2`) PGM with maxval 255. Neither carries a resolution, which is supplied by the caller.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{BinaryMask, GridGeometry, PredictionStack, ProbabilityMap};
use crate::error::{Error, Result};
use crate::DEFAULT_RESOLUTION_M;

pub const MAGIC: &[u8; 4] = b"FUQ1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 1;
const PGM_MAXVAL: u32 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    F32Bin,
    Csv,
    Pgm,
}

impl RasterFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "f32bin" | "bin" => Some(Self::F32Bin),
            "csv" => Some(Self::Csv),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::F32Bin => "f32bin",
            Self::Csv => "csv",
            Self::Pgm => "pgm",
        }
    }
}

impl FromStr for RasterFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f32bin" => Ok(Self::F32Bin),
            "csv" => Ok(Self::Csv),
            "pgm" => Ok(Self::Pgm),
            other => Err(Error::InvalidParameter(format!("unknown raster format '{other}'"))),
        }
    }
}

impl fmt::Display for RasterFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// The `kind` byte of an f32bin header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum RasterKind {
    Probability = 0,
    Mask = 1,
    Stack = 2,
}

impl RasterKind {
    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Self::Probability),
            1 => Ok(Self::Mask),
            2 => Ok(Self::Stack),
            other => Err(Error::MalformedHeader(format!("unknown kind byte {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Raster {
    Probability(ProbabilityMap),
    Mask(BinaryMask),
    Stack(PredictionStack),
}

impl Raster {
    pub fn kind(&self) -> RasterKind {
        match self {
            Raster::Probability(_) => RasterKind::Probability,
            Raster::Mask(_) => RasterKind::Mask,
            Raster::Stack(_) => RasterKind::Stack,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        match self {
            Raster::Probability(p) => p.geometry(),
            Raster::Mask(m) => m.geometry(),
            Raster::Stack(s) => s.geometry(),
        }
    }
}

// ---------------------------------------------------------------------------
// f32bin
// ---------------------------------------------------------------------------

pub fn encode_f32bin(raster: &Raster) -> Vec<u8> {
    let g = raster.geometry();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.height() as u32).to_le_bytes());
    out.extend_from_slice(&(g.width() as u32).to_le_bytes());
    out.extend_from_slice(&g.resolution_m().to_le_bytes());
    out.push(raster.kind() as u8);
    let mut push_probs = |cells: &[f64]| {
        for &v in cells {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    };
    match raster {
        Raster::Probability(p) => push_probs(p.cells()),
        Raster::Mask(m) => {
            for &c in m.cells() {
                out.extend_from_slice(&(if c { 1.0f32 } else { 0.0f32 }).to_le_bytes());
            }
        }
        Raster::Stack(s) => {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            for m in s.members() {
                for &v in m.cells() {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::MalformedHeader(format!("truncated input while reading {what}"))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn cells(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(overflow)?, what)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn overflow() -> Error {
    Error::MalformedHeader("dimensions overflow".into())
}

pub fn decode_f32bin(bytes: &[u8]) -> Result<Raster> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::MalformedHeader("bad magic bytes, expected FUQ1".into()));
    }
    let height = r.u32("height")? as usize;
    let width = r.u32("width")? as usize;
    let resolution_m = f64::from_le_bytes(r.take(8, "resolution")?.try_into().unwrap());
    let kind = RasterKind::from_byte(r.take(1, "kind")?[0])?;
    let geometry = GridGeometry::new(height, width, resolution_m)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let n = height.checked_mul(width).ok_or_else(overflow)?;

    let raster = match kind {
        RasterKind::Probability => {
            Raster::Probability(probability_from_f32(geometry, &r.cells(n, "cells")?)?)
        }
        RasterKind::Mask => Raster::Mask(mask_from_values(
            geometry,
            r.cells(n, "cells")?.into_iter().map(f64::from),
        )?),
        RasterKind::Stack => {
            let count = r.u32("member count")? as usize;
            if count == 0 {
                return Err(Error::MalformedHeader("stack member count is zero".into()));
            }
            let mut members = Vec::with_capacity(count);
            for _ in 0..count {
                members.push(probability_from_f32(geometry, &r.cells(n, "stack member")?)?);
            }
            Raster::Stack(PredictionStack::new(members)?)
        }
    };
    if r.pos != bytes.len() {
        return Err(Error::MalformedHeader(format!(
            "{} trailing bytes after raster data",
            bytes.len() - r.pos
        )));
    }
    Ok(raster)
}

fn probability_from_f32(geometry: GridGeometry, cells: &[f32]) -> Result<ProbabilityMap> {
    ProbabilityMap::new(geometry, cells.iter().map(|&v| f64::from(v)).collect())
}

fn mask_from_values(geometry: GridGeometry, values: impl Iterator<Item = f64>) -> Result<BinaryMask> {
    let cells = values
        .enumerate()
        .map(|(index, v)| {
            if v == 0.0 {
                Ok(false)
            } else if v == 1.0 {
                Ok(true)
            } else {
                Err(Error::InvalidMaskValue { index, value: v })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BinaryMask::new(geometry, cells)
}

pub fn read_f32bin(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_f32bin(&bytes)
}

pub fn write_f32bin(path: &Path, raster: &Raster) -> Result<()> {
    fs::write(path, encode_f32bin(raster)).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// csv / pgm
// ---------------------------------------------------------------------------

/// Parses csv text into (height, width, values).
fn parse_csv(text: &str, path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::MalformedData {
                    path: path.to_path_buf(),
                    reason: format!("line {}: cannot parse '{}'", lineno + 1, tok.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::MalformedData {
                    path: path.to_path_buf(),
                    reason: format!("line {}: expected {w} columns, got {}", lineno + 1, row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        height += 1;
    }
    let width = width.ok_or_else(|| Error::MalformedData {
        path: path.to_path_buf(),
        reason: "no rows".into(),
    })?;
    Ok((height, width, values))
}

/// Parses a plain PGM into (height, width, raw values).
fn parse_pgm(text: &str, path: &Path) -> Result<(usize, usize, Vec<u32>)> {
    let malformed = |reason: String| Error::MalformedData { path: path.to_path_buf(), reason };
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    if tokens.next() != Some("P2") {
        return Err(Error::MalformedHeader(format!("{}: expected plain PGM (P2)", path.display())));
    }
    let mut header = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{}: bad or missing {what}", path.display())))
    };
    let width = header("width")?;
    let height = header("height")?;
    let maxval = header("maxval")?;
    if maxval != PGM_MAXVAL as usize {
        return Err(Error::MalformedHeader(format!(
            "{}: maxval must be {PGM_MAXVAL}, got {maxval}",
            path.display()
        )));
    }
    let values = tokens
        .map(|t| {
            t.parse::<u32>()
                .ok()
                .filter(|&v| v <= PGM_MAXVAL)
                .ok_or_else(|| malformed(format!("bad pixel value '{t}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != width * height {
        return Err(malformed(format!("expected {} pixels, got {}", width * height, values.len())));
    }
    Ok((height, width, values))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a probability raster. `resolution_m` overrides the f32bin header and
/// supplies the resolution for csv/pgm (default 375 m).
pub fn load_probability(path: &Path, format: RasterFormat, resolution_m: Option<f64>) -> Result<ProbabilityMap> {
    let res = resolution_m.unwrap_or(DEFAULT_RESOLUTION_M);
    let map = match format {
        RasterFormat::F32Bin => match read_f32bin(path)? {
            Raster::Probability(p) => p,
            Raster::Mask(m) => m.to_probability(),
            Raster::Stack(_) => {
                return Err(Error::MalformedHeader(format!(
                    "{}: expected a single raster, found a stack",
                    path.display()
                )))
            }
        },
        RasterFormat::Csv => {
            let (h, w, values) = parse_csv(&read_text(path)?, path)?;
            ProbabilityMap::new(GridGeometry::new(h, w, res)?, values)?
        }
        RasterFormat::Pgm => {
            let (h, w, values) = parse_pgm(&read_text(path)?, path)?;
            let cells = values.into_iter().map(|v| f64::from(v) / f64::from(PGM_MAXVAL)).collect();
            ProbabilityMap::new(GridGeometry::new(h, w, res)?, cells)?
        }
    };
    match resolution_m {
        Some(s) if format == RasterFormat::F32Bin => map.with_resolution(s),
        _ => Ok(map),
    }
}

/// Loads a binary mask. Values must be exactly 0/1 (csv, f32bin) or 0/255 (pgm).
pub fn load_mask(path: &Path, format: RasterFormat, resolution_m: Option<f64>) -> Result<BinaryMask> {
    let res = resolution_m.unwrap_or(DEFAULT_RESOLUTION_M);
    let mask = match format {
        RasterFormat::F32Bin => match read_f32bin(path)? {
            Raster::Mask(m) => m,
            Raster::Probability(p) => mask_from_values(*p.geometry(), p.cells().iter().copied())?,
            Raster::Stack(_) => {
                return Err(Error::MalformedHeader(format!(
                    "{}: expected a mask, found a stack",
                    path.display()
                )))
            }
        },
        RasterFormat::Csv => {
            let (h, w, values) = parse_csv(&read_text(path)?, path)?;
            mask_from_values(GridGeometry::new(h, w, res)?, values.into_iter())?
        }
        RasterFormat::Pgm => {
            let (h, w, values) = parse_pgm(&read_text(path)?, path)?;
            let values = values.into_iter().map(|v| match v {
                0 => 0.0,
                PGM_MAXVAL => 1.0,
                other => f64::from(other),
            });
            mask_from_values(GridGeometry::new(h, w, res)?, values)?
        }
    };
    match resolution_m {
        Some(s) if format == RasterFormat::F32Bin => mask.with_resolution(s),
        _ => Ok(mask),
    }
}

/// Loads a prediction stack from a directory of single-raster files (sorted by
/// file name), a kind-2 f32bin file, or a single raster treated as a one-member stack.
pub fn load_stack(path: &Path, format: RasterFormat, resolution_m: Option<f64>) -> Result<PredictionStack> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && RasterFormat::from_path(p) == Some(format))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::MalformedData {
                path: path.to_path_buf(),
                reason: format!("directory contains no .{} members", format.extension()),
            });
        }
        let members = files
            .iter()
            .map(|f| load_probability(f, format, resolution_m))
            .collect::<Result<Vec<_>>>()?;
        return PredictionStack::new(members);
    }
    if format == RasterFormat::F32Bin {
        let stack = match read_f32bin(path)? {
            Raster::Stack(s) => s,
            Raster::Probability(p) => PredictionStack::new(vec![p])?,
            Raster::Mask(m) => PredictionStack::new(vec![m.to_probability()])?,
        };
        return match resolution_m {
            Some(s) => stack.with_resolution(s),
            None => Ok(stack),
        };
    }
    PredictionStack::new(vec![load_probability(path, format, resolution_m)?])
}

fn csv_text(values: impl Iterator<Item = String>, width: usize) -> String {
    let mut out = String::new();
    for (i, v) in values.enumerate() {
        if i % width != 0 {
            out.push(',');
        }
        out.push_str(&v);
        if i % width == width - 1 {
            out.push('\n');
        }
    }
    out
}

fn pgm_text(values: impl Iterator<Item = u32>, g: &GridGeometry) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", g.width(), g.height(), PGM_MAXVAL);
    let width = g.width();
    for (i, v) in values.enumerate() {
        if i % width != 0 {
            out.push(' ');
        }
        out.push_str(&v.to_string());
        if i % width == width - 1 {
            out.push('\n');
        }
    }
    out
}

pub fn save_probability(path: &Path, format: RasterFormat, map: &ProbabilityMap) -> Result<()> {
    let g = map.geometry();
    match format {
        RasterFormat::F32Bin => write_f32bin(path, &Raster::Probability(map.clone())),
        RasterFormat::Csv => {
            let text = csv_text(map.cells().iter().map(|v| v.to_string()), g.width());
            fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        RasterFormat::Pgm => {
            let values = map.cells().iter().map(|v| (v * f64::from(PGM_MAXVAL)).round() as u32);
            fs::write(path, pgm_text(values, g)).map_err(|e| Error::io(path, e))
        }
    }
}

pub fn save_mask(path: &Path, format: RasterFormat, mask: &BinaryMask) -> Result<()> {
    let g = mask.geometry();
    match format {
        RasterFormat::F32Bin => write_f32bin(path, &Raster::Mask(mask.clone())),
        RasterFormat::Csv => {
            let text = csv_text(mask.cells().iter().map(|&c| u8::from(c).to_string()), g.width());
            fs::write(path, text).map_err(|e| Error::io(path, e))
        }
        RasterFormat::Pgm => {
            let values = mask.cells().iter().map(|&c| if c { PGM_MAXVAL } else { 0 });
            fs::write(path, pgm_text(values, g)).map_err(|e| Error::io(path, e))
        }
    }
}

pub fn save_stack(path: &Path, stack: &PredictionStack) -> Result<()> {
    write_f32bin(path, &Raster::Stack(stack.clone()))
}
