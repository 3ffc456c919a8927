//! Python bindings. Rasters cross the boundary as nested lists (rows of cells);
//! reports come back as plain dicts.

use std::path::{Path, PathBuf};

use fireline_uq_core::buffer::{self, BufferConfig, BufferEvent, DEFAULT_KDE_GRID};
use fireline_uq_core::calibration::{self, CalibrationReport, DEFAULT_ECE_BINS, DEFAULT_NLL_EPSILON};
use fireline_uq_core::raster::{self, io, RasterFormat};
use fireline_uq_core::{metrics, morphology, uncertainty, Error, DEFAULT_RESOLUTION_M, DEFAULT_THRESHOLD};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn geometry_of<T>(rows: &[Vec<T>], resolution_m: f64) -> PyResult<raster::GridGeometry> {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != width) {
        return Err(PyValueError::new_err(format!("row {i} has {} cells, expected {width}", rows[i].len())));
    }
    raster::GridGeometry::new(height, width, resolution_m).map_err(py_err)
}

fn rows_of<T: Copy>(cells: &[T], width: usize) -> Vec<Vec<T>> {
    cells.chunks(width).map(<[T]>::to_vec).collect()
}

fn parse_format(format: Option<&str>, path: &Path) -> PyResult<RasterFormat> {
    match format {
        Some(f) => f.parse().map_err(py_err),
        None => Ok(RasterFormat::from_path(path).unwrap_or(RasterFormat::F32Bin)),
    }
}

#[pyclass(name = "BinaryMask", module = "fireline_uq", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyBinaryMask {
    inner: raster::BinaryMask,
}

#[pymethods]
impl PyBinaryMask {
    #[new]
    #[pyo3(signature = (rows, resolution_m = DEFAULT_RESOLUTION_M))]
    fn new(rows: Vec<Vec<bool>>, resolution_m: f64) -> PyResult<Self> {
        let g = geometry_of(&rows, resolution_m)?;
        let inner = raster::BinaryMask::new(g, rows.concat()).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.geometry().height(), self.inner.geometry().width())
    }

    #[getter]
    fn resolution_m(&self) -> f64 {
        self.inner.geometry().resolution_m()
    }

    fn count(&self) -> usize {
        self.inner.count()
    }

    fn to_list(&self) -> Vec<Vec<bool>> {
        rows_of(self.inner.cells(), self.inner.geometry().width())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("BinaryMask({}, {} true)", self.inner.geometry(), self.inner.count())
    }
}

#[pyclass(name = "ProbabilityMap", module = "fireline_uq", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyProbabilityMap {
    inner: raster::ProbabilityMap,
}

#[pymethods]
impl PyProbabilityMap {
    #[new]
    #[pyo3(signature = (rows, resolution_m = DEFAULT_RESOLUTION_M))]
    fn new(rows: Vec<Vec<f64>>, resolution_m: f64) -> PyResult<Self> {
        let g = geometry_of(&rows, resolution_m)?;
        let inner = raster::ProbabilityMap::new(g, rows.concat()).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.geometry().height(), self.inner.geometry().width())
    }

    #[getter]
    fn resolution_m(&self) -> f64 {
        self.inner.geometry().resolution_m()
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.cells(), self.inner.geometry().width())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("ProbabilityMap({})", self.inner.geometry())
    }
}

#[pyclass(name = "PredictionStack", module = "fireline_uq", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyPredictionStack {
    inner: raster::PredictionStack,
}

#[pymethods]
impl PyPredictionStack {
    #[new]
    fn new(members: Vec<PyProbabilityMap>) -> PyResult<Self> {
        let inner = raster::PredictionStack::new(members.into_iter().map(|m| m.inner).collect()).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn members(&self) -> Vec<PyProbabilityMap> {
        self.inner.members().iter().map(|m| PyProbabilityMap { inner: m.clone() }).collect()
    }

    fn __repr__(&self) -> String {
        format!("PredictionStack({}, {} members)", self.inner.geometry(), self.inner.len())
    }
}

fn mask(inner: raster::BinaryMask) -> PyBinaryMask {
    PyBinaryMask { inner }
}

fn prob(inner: raster::ProbabilityMap) -> PyProbabilityMap {
    PyProbabilityMap { inner }
}

#[pyfunction]
#[pyo3(signature = (p, t = DEFAULT_THRESHOLD))]
fn threshold(p: &PyProbabilityMap, t: f64) -> PyResult<PyBinaryMask> {
    raster::threshold(&p.inner, t).map(mask).map_err(py_err)
}

#[pyfunction]
fn dilate(m: &PyBinaryMask) -> PyBinaryMask {
    mask(morphology::dilate(&m.inner))
}

#[pyfunction]
fn boundary(m: &PyBinaryMask) -> PyBinaryMask {
    mask(morphology::boundary(&m.inner))
}

#[pyfunction]
fn centroid(m: &PyBinaryMask) -> PyResult<(f64, f64)> {
    morphology::centroid(&m.inner).map(|c| (c.row, c.col)).map_err(py_err)
}

/// Exact Euclidean distance (in pixels) to the nearest true cell.
#[pyfunction]
fn distance_transform(py: Python<'_>, m: &PyBinaryMask) -> PyResult<Vec<Vec<f64>>> {
    let field = py.detach(|| morphology::distance_transform(&m.inner)).map_err(py_err)?;
    Ok(rows_of(field.cells(), m.inner.geometry().width()))
}

#[pyfunction]
fn line(a: (usize, usize), b: (usize, usize)) -> Vec<(usize, usize)> {
    morphology::bresenham(raster::Pixel::new(a.0, a.1), raster::Pixel::new(b.0, b.1))
        .into_iter()
        .map(|p| (p.row, p.col))
        .collect()
}

/// Centroid-axis boundary distance in meters; `None` when undefined.
#[pyfunction]
fn centroid_boundary_distance(gt: &PyBinaryMask, pred: &PyBinaryMask) -> PyResult<Option<f64>> {
    match metrics::centroid_boundary_distance(&gt.inner, &pred.inner, gt.inner.geometry()) {
        Ok(r) => Ok(Some(r.distance_m)),
        Err(Error::Degenerate(_)) => Ok(None),
        Err(e) => Err(py_err(e)),
    }
}

#[pyfunction]
fn average_surface_distance(a: &PyBinaryMask, b: &PyBinaryMask) -> PyResult<f64> {
    metrics::average_surface_distance(&a.inner, &b.inner, a.inner.geometry()).map_err(py_err)
}

/// `(symmetric, a_to_b, b_to_a)` Hausdorff distances in meters.
#[pyfunction]
fn hausdorff_distance(a: &PyBinaryMask, b: &PyBinaryMask) -> PyResult<(f64, f64, f64)> {
    metrics::hausdorff_distance(&a.inner, &b.inner, a.inner.geometry())
        .map(|h| (h.symmetric_m, h.a_to_b_m, h.b_to_a_m))
        .map_err(py_err)
}

#[pyfunction]
fn distance_report<'py>(py: Python<'py>, gt: &PyBinaryMask, pred: &PyBinaryMask) -> PyResult<Bound<'py, PyAny>> {
    let report = metrics::distance_report(&gt.inner, &pred.inner, gt.inner.geometry()).map_err(py_err)?;
    to_dict(py, &report)
}

/// `(mean, variance, std)` maps of a stack.
#[pyfunction]
fn aggregate_stack(py: Python<'_>, stack: &PyPredictionStack) -> (PyProbabilityMap, PyProbabilityMap, PyProbabilityMap) {
    let s = py.detach(|| uncertainty::aggregate_stack(&stack.inner));
    (prob(s.mean), prob(s.variance), prob(s.std))
}

#[pyfunction]
fn pool_ensembles(stacks: Vec<PyPredictionStack>) -> PyResult<PyPredictionStack> {
    let stacks: Vec<_> = stacks.into_iter().map(|s| s.inner).collect();
    uncertainty::pool_ensembles(&stacks).map(|inner| PyPredictionStack { inner }).map_err(py_err)
}

#[pyfunction]
fn brier(p: &PyProbabilityMap, y: &PyBinaryMask) -> PyResult<f64> {
    calibration::brier(&p.inner, &y.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (p, y, epsilon = DEFAULT_NLL_EPSILON))]
fn nll(p: &PyProbabilityMap, y: &PyBinaryMask, epsilon: f64) -> PyResult<f64> {
    calibration::nll(&p.inner, &y.inner, epsilon).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (p, y, n_bins = DEFAULT_ECE_BINS))]
fn ece(p: &PyProbabilityMap, y: &PyBinaryMask, n_bins: usize) -> PyResult<f64> {
    calibration::ece(&p.inner, &y.inner, n_bins).map_err(py_err)
}

#[pyfunction]
fn average_precision(p: &PyProbabilityMap, y: &PyBinaryMask) -> PyResult<f64> {
    calibration::average_precision(&p.inner, &y.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (p, y, n_bins = DEFAULT_ECE_BINS, epsilon = DEFAULT_NLL_EPSILON))]
fn calibration_report<'py>(
    py: Python<'py>,
    p: &PyProbabilityMap,
    y: &PyBinaryMask,
    n_bins: usize,
    epsilon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = CalibrationReport::pooled(&[(&p.inner, &y.inner)], n_bins, epsilon).map_err(py_err)?;
    to_dict(py, &report)
}

/// `(xs, ys, bandwidth)` of a Gaussian KDE over `values`.
#[pyfunction]
#[pyo3(signature = (values, bandwidth = None, grid_points = DEFAULT_KDE_GRID))]
fn kde(values: Vec<f64>, bandwidth: Option<f64>, grid_points: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let curve = buffer::kde(&values, bandwidth, grid_points).map_err(py_err)?;
    Ok((curve.xs, curve.ys, curve.bandwidth))
}

/// Modal value of the KDE over `values`.
#[pyfunction]
#[pyo3(signature = (values, bandwidth = None, grid_points = DEFAULT_KDE_GRID))]
fn peak_distance(values: Vec<f64>, bandwidth: Option<f64>, grid_points: usize) -> PyResult<f64> {
    let curve = buffer::kde(&values, bandwidth, grid_points).map_err(py_err)?;
    buffer::peak_distance(&curve).map_err(py_err)
}

/// Runs the buffer analysis over `(event_id, gt, stack)` triples.
#[pyfunction]
#[pyo3(signature = (events, threshold = DEFAULT_THRESHOLD, kde_bandwidth = None, kde_grid = DEFAULT_KDE_GRID))]
fn buffer_report<'py>(
    py: Python<'py>,
    events: Vec<(String, PyBinaryMask, PyPredictionStack)>,
    threshold: f64,
    kde_bandwidth: Option<f64>,
    kde_grid: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let events: Vec<BufferEvent> = events
        .into_iter()
        .map(|(event_id, gt, stack)| BufferEvent { event_id, gt: gt.inner, stack: stack.inner })
        .collect();
    let config = BufferConfig { threshold, resolution_m: None, kde_bandwidth, kde_grid };
    let report = py.detach(|| buffer::buffer_report(&events, &config)).map_err(py_err)?;
    to_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (path, format = None, resolution_m = None))]
fn load_mask(path: PathBuf, format: Option<&str>, resolution_m: Option<f64>) -> PyResult<PyBinaryMask> {
    let f = parse_format(format, &path)?;
    io::load_mask(&path, f, resolution_m).map(mask).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (path, format = None, resolution_m = None))]
fn load_probability(path: PathBuf, format: Option<&str>, resolution_m: Option<f64>) -> PyResult<PyProbabilityMap> {
    let f = parse_format(format, &path)?;
    io::load_probability(&path, f, resolution_m).map(prob).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (path, format = None, resolution_m = None))]
fn load_stack(path: PathBuf, format: Option<&str>, resolution_m: Option<f64>) -> PyResult<PyPredictionStack> {
    let f = parse_format(format, &path)?;
    io::load_stack(&path, f, resolution_m).map(|inner| PyPredictionStack { inner }).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (path, m, format = None))]
fn save_mask(path: PathBuf, m: &PyBinaryMask, format: Option<&str>) -> PyResult<()> {
    let f = parse_format(format, &path)?;
    io::save_mask(&path, f, &m.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (path, p, format = None))]
fn save_probability(path: PathBuf, p: &PyProbabilityMap, format: Option<&str>) -> PyResult<()> {
    let f = parse_format(format, &path)?;
    io::save_probability(&path, f, &p.inner).map_err(py_err)
}

#[pyfunction]
fn save_stack(path: PathBuf, stack: &PyPredictionStack) -> PyResult<()> {
    io::save_stack(&path, &stack.inner).map_err(py_err)
}

#[pymodule]
fn fireline_uq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_THRESHOLD", DEFAULT_THRESHOLD)?;
    m.add("DEFAULT_RESOLUTION_M", DEFAULT_RESOLUTION_M)?;
    m.add_class::<PyBinaryMask>()?;
    m.add_class::<PyProbabilityMap>()?;
    m.add_class::<PyPredictionStack>()?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(boundary, m)?)?;
    m.add_function(wrap_pyfunction!(centroid, m)?)?;
    m.add_function(wrap_pyfunction!(distance_transform, m)?)?;
    m.add_function(wrap_pyfunction!(line, m)?)?;
    m.add_function(wrap_pyfunction!(centroid_boundary_distance, m)?)?;
    m.add_function(wrap_pyfunction!(average_surface_distance, m)?)?;
    m.add_function(wrap_pyfunction!(hausdorff_distance, m)?)?;
    m.add_function(wrap_pyfunction!(distance_report, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_stack, m)?)?;
    m.add_function(wrap_pyfunction!(pool_ensembles, m)?)?;
    m.add_function(wrap_pyfunction!(brier, m)?)?;
    m.add_function(wrap_pyfunction!(nll, m)?)?;
    m.add_function(wrap_pyfunction!(ece, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(calibration_report, m)?)?;
    m.add_function(wrap_pyfunction!(kde, m)?)?;
    m.add_function(wrap_pyfunction!(peak_distance, m)?)?;
    m.add_function(wrap_pyfunction!(buffer_report, m)?)?;
    m.add_function(wrap_pyfunction!(load_mask, m)?)?;
    m.add_function(wrap_pyfunction!(load_probability, m)?)?;
    m.add_function(wrap_pyfunction!(load_stack, m)?)?;
    m.add_function(wrap_pyfunction!(save_mask, m)?)?;
    m.add_function(wrap_pyfunction!(save_probability, m)?)?;
    m.add_function(wrap_pyfunction!(save_stack, m)?)?;
    Ok(())
}
