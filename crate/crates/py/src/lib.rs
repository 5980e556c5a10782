//! Python bindings for `dii-core`.
//!
//! ```python
//! import dii
//! s = dii.generate_scenario('width = 512\nheight = 512\nfootprint_cells = [[0, 0]]')
//! change = dii.compute_change_mask(s.before, s.after, dii.PipelineConfig(dilation_radius=0, min_component=0))
//! grid = dii.compute_dii(change, s.before, s.grid)
//! print(dii.eval_gridded(dii.threshold_dii(grid), s.truth_impact).f1)
//! ```

use dii_core::{self as core, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

create_exception!(dii, EmptyReferenceError, PyValueError, "The before mask has no feature pixels.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::EmptyReference => EmptyReferenceError::new_err(e.to_string()),
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr>(what: &str, text: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e| PyValueError::new_err(format!("invalid {what} {text:?}: {e}")))
}

fn connectivity(n: u8) -> PyResult<core::Connectivity> {
    parse("connectivity", &n.to_string())
}

/// A binary raster, row-major, `True` for feature pixels.
#[pyclass(name = "BinaryMask", module = "dii", eq, frozen, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyMask(core::BinaryMask);

#[pymethods]
impl PyMask {
    /// Build from a flat row-major sequence of `width * height` booleans,
    /// or an all-false mask when `pixels` is omitted.
    #[new]
    #[pyo3(signature = (width, height, pixels=None))]
    fn new(width: usize, height: usize, pixels: Option<Vec<bool>>) -> PyResult<Self> {
        let mask = match pixels {
            Some(p) => core::BinaryMask::new(width, height, p),
            None => core::BinaryMask::filled(width, height, false),
        };
        mask.map(Self).map_err(to_py)
    }

    /// Build from a list of equal-length rows.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<bool>>) -> PyResult<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(PyValueError::new_err("rows must all have the same length"));
        }
        Self::new(width, height, Some(rows.concat()))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<bool> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err(format!("({x}, {y}) is outside the mask")));
        }
        Ok(self.0.get(x, y))
    }

    fn count_ones(&self) -> usize {
        self.0.count_ones()
    }

    /// Flat row-major list of pixels.
    fn to_list(&self) -> Vec<bool> {
        self.0.pixels().to_vec()
    }

    fn to_rows(&self) -> Vec<Vec<bool>> {
        (0..self.0.height()).map(|y| self.0.row(y).to_vec()).collect()
    }

    /// Write as PNG when the path ends in `.png`, binary PGM otherwise.
    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        core::save_mask(&self.0, path).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "BinaryMask({}x{}, {} set)",
            self.0.width(),
            self.0.height(),
            self.0.count_ones()
        )
    }
}

/// Load a PGM or PNG mask; any non-zero sample is a feature pixel.
#[pyfunction]
fn load_mask(path: std::path::PathBuf) -> PyResult<PyMask> {
    core::load_mask(path).map(PyMask).map_err(to_py)
}

/// Dilate with a Euclidean disk of the given radius.
#[pyfunction]
fn dilate(mask: &PyMask, radius: u32) -> PyMask {
    PyMask(core::dilate(&mask.0, radius))
}

/// Label connected components. Returns `(labels, sizes)` where `labels` is a
/// flat row-major list (0 = background) and `sizes[k]` is the pixel count
/// of component `k` (`sizes[0]` is 0).
#[pyfunction]
#[pyo3(signature = (mask, connectivity=8))]
fn label_components(mask: &PyMask, connectivity: u8) -> PyResult<(Vec<u32>, Vec<usize>)> {
    let map = core::label_components(&mask.0, self::connectivity(connectivity)?);
    Ok((map.labels().to_vec(), map.sizes().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (mask, min_size, connectivity=8))]
fn remove_small_components(mask: &PyMask, min_size: usize, connectivity: u8) -> PyResult<PyMask> {
    Ok(PyMask(core::remove_small_components(
        &mask.0,
        min_size,
        self::connectivity(connectivity)?,
    )))
}

/// Change-extraction parameters. Defaults are radius 5, dilate `pre`,
/// minimum component 1000 pixels, 8-connectivity.
#[pyclass(name = "PipelineConfig", module = "dii", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyPipelineConfig(core::PipelineConfig);

#[pymethods]
impl PyPipelineConfig {
    #[new]
    #[pyo3(signature = (dilation_radius=5, dilate_target="pre", min_component=1000, connectivity=8))]
    fn new(dilation_radius: u32, dilate_target: &str, min_component: usize, connectivity: u8) -> PyResult<Self> {
        Ok(Self(core::PipelineConfig {
            dilation_radius,
            dilate_target: parse("dilate_target", dilate_target)?,
            min_component,
            connectivity: self::connectivity(connectivity)?,
        }))
    }

    #[getter]
    fn dilation_radius(&self) -> u32 {
        self.0.dilation_radius
    }

    #[getter]
    fn dilate_target(&self) -> String {
        self.0.dilate_target.to_string()
    }

    #[getter]
    fn min_component(&self) -> usize {
        self.0.min_component
    }

    #[getter]
    fn connectivity(&self) -> String {
        self.0.connectivity.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "PipelineConfig(dilation_radius={}, dilate_target='{}', min_component={}, connectivity={})",
            self.0.dilation_radius, self.0.dilate_target, self.0.min_component, self.0.connectivity
        )
    }
}

/// Features present before and missing after, denoised.
#[pyfunction]
#[pyo3(signature = (before, after, config=None))]
fn compute_change_mask(before: &PyMask, after: &PyMask, config: Option<&PyPipelineConfig>) -> PyResult<PyMask> {
    let pair = core::make_pair(before.0.clone(), after.0.clone()).map_err(to_py)?;
    let config = config.map(|c| c.0).unwrap_or_default();
    Ok(PyMask(core::compute_change_mask(&pair, &config).into_mask()))
}

#[pyclass(name = "GridSpec", module = "dii", eq, frozen, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyGridSpec(core::GridSpec);

#[pymethods]
impl PyGridSpec {
    #[getter]
    fn cell_size(&self) -> usize {
        self.0.cell_size()
    }

    #[getter]
    fn rows(&self) -> usize {
        self.0.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.0.cols()
    }

    #[getter]
    fn num_cells(&self) -> usize {
        self.0.num_cells()
    }

    /// Row-major index of cell `(row, col)`.
    fn index(&self, row: usize, col: usize) -> usize {
        self.0.index(row, col)
    }

    fn __repr__(&self) -> String {
        format!("GridSpec({})", self.0)
    }
}

/// Tile a `width` x `height` image into square cells; edge cells may be partial.
#[pyfunction]
#[pyo3(signature = (width, height, cell_size=256))]
fn make_grid(width: usize, height: usize, cell_size: usize) -> PyResult<PyGridSpec> {
    core::make_grid(width, height, cell_size).map(PyGridSpec).map_err(to_py)
}

/// Per-cell impact index with the counts it was computed from.
#[pyclass(name = "DiiGrid", module = "dii", frozen)]
pub struct PyDiiGrid(core::DiiGrid);

#[pymethods]
impl PyDiiGrid {
    #[getter]
    fn grid(&self) -> PyGridSpec {
        PyGridSpec(*self.0.spec())
    }

    #[getter]
    fn dii(&self) -> Vec<f64> {
        self.0.dii().to_vec()
    }

    #[getter]
    fn change_count(&self) -> Vec<u64> {
        self.0.change_count().to_vec()
    }

    #[getter]
    fn before_count(&self) -> Vec<u64> {
        self.0.before_count().to_vec()
    }

    #[getter]
    fn region_mean(&self) -> f64 {
        self.0.region_mean()
    }

    #[getter]
    fn total_before(&self) -> u64 {
        self.0.total_before()
    }
}

/// Raises `EmptyReferenceError` when `before` has no feature pixels.
#[pyfunction]
fn compute_dii(change: &PyMask, before: &PyMask, grid: &PyGridSpec) -> PyResult<PyDiiGrid> {
    let change = core::ChangeMask::from_mask(change.0.clone());
    core::compute_dii(&change, &before.0, &grid.0).map(PyDiiGrid).map_err(to_py)
}

/// One flag per cell, row-major.
#[pyclass(name = "ImpactMap", module = "dii", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyImpactMap(core::ImpactMap);

#[pymethods]
impl PyImpactMap {
    #[new]
    #[pyo3(signature = (grid, impacted, tau=core::impact::DEFAULT_TAU))]
    fn new(grid: &PyGridSpec, impacted: Vec<bool>, tau: f64) -> PyResult<Self> {
        core::ImpactMap::new(grid.0, impacted, tau).map(Self).map_err(to_py)
    }

    #[getter]
    fn grid(&self) -> PyGridSpec {
        PyGridSpec(*self.0.spec())
    }

    #[getter]
    fn impacted(&self) -> Vec<bool> {
        self.0.impacted().to_vec()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.0.tau()
    }

    fn impacted_count(&self) -> usize {
        self.0.impacted_count()
    }

    fn is_impacted(&self, row: usize, col: usize) -> bool {
        self.0.is_impacted(row, col)
    }
}

/// Cells with `dii >= tau`.
#[pyfunction]
#[pyo3(signature = (grid, tau=core::impact::DEFAULT_TAU))]
fn threshold_dii(grid: &PyDiiGrid, tau: f64) -> PyResult<PyImpactMap> {
    core::threshold_dii(&grid.0, tau).map(PyImpactMap).map_err(to_py)
}

/// Grid a labelled change mask into ground-truth cells. `rule` is
/// `"dii-threshold"` or `"any-pixel"`.
#[pyfunction]
#[pyo3(signature = (change, before, grid, rule="dii-threshold", tau=core::impact::DEFAULT_TAU))]
fn grid_truth(change: &PyMask, before: &PyMask, grid: &PyGridSpec, rule: &str, tau: f64) -> PyResult<PyImpactMap> {
    let change = core::ChangeMask::from_mask(change.0.clone());
    core::grid_truth(&change, &before.0, &grid.0, parse("truth rule", rule)?, tau)
        .map(PyImpactMap)
        .map_err(to_py)
}

#[pyclass(name = "EvalReport", module = "dii", frozen, get_all)]
pub struct PyEvalReport {
    setting: String,
    precision: f64,
    recall: f64,
    f1: f64,
    iou: f64,
    tp: u64,
    fp: u64,
    #[pyo3(name = "fn")]
    fn_: u64,
    tn: u64,
}

impl From<core::EvalReport> for PyEvalReport {
    fn from(r: core::EvalReport) -> Self {
        Self {
            setting: r.setting.to_string(),
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            iou: r.iou,
            tp: r.counts.tp,
            fp: r.counts.fp,
            fn_: r.counts.fn_,
            tn: r.counts.tn,
        }
    }
}

#[pymethods]
impl PyEvalReport {
    fn __repr__(&self) -> String {
        format!(
            "EvalReport({}, precision={:.4}, recall={:.4}, f1={:.4}, iou={:.4})",
            self.setting, self.precision, self.recall, self.f1, self.iou
        )
    }
}

#[pyfunction]
fn eval_pixelwise(pred: &PyMask, truth: &PyMask) -> PyResult<PyEvalReport> {
    let pred = core::ChangeMask::from_mask(pred.0.clone());
    let truth = core::ChangeMask::from_mask(truth.0.clone());
    core::eval_pixelwise(&pred, &truth).map(Into::into).map_err(to_py)
}

#[pyfunction]
fn eval_gridded(pred: &PyImpactMap, truth: &PyImpactMap) -> PyResult<PyEvalReport> {
    core::eval_gridded(&pred.0, &truth.0).map(Into::into).map_err(to_py)
}

#[pyclass(name = "Scenario", module = "dii", frozen, get_all)]
pub struct PyScenario {
    before: PyMask,
    after: PyMask,
    truth_change: PyMask,
    truth_impact: PyImpactMap,
    grid: PyGridSpec,
}

/// Generate a synthetic scenario from the body of a `[synth]` TOML table,
/// e.g. `"width = 512\nfootprint_cells = [[0, 1]]\nseed = 3"`.
#[pyfunction]
#[pyo3(signature = (config=""))]
fn generate_scenario(config: &str) -> PyResult<PyScenario> {
    let config: core::ScenarioConfig =
        toml::from_str(config).map_err(|e| PyValueError::new_err(format!("invalid scenario config: {e}")))?;
    let grid = config.grid().map_err(to_py)?;
    let s = core::generate_scenario(&config).map_err(to_py)?;
    Ok(PyScenario {
        before: PyMask(s.before),
        after: PyMask(s.after),
        truth_change: PyMask(s.truth_change.into_mask()),
        truth_impact: PyImpactMap(s.truth_impact),
        grid: PyGridSpec(grid),
    })
}

#[pymodule]
fn dii(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("EmptyReferenceError", m.py().get_type::<EmptyReferenceError>())?;
    m.add_class::<PyMask>()?;
    m.add_class::<PyPipelineConfig>()?;
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyDiiGrid>()?;
    m.add_class::<PyImpactMap>()?;
    m.add_class::<PyEvalReport>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(load_mask, m)?)?;
    m.add_function(wrap_pyfunction!(dilate, m)?)?;
    m.add_function(wrap_pyfunction!(label_components, m)?)?;
    m.add_function(wrap_pyfunction!(remove_small_components, m)?)?;
    m.add_function(wrap_pyfunction!(compute_change_mask, m)?)?;
    m.add_function(wrap_pyfunction!(make_grid, m)?)?;
    m.add_function(wrap_pyfunction!(compute_dii, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_dii, m)?)?;
    m.add_function(wrap_pyfunction!(grid_truth, m)?)?;
    m.add_function(wrap_pyfunction!(eval_pixelwise, m)?)?;
    m.add_function(wrap_pyfunction!(eval_gridded, m)?)?;
    m.add_function(wrap_pyfunction!(generate_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
