//! Python bindings. Composite results come back as plain dicts and lists.

use ellmeasure_core as core;
use ellmeasure_core::measures::{ellipsoid_mean_curvatures_with, QuadratureScheme};
use ellmeasure_core::GeometryError;
use nalgebra::DMatrix;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: GeometryError) -> PyErr {
    match e {
        GeometryError::Domain(_) | GeometryError::Degenerate(_) | GeometryError::Symmetry(_) => {
            PyValueError::new_err(e.to_string())
        }
        GeometryError::Resource { .. } => PyMemoryError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Solid ellipsoid. `frame` holds the principal directions as columns.
#[pyclass(name = "Ellipsoid", module = "ellmeasure", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEllipsoid {
    inner: core::Ellipsoid,
}

#[pymethods]
impl PyEllipsoid {
    #[new]
    #[pyo3(signature = (semi_axes, center=None, frame=None))]
    fn new(semi_axes: Vec<f64>, center: Option<Vec<f64>>, frame: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let n = semi_axes.len();
        let center = center.unwrap_or_else(|| vec![0.0; n]);
        let frame = match frame {
            None => DMatrix::identity(n, n),
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(PyValueError::new_err(format!("frame must be {n}x{n}")));
                }
                DMatrix::from_fn(n, n, |r, c| rows[r][c])
            }
        };
        let inner = core::Ellipsoid::new(center, frame, semi_axes).map_err(err)?;
        Ok(PyEllipsoid { inner })
    }

    #[staticmethod]
    fn ball(dim: usize, radius: f64) -> PyResult<Self> {
        Ok(PyEllipsoid {
            inner: core::Ellipsoid::ball(dim, radius).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyEllipsoid { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("ellipsoids serialize")
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn semi_axes(&self) -> Vec<f64> {
        self.inner.semi_axes().to_vec()
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.inner.center().iter().copied().collect()
    }

    #[getter]
    fn frame(&self) -> Vec<Vec<f64>> {
        let f = self.inner.frame();
        (0..f.nrows()).map(|r| f.row(r).iter().copied().collect()).collect()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err("point has the wrong dimension"));
        }
        Ok(self.inner.contains(&x))
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        Ok(PyEllipsoid {
            inner: self.inner.scaled(factor).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Ellipsoid(semi_axes={:?}, center={:?})",
            self.semi_axes(),
            self.center()
        )
    }
}

/// `[M_0, ..., M_{n-1}]` by quadrature; `scheme` is "gauss_map" or "surface".
#[pyfunction]
#[pyo3(signature = (e, rel_tol=1e-8, scheme="gauss_map"))]
fn mean_curvatures(e: &PyEllipsoid, rel_tol: f64, scheme: &str) -> PyResult<Vec<f64>> {
    let scheme = match scheme {
        "gauss_map" => QuadratureScheme::GaussMap,
        "surface" => QuadratureScheme::Surface,
        other => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    Ok(ellipsoid_mean_curvatures_with(&e.inner, rel_tol, scheme)
        .map_err(err)?
        .values)
}

#[pyfunction]
fn sphere_mean_curvatures(radius: f64, dim: usize) -> PyResult<Vec<f64>> {
    Ok(core::sphere_mean_curvatures(radius, dim).map_err(err)?.values)
}

#[pyfunction]
fn box_mean_curvatures(side_lengths: Vec<f64>) -> PyResult<Vec<f64>> {
    let b = core::Cuboid::centered(side_lengths).map_err(err)?;
    Ok(core::box_mean_curvatures(&b).values)
}

/// Monte Carlo Steiner-polynomial fit.
#[pyfunction]
#[pyo3(signature = (e, samples=400_000, seed=0))]
fn steiner_fit<'py>(py: Python<'py>, e: &PyEllipsoid, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let fit = py
        .detach(|| core::measures::steiner_fit(&e.inner, samples, seed, None))
        .map_err(err)?;
    to_py(py, &fit)
}

#[pyfunction]
fn pinch_bounds(e: &PyEllipsoid, index: usize) -> PyResult<(f64, f64)> {
    let b = core::pinch_bounds(&e.inner, index).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn tube_area_bounds(e: &PyEllipsoid, rho: f64) -> PyResult<(f64, f64)> {
    let b = core::tube_area_bounds(&e.inner, rho).map_err(err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn tube_volume_bounds(e: &PyEllipsoid, rho: f64) -> PyResult<(f64, f64)> {
    let b = core::tube_volume_bounds(&e.inner, rho).map_err(err)?;
    Ok((b.lower, b.upper))
}

/// Area of the outer parallel surface at distance `rho`, from quadrature.
#[pyfunction]
#[pyo3(signature = (e, rho, rel_tol=1e-10))]
fn parallel_area(e: &PyEllipsoid, rho: f64, rel_tol: f64) -> PyResult<f64> {
    let m = core::ellipsoid_mean_curvatures_quadrature(&e.inner, rel_tol).map_err(err)?;
    core::parallel_area(&m, rho).map_err(err)
}

#[pyfunction]
fn tube_breakdown_radius(e: &PyEllipsoid) -> PyResult<f64> {
    let m = core::ellipsoid_mean_curvatures_quadrature(&e.inner, 1e-10).map_err(err)?;
    core::bounds::tube_breakdown_radius(&e.inner, &m).map_err(err)
}

/// `M_{r-1}(e1) / M_{r-1}(e2)` estimated from random `r`-flats.
#[pyfunction]
#[pyo3(signature = (e1, e2, r=1, trials=100_000, seed=0))]
fn hit_measure_ratio<'py>(
    py: Python<'py>,
    e1: &PyEllipsoid,
    e2: &PyEllipsoid,
    r: usize,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = py
        .detach(|| core::hit_measure_ratio(&e1.inner, &e2.inner, r, trials, seed))
        .map_err(err)?;
    to_py(py, &est)
}

#[pyfunction]
fn lattice_count(py: Python<'_>, e: &PyEllipsoid) -> PyResult<u64> {
    py.detach(|| core::lattice_count(&e.inner)).map_err(err)
}

#[pyfunction]
fn lattice_discrepancy<'py>(py: Python<'py>, e: &PyEllipsoid) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| core::lattice_discrepancy(&e.inner)).map_err(err)?;
    to_py(py, &report)
}

/// Minimum-volume enclosing ellipsoid; returns `(ellipsoid, iterations)`.
#[pyfunction]
#[pyo3(signature = (points, symmetric=false, epsilon=1e-8))]
fn mvee(points: Vec<Vec<f64>>, symmetric: bool, epsilon: f64) -> PyResult<(PyEllipsoid, usize)> {
    let r = core::mvee(&points, symmetric, epsilon, core::john::DEFAULT_MAX_ITERATIONS).map_err(err)?;
    Ok((PyEllipsoid { inner: r.ellipsoid }, r.iterations))
}

#[pyfunction]
#[pyo3(signature = (points, symmetric=false, epsilon=1e-8, mean_curvatures=None))]
fn john_sandwich<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    symmetric: bool,
    epsilon: f64,
    mean_curvatures: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s = core::john_sandwich(&points, symmetric, epsilon, mean_curvatures.as_deref()).map_err(err)?;
    to_py(py, &s)
}

#[pymodule]
fn ellmeasure(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyEllipsoid>()?;
    m.add_function(wrap_pyfunction!(mean_curvatures, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_mean_curvatures, m)?)?;
    m.add_function(wrap_pyfunction!(box_mean_curvatures, m)?)?;
    m.add_function(wrap_pyfunction!(steiner_fit, m)?)?;
    m.add_function(wrap_pyfunction!(pinch_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(tube_area_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(tube_volume_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_area, m)?)?;
    m.add_function(wrap_pyfunction!(tube_breakdown_radius, m)?)?;
    m.add_function(wrap_pyfunction!(hit_measure_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_count, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(mvee, m)?)?;
    m.add_function(wrap_pyfunction!(john_sandwich, m)?)?;
    Ok(())
}
