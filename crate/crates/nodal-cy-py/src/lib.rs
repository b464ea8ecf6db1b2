use std::sync::OnceLock;

use nodal_cy::borcherds_local::{cocycle_report, DEFAULT_FLIP_BUDGET};
use nodal_cy::cy_pipeline::{Ambient, Census, Pipeline};
use nodal_cy::divisor_lattice::Family;
use nodal_cy::fixed_loci::fixed_locus;
use nodal_cy::group_engine::{conjugacy_class, involution_classes, Subgroup, DEFAULT_CLOSURE_CAP};
use nodal_cy::theta_numerics::{coordinates, verification_report, SiegelPoint};
use nodal_cy::Model;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(nodal_cy, NodalCyError, PyException);

fn err(e: nodal_cy::Error) -> PyErr {
    NodalCyError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_ambient(name: &str) -> PyResult<Ambient> {
    match name {
        "G" | "g" => Ok(Ambient::G),
        "H" | "h" => Ok(Ambient::H),
        _ => Err(PyValueError::new_err(format!("unknown ambient group {name:?}, expected \"G\" or \"H\""))),
    }
}

fn pipeline(ambient: Ambient) -> PyResult<&'static Pipeline<'static>> {
    static G: OnceLock<Pipeline<'static>> = OnceLock::new();
    static H: OnceLock<Pipeline<'static>> = OnceLock::new();
    let cell = match ambient {
        Ambient::G => &G,
        Ambient::H => &H,
    };
    if let Some(p) = cell.get() {
        return Ok(p);
    }
    let p = Pipeline::new(Model::global(), ambient).map_err(err)?;
    Ok(cell.get_or_init(|| p))
}

#[derive(Serialize)]
struct CensusSummary<'a> {
    classes: usize,
    projective: usize,
    class_euler_pairs: Vec<(i64, i64)>,
    hodge_pairs: Vec<(i64, i64)>,
    by_order: Vec<(usize, usize, usize)>,
    reports: &'a Census,
}

fn summarize(c: &Census) -> CensusSummary<'_> {
    CensusSummary {
        classes: c.reports.len(),
        projective: c.projective_count(),
        class_euler_pairs: c.class_euler_pairs().into_iter().collect(),
        hodge_pairs: c.hodge_pairs().into_iter().collect(),
        by_order: c.by_order().into_iter().map(|(o, (n, p))| (o, n, p)).collect(),
        reports: c,
    }
}

/// The projective symmetry group, its 96 nodes and the divisor class model.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: &'static Model,
}

#[pymethods]
impl PyModel {
    #[new]
    fn new(py: Python<'_>) -> Self {
        PyModel { inner: py.detach(Model::global) }
    }

    #[getter]
    fn group_order(&self) -> usize {
        self.inner.group.order()
    }

    #[getter]
    fn h_order(&self) -> usize {
        self.inner.h.order()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.nodes.nodes.len()
    }

    #[getter]
    fn stabilizer_order(&self) -> usize {
        self.inner.nodes.stabilizer.order()
    }

    #[getter]
    fn ruling_group_order(&self) -> usize {
        self.inner.nodes.ruling_group.order()
    }

    #[getter]
    fn divisor_orbits(&self) -> [usize; 3] {
        Family::ALL.map(|f| self.inner.divisors.family_members(f).len())
    }

    #[getter]
    fn class_group_rank(&self) -> usize {
        self.inner.classes.image_rank()
    }

    /// Id of an element given in monomial notation such as "(Y0, -Y3, iY1, iY2, X3, X1, X0, X2)".
    fn element(&self, notation: &str) -> PyResult<u32> {
        self.inner.element(notation).map_err(err)
    }

    fn notation(&self, id: u32) -> PyResult<String> {
        if (id as usize) < self.inner.group.order() {
            Ok(self.inner.group.element(id).notation())
        } else {
            Err(PyValueError::new_err(format!("no element with id {id}")))
        }
    }

    fn in_h(&self, notation: &str) -> PyResult<bool> {
        Ok(self.inner.h.contains(self.element(notation)?))
    }

    fn subgroup_order(&self, generators: Vec<String>) -> PyResult<usize> {
        let refs: Vec<&str> = generators.iter().map(String::as_str).collect();
        Ok(self.inner.subgroup(&refs).map_err(err)?.order())
    }

    /// Exact coordinates of each node, four rational coefficients per coordinate.
    fn nodes(&self) -> Vec<Vec<[String; 4]>> {
        self.inner.nodes.nodes.iter().map(|n| n.point.to_strings()).collect()
    }

    fn invariant_dimension(&self, generators: Vec<String>) -> PyResult<usize> {
        let refs: Vec<&str> = generators.iter().map(String::as_str).collect();
        let sub = self.inner.subgroup(&refs).map_err(err)?;
        Ok(self.inner.classes.invariant_dimension(&self.inner.divisors, &sub))
    }

    /// (representative, class size) for each involution class of the index-two subgroup.
    fn involution_classes(&self) -> Vec<(String, usize)> {
        let g = &self.inner.group;
        involution_classes(g, &self.inner.h).iter().map(|c| (g.element(c[0]).notation(), c.len())).collect()
    }

    fn conjugacy_class_size(&self, notation: &str) -> PyResult<usize> {
        let id = self.element(notation)?;
        Ok(conjugacy_class(&self.inner.group, id, &self.inner.h).map_err(err)?.len())
    }

    /// Component counts of the fixed locus of one element on the threefold.
    fn fixed_locus<'py>(&self, py: Python<'py>, notation: &str) -> PyResult<Bound<'py, PyAny>> {
        let id = self.element(notation)?;
        let locus = fixed_locus(&self.inner.group, &self.inner.nodes, id).map_err(err)?;
        to_py(py, &locus.summary())
    }

    fn __repr__(&self) -> String {
        format!("Model(group_order={}, nodes={})", self.group_order(), self.node_count())
    }
}

/// Report on the subgroup generated by elements of the index-two subgroup.
#[pyfunction]
#[pyo3(signature = (generators, ambient = "G"))]
fn classify<'py>(py: Python<'py>, generators: Vec<String>, ambient: &str) -> PyResult<Bound<'py, PyAny>> {
    let ambient = parse_ambient(ambient)?;
    let report = py.detach(|| -> PyResult<_> {
        let m = Model::global();
        let refs: Vec<&str> = generators.iter().map(String::as_str).collect();
        let sub: Subgroup = m.subgroup(&refs).map_err(err)?;
        pipeline(ambient)?.report(&sub).map_err(err)
    })?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (ambient = "G", cap = DEFAULT_CLOSURE_CAP))]
fn census_elementary_abelian<'py>(py: Python<'py>, ambient: &str, cap: usize) -> PyResult<Bound<'py, PyAny>> {
    let ambient = parse_ambient(ambient)?;
    let census = py.detach(|| pipeline(ambient)?.elementary_abelian_census(cap).map_err(err))?;
    to_py(py, &summarize(&census))
}

#[pyfunction]
#[pyo3(signature = (max_order = 32, ambient = "G", cap = DEFAULT_CLOSURE_CAP))]
fn census_free<'py>(py: Python<'py>, max_order: usize, ambient: &str, cap: usize) -> PyResult<Bound<'py, PyAny>> {
    let ambient = parse_ambient(ambient)?;
    let census = py.detach(|| pipeline(ambient)?.free_census(max_order, cap).map_err(err))?;
    to_py(py, &summarize(&census))
}

/// Local cocycle data of the six divisors at the standard cusp, in 8H units.
#[pyfunction]
#[pyo3(signature = (budget = DEFAULT_FLIP_BUDGET))]
fn borcherds_tables(py: Python<'_>, budget: u64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &cocycle_report(budget).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (samples = 20, seed = 1, tol = 1e-10))]
fn theta_verify(py: Python<'_>, samples: usize, seed: u64, tol: f64) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &verification_report(seed, samples, tol).map_err(err)?)
}

/// The eight theta coordinates at the period matrix ((z0, z1), (z1, z2)).
#[pyfunction]
#[pyo3(signature = (z0, z1, z2, tol = 1e-14))]
fn theta_coordinates(z0: Complex64, z1: Complex64, z2: Complex64, tol: f64) -> PyResult<Vec<Complex64>> {
    let z = SiegelPoint::new(z0, z1, z2).map_err(err)?;
    Ok(coordinates(&z, tol).map_err(err)?.to_vec())
}

#[pymodule]
#[pyo3(name = "nodal_cy")]
fn nodal_cy_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NodalCyError", m.py().get_type::<NodalCyError>())?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(census_elementary_abelian, m)?)?;
    m.add_function(wrap_pyfunction!(census_free, m)?)?;
    m.add_function(wrap_pyfunction!(borcherds_tables, m)?)?;
    m.add_function(wrap_pyfunction!(theta_verify, m)?)?;
    m.add_function(wrap_pyfunction!(theta_coordinates, m)?)?;
    Ok(())
}
