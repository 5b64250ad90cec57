//! Python bindings. Objects cross the boundary as the JSON container
//! format; reports and summaries come back as plain dicts.

use std::path::Path;
use std::sync::Arc;

use dcl_core::canon::canonicalize;
use dcl_core::harness::{run_satax, SataxOptions};
use dcl_core::injectivity::{bounded_entailment, formula_key, Entailment, InjTheory, SearchCaps};
use dcl_core::io::{
    derivation_json, graph_json, instance_json, morphism_json, object_json, report_json, sketch_json,
    to_pretty, Object, Workspace,
};
use dcl_core::satisfaction::{migrate_instance, validate_instance, ValidateOptions};
use dcl_core::signature::Signature;
use dcl_core::sketch::Sketch;
use dcl_core::slice::{canonicalize_instance, find_instance_isomorphism, SliceMorphism, TypedInstance};
use dcl_core::{DclError, Graph as CoreGraph, GraphMorphism};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde_json::Value;

create_exception!(dcl, ConstraintError, PyException);

fn err(e: DclError) -> PyErr {
    ConstraintError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).expect("JSON values serialize");
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse(text: &str) -> PyResult<Object> {
    Workspace::new().load_str(text, "input").map_err(err)
}

#[pyclass(frozen, skip_from_py_object, module = "dcl")]
struct Graph(Arc<CoreGraph>);

#[pymethods]
impl Graph {
    #[new]
    fn new(nodes: Vec<String>, arrows: Vec<(String, String, String)>) -> PyResult<Self> {
        CoreGraph::new(nodes, arrows).map(|g| Graph(Arc::new(g))).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text)?.into_graph().map(Graph).map_err(err)
    }

    fn to_json(&self) -> String {
        to_pretty(&graph_json(&self.0))
    }

    fn nodes(&self) -> Vec<String> {
        self.0.nodes().map(str::to_string).collect()
    }

    /// `(id, source, target)` triples.
    fn arrows(&self) -> Vec<(String, String, String)> {
        self.0.arrows().map(|(a, e)| (a.to_string(), e.src.clone(), e.tgt.clone())).collect()
    }

    fn canonical(&self) -> PyResult<Graph> {
        canonicalize(&self.0).map(|c| Graph(c.graph)).map_err(err)
    }

    fn __eq__(&self, other: &Graph) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Graph({} nodes, {} arrows)", self.0.node_count(), self.0.arrow_count())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "dcl")]
struct Instance(TypedInstance);

#[pymethods]
impl Instance {
    /// `elements` are `(id, sort)`, `links` are `(id, source, target, arrow)`.
    #[staticmethod]
    fn build(schema: &Graph, elements: Vec<(String, String)>, links: Vec<(String, String, String, String)>) -> PyResult<Self> {
        let el: Vec<(&str, &str)> = elements.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let ln: Vec<(&str, &str, &str, &str)> =
            links.iter().map(|(a, b, c, d)| (a.as_str(), b.as_str(), c.as_str(), d.as_str())).collect();
        TypedInstance::build(schema.0.clone(), &el, &ln).map(Instance).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text)?.into_instance().map(Instance).map_err(err)
    }

    fn to_json(&self) -> String {
        to_pretty(&instance_json(&self.0))
    }

    fn schema(&self) -> Graph {
        Graph(self.0.schema().clone())
    }

    fn element_count(&self) -> usize {
        self.0.element_count()
    }

    fn type_of(&self, element: &str) -> Option<String> {
        self.0.type_of(element).map(str::to_string)
    }

    fn canonical(&self) -> PyResult<Instance> {
        canonicalize_instance(&self.0).map(|c| Instance(c.instance)).map_err(err)
    }

    fn is_isomorphic(&self, other: &Instance) -> PyResult<bool> {
        find_instance_isomorphism(&self.0, &other.0).map(|m| m.is_some()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Instance({} elements)", self.0.element_count())
    }
}

#[pyclass(frozen, skip_from_py_object, module = "dcl")]
struct Morphism(GraphMorphism);

#[pymethods]
impl Morphism {
    #[staticmethod]
    fn identity(g: &Graph) -> Self {
        Morphism(GraphMorphism::identity(g.0.clone()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text)?.into_morphism().map(Morphism).map_err(err)
    }

    fn to_json(&self) -> String {
        to_pretty(&morphism_json(&self.0))
    }

    fn dom(&self) -> Graph {
        Graph(self.0.dom().clone())
    }

    fn cod(&self) -> Graph {
        Graph(self.0.cod().clone())
    }

    /// Instance over the codomain, restricted to the domain.
    fn migrate(&self, t: &Instance) -> PyResult<Instance> {
        migrate_instance(&self.0, &t.0).map(Instance).map_err(err)
    }

    /// Sketch over the domain, translated to the codomain.
    fn translate(&self, s: &PySketch) -> PyResult<PySketch> {
        s.0.translate(&self.0).map(PySketch).map_err(err)
    }
}

#[pyclass(frozen, skip_from_py_object, name = "Sketch", module = "dcl")]
struct PySketch(Sketch);

#[pymethods]
impl PySketch {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text)?.into_sketch().map(PySketch).map_err(err)
    }

    fn to_json(&self) -> String {
        to_pretty(&sketch_json(&self.0))
    }

    fn carrier(&self) -> Graph {
        Graph(self.0.carrier().clone())
    }

    fn declaration_ids(&self) -> Vec<String> {
        self.0.declarations().map(|d| d.id().to_string()).collect()
    }

    fn is_closed(&self) -> bool {
        self.0.is_closed()
    }

    fn close(&self) -> PySketch {
        PySketch(self.0.close())
    }

    /// The validation report as a dict; `overall` is `valid`, `invalid` or
    /// `unknown`.
    #[pyo3(signature = (instance, allow_unclosed = false, jobs = 1))]
    fn validate(&self, py: Python<'_>, instance: &Instance, allow_unclosed: bool, jobs: usize) -> PyResult<Py<PyAny>> {
        let options = ValidateOptions { allow_unclosed, jobs: jobs.max(1) };
        let report = validate_instance(&self.0, &instance.0, options).map_err(err)?;
        to_py(py, &report_json(&report))
    }
}

#[pyclass(frozen, skip_from_py_object, module = "dcl")]
struct Theory(InjTheory);

#[pymethods]
impl Theory {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        parse(text)?.into_theory().map(Theory).map_err(err)
    }

    fn formulas(&self) -> Vec<String> {
        self.0.formulas().keys().cloned().collect()
    }

    /// Bounded proof search for a goal given as a slice morphism in JSON.
    /// Returns `{"status": "derivable", "script", "proof"}` or
    /// `{"status": "unknown", "reason"}`.
    #[pyo3(signature = (goal, depth = 4, size = 8))]
    fn prove(&self, py: Python<'_>, goal: &str, depth: usize, size: usize) -> PyResult<Py<PyAny>> {
        let goal = parse(goal)?.into_slice_morphism().map_err(err)?;
        let caps = SearchCaps { depth, max_object_size: size, ..SearchCaps::default() };
        let value = match bounded_entailment(&self.0, &goal, caps).map_err(err)? {
            Entailment::Derivable(d) => {
                d.verify(&self.0).map_err(err)?;
                serde_json::json!({"status": "derivable", "script": d.script(), "proof": derivation_json(&d)})
            }
            Entailment::Unknown(why) => serde_json::json!({"status": "unknown", "reason": why}),
        };
        to_py(py, &value)
    }
}

/// Loads a JSON file and returns the wrapped object.
#[pyfunction]
fn load(py: Python<'_>, path: &str) -> PyResult<Py<PyAny>> {
    let o = Workspace::new().load_file(Path::new(path)).map_err(err)?;
    Ok(match o {
        Object::Graph(g) => Graph(g).into_pyobject(py)?.into_any().unbind(),
        Object::Morphism(m) => Morphism(m).into_pyobject(py)?.into_any().unbind(),
        Object::Instance(t) => Instance(t).into_pyobject(py)?.into_any().unbind(),
        Object::Sketch(s) => PySketch(s).into_pyobject(py)?.into_any().unbind(),
        Object::Theory(t) => Theory(t).into_pyobject(py)?.into_any().unbind(),
        o => to_py(py, &object_json(&o))?,
    })
}

/// Canonical key of a slice morphism given in JSON; equal keys mean
/// isomorphic formulas.
#[pyfunction]
fn formula_key_of(text: &str) -> PyResult<String> {
    let f: SliceMorphism = parse(text)?.into_slice_morphism().map_err(err)?;
    formula_key(&f).map_err(err)
}

/// Runs the satisfaction-condition harness and returns counts.
#[pyfunction]
#[pyo3(signature = (trials = 100, seed = 0, max_nodes = 5))]
fn satax(py: Python<'_>, trials: usize, seed: u64, max_nodes: usize) -> PyResult<Py<PyAny>> {
    let options = SataxOptions { trials, seed, max_nodes, ..SataxOptions::default() };
    let s = run_satax(&Signature::builtin(), &options).map_err(err)?;
    let failed: Vec<usize> = s.failures.iter().map(|f| f.index).collect();
    to_py(py, &serde_json::json!({"trials": s.trials, "passed": s.passed, "failed": failed}))
}

#[pymodule]
fn dcl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConstraintError", m.py().get_type::<ConstraintError>())?;
    m.add_class::<Graph>()?;
    m.add_class::<Instance>()?;
    m.add_class::<Morphism>()?;
    m.add_class::<PySketch>()?;
    m.add_class::<Theory>()?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(formula_key_of, m)?)?;
    m.add_function(wrap_pyfunction!(satax, m)?)?;
    Ok(())
}
