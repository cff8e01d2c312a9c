//! Python bindings for the reformine engine.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pythonize::{depythonize, pythonize};

use reformine_core::features::{feature_names as names, featurize, FeatureVector};
use reformine_core::graph_ir::{to_graph, Format};
use reformine_core::instances::{sample_instances, GeneratorConfig};
use reformine_core::mcts::{self, ExploreConfig};
use reformine_core::rewrite::{self, apply, canonical_hash, enumerate_all, select_rules};
use reformine_core::solve::{self, flatten, Mode};
use reformine_core::spec_lang::{self, ground, parse, pretty, Instance, SpecAst};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn instance_of(obj: Option<&Bound<'_, PyAny>>) -> PyResult<Instance> {
    let Some(obj) = obj else { return Ok(Instance::new()) };
    if let Ok(text) = obj.extract::<String>() {
        return Instance::from_text(&text).map_err(err);
    }
    let v: serde_json::Value = depythonize(obj)?;
    Instance::from_json(&v.to_string()).map_err(err)
}

/// A parsed and type-checked specification.
#[pyclass(frozen, module = "reformine")]
struct Spec {
    ast: SpecAst,
}

#[pymethods]
impl Spec {
    #[new]
    fn new(text: &str) -> PyResult<Spec> {
        Ok(Spec { ast: parse(text).map_err(err)? })
    }

    fn __str__(&self) -> String {
        pretty(&self.ast, false)
    }

    fn __repr__(&self) -> String {
        format!("Spec({:?})", pretty(&self.ast, false))
    }

    fn __eq__(&self, other: &Spec) -> bool {
        self.ast == other.ast
    }

    fn annotated(&self) -> String {
        pretty(&self.ast, true)
    }

    #[pyo3(signature = (format = "json"))]
    fn graph(&self, format: &str) -> PyResult<String> {
        let f: Format = format.parse().map_err(err)?;
        Ok(to_graph(&self.ast).export(f))
    }

    #[pyo3(signature = (rules = ""))]
    fn matches<'py>(&self, py: Python<'py>, rules: &str) -> PyResult<Bound<'py, PyAny>> {
        let rules = select_rules(rules).map_err(err)?;
        let list: Vec<serde_json::Value> = enumerate_all(&rules, &self.ast).iter().map(|(_, m)| m.to_json()).collect();
        Ok(pythonize(py, &list)?)
    }

    #[pyo3(signature = (index, rules = ""))]
    fn apply(&self, index: usize, rules: &str) -> PyResult<Spec> {
        let rules = select_rules(rules).map_err(err)?;
        let all = enumerate_all(&rules, &self.ast);
        let (ri, m) = all.get(index).ok_or_else(|| err(format!("match index {index} out of range ({})", all.len())))?;
        Ok(Spec { ast: apply(rules[*ri], &self.ast, m).map_err(err)? })
    }

    fn normalize(&self) -> Spec {
        Spec { ast: rewrite::normalize(&self.ast) }
    }

    fn canonical_hash(&self) -> u64 {
        canonical_hash(&self.ast)
    }

    fn features(&self) -> Vec<f64> {
        featurize(&self.ast).0
    }

    #[pyo3(signature = (instance = None))]
    fn ground(&self, instance: Option<&Bound<'_, PyAny>>) -> PyResult<Spec> {
        Ok(Spec { ast: ground(&self.ast, &instance_of(instance)?).map_err(err)? })
    }

    /// Solves on one instance; `mode` is `first`, `all` or `optimize`.
    #[pyo3(signature = (instance = None, mode = "first", budget = 1_000_000))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        instance: Option<&Bound<'py, PyAny>>,
        mode: &str,
        budget: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode = match mode {
            "first" => Mode::First,
            "all" => Mode::All,
            "optimize" => Mode::Optimize,
            other => return Err(err(format!("unknown mode `{other}`"))),
        };
        if budget == 0 {
            return Err(err("budget must be at least 1"));
        }
        let g = ground(&self.ast, &instance_of(instance)?).map_err(err)?;
        let csp = flatten(&g).map_err(err)?;
        let r = py.detach(|| solve::solve(&csp, budget, mode));
        Ok(pythonize(py, &r.to_json(false))?)
    }

    #[pyo3(signature = (count, seed, density = 0.5, cap = 50))]
    fn sample_instances<'py>(
        &self,
        py: Python<'py>,
        count: usize,
        seed: u64,
        density: f64,
        cap: i64,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let cfg = GeneratorConfig { count, seed, density, cap, ..Default::default() };
        let xs = sample_instances(&self.ast, &cfg).map_err(err)?;
        xs.iter().map(|i| Ok(pythonize(py, i)?)).collect()
    }

    /// Runs the reformulation search and returns its report.
    #[pyo3(signature = (instances, iterations, seed, budget = 100_000, c = std::f64::consts::SQRT_2, depth = 8, rules = "", jobs = 1))]
    #[allow(clippy::too_many_arguments)]
    fn explore<'py>(
        &self,
        py: Python<'py>,
        instances: Vec<Bound<'py, PyAny>>,
        iterations: usize,
        seed: u64,
        budget: u64,
        c: f64,
        depth: usize,
        rules: &str,
        jobs: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let instances = instances.iter().map(|i| instance_of(Some(i))).collect::<PyResult<Vec<_>>>()?;
        let rules = select_rules(rules).map_err(err)?;
        let cfg = ExploreConfig { iterations, c, budget, max_depth: depth, seed, instances, rules, jobs: jobs.max(1) };
        let report = py.detach(|| mcts::explore(&self.ast, cfg).map(|ex| ex.report(false))).map_err(err)?;
        Ok(pythonize(py, &report)?)
    }
}

#[pyfunction]
fn uct_score(w: f64, n: u64, parent_visits: u64, c: f64) -> f64 {
    mcts::uct_score(w, n, parent_visits, c)
}

#[pyfunction]
fn reward(candidate_nodes: u64, baseline_nodes: u64) -> f64 {
    mcts::reward(candidate_nodes, baseline_nodes)
}

#[pyfunction]
fn rules() -> Vec<&'static str> {
    rewrite::library().iter().map(|r| r.name()).collect()
}

#[pyfunction]
fn feature_names() -> Vec<String> {
    names()
}

#[pyfunction]
fn distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    reformine_core::features::distance(&FeatureVector(a), &FeatureVector(b)).map_err(err)
}

#[pyfunction]
fn parse_instance<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let inst = spec_lang::Instance::from_text(text).map_err(err)?;
    Ok(pythonize(py, &inst)?)
}

#[pymodule]
fn reformine(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Spec>()?;
    m.add_function(wrap_pyfunction!(uct_score, m)?)?;
    m.add_function(wrap_pyfunction!(reward, m)?)?;
    m.add_function(wrap_pyfunction!(rules, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(parse_instance, m)?)?;
    Ok(())
}
