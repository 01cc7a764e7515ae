//! Python bindings: a `Process` class wrapping the parser, the semantic
//! oracle, the static analysis, and the disentangling rewrites, plus the
//! corpus generator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use selflock_core::analysis::{Env, Permission, Verdict};
use selflock_core::corpus::{gen_linear, GenParams};
use selflock_core::oracle::{BudgetExceeded, Classification, LockWitness, Oracle};
use selflock_core::process::{struct_eq, Name, Process};
use selflock_core::refactor::{RefactorError, Strategy};
use selflock_core::{analysis, oracle, refactor, semantics, typing};

fn parse_dl_mode(mode: &str) -> PyResult<analysis::DlMode> {
    match mode {
        "relaxed" => Ok(analysis::DlMode::Relaxed),
        "strict" => Ok(analysis::DlMode::Strict),
        other => Err(PyValueError::new_err(format!(
            "unknown dl mode {other:?}: expected 'relaxed' or 'strict'"
        ))),
    }
}

fn parse_strategy(strategy: &str) -> PyResult<Strategy> {
    match strategy {
        "d1" | "prefix-to-parallel" => Ok(Strategy::PrefixToParallel),
        "d2" | "pull-output" => Ok(Strategy::PullOutput),
        other => Err(PyValueError::new_err(format!(
            "unknown strategy {other:?}: expected 'd1' or 'd2'"
        ))),
    }
}

fn parse_env(dict: &Bound<'_, PyDict>) -> PyResult<Env> {
    let mut entries = Vec::new();
    for (key, value) in dict.iter() {
        let name = Name::new(key.extract::<String>()?)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let permission = match value.extract::<String>()?.as_str() {
            "i" => Permission::In,
            "o" => Permission::Out,
            "io" => Permission::Both,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown permission {other:?}: expected 'i', 'o' or 'io'"
                )))
            }
        };
        entries.push((name, permission));
    }
    Ok(entries.into_iter().collect())
}

fn env_to_dict<'py>(py: Python<'py>, env: &Env) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    for (name, permission) in env.iter() {
        dict.set_item(name.as_str(), permission.as_str())?;
    }
    Ok(dict)
}

fn verdict_to_dict<'py>(py: Python<'py>, verdict: &Verdict) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    match verdict {
        Verdict::Detected(reports) => {
            dict.set_item("verdict", "locked")?;
            let list = PyList::empty(py);
            for env in reports {
                list.append(env_to_dict(py, env)?)?;
            }
            dict.set_item("reports", list)?;
        }
        Verdict::Layers(layers) => {
            dict.set_item("verdict", "no-detection")?;
            let list = PyList::empty(py);
            for env in layers.layers() {
                list.append(env_to_dict(py, env)?)?;
            }
            dict.set_item("layers", list)?;
        }
    }
    Ok(dict)
}

fn classification_to_dict<'py>(
    py: Python<'py>,
    c: &Classification,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("linear", c.linear)?;
    dict.set_item("complete", c.complete)?;
    dict.set_item("lock_free", c.lock_free)?;
    dict.set_item("deadlocked", c.deadlocked)?;
    dict.set_item("top_complete", c.top_complete)?;
    dict.set_item("self_deadlocked", c.self_deadlocked)?;
    dict.set_item("self_lock_reachable", c.self_lock_reachable)?;
    dict.set_item("potentially_self_locking", c.potentially_self_locking)?;
    Ok(dict)
}

fn witness_to_dict<'py>(py: Python<'py>, w: &LockWitness) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    let trace = PyList::empty(py);
    for step in &w.trace {
        trace.append((step.channel.to_string(), step.target.to_string()))?;
    }
    dict.set_item("trace", trace)?;
    let locked = PyList::empty(py);
    for component in w.locked.components() {
        locked.append(component.to_string())?;
    }
    dict.set_item("locked", locked)?;
    Ok(dict)
}

fn budget_err(e: BudgetExceeded) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn oracle_with(budget: Option<u64>) -> Oracle {
    budget.map(Oracle::new).unwrap_or_default()
}

/// A finite CCS process term.
#[pyclass(name = "Process", frozen)]
struct PyProcess {
    inner: Process,
}

impl PyProcess {
    fn wrap(inner: Process) -> Self {
        PyProcess { inner }
    }
}

#[pymethods]
impl PyProcess {
    /// Parse a process from its concrete syntax, e.g. "a.b.0 | ~b.~a.0".
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Process::parse(text)
            .map(PyProcess::wrap)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Process({:?})", self.inner.to_string())
    }

    /// Structural AST equality; use `struct_eq` for congruence.
    fn __eq__(&self, other: &PyProcess) -> bool {
        self.inner == other.inner
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.inner.hash(&mut hasher);
        hasher.finish()
    }

    /// Printed canonical form modulo structural congruence.
    fn canonical(&self) -> String {
        self.inner.canonical().to_string()
    }

    /// Structural congruence with another process.
    fn struct_eq(&self, other: &PyProcess) -> bool {
        struct_eq(&self.inner, &other.inner)
    }

    /// All channel names occurring in the term.
    fn names(&self) -> Vec<String> {
        self.inner.names().iter().map(|n| n.to_string()).collect()
    }

    fn is_linear(&self) -> bool {
        typing::is_linear(&self.inner)
    }

    /// Per-name (inputs, outputs) usage; raises ValueError when not linear.
    fn check_linear<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let counts =
            typing::check_linear(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let dict = PyDict::new(py);
        for (name, usage) in counts {
            dict.set_item(name.as_str(), (usage.inputs, usage.outputs))?;
        }
        Ok(dict)
    }

    /// Available reductions as (channel, target) pairs.
    fn steps(&self) -> Vec<(String, PyProcess)> {
        semantics::steps(&self.inner.canonical())
            .into_iter()
            .map(|s| {
                (
                    s.channel.to_string(),
                    PyProcess::wrap(s.target.to_process()),
                )
            })
            .collect()
    }

    fn is_deadlocked(&self) -> bool {
        semantics::is_deadlocked(&self.inner)
    }

    fn is_complete(&self) -> bool {
        oracle::is_complete(&self.inner)
    }

    fn is_top_complete(&self) -> bool {
        oracle::is_top_complete(&self.inner)
    }

    fn is_self_deadlocked(&self) -> bool {
        oracle::is_self_deadlocked(&self.inner)
    }

    #[pyo3(signature = (budget=None))]
    fn is_lock_free(&self, budget: Option<u64>) -> PyResult<bool> {
        oracle_with(budget)
            .is_lock_free(&self.inner)
            .map_err(budget_err)
    }

    /// Every semantic predicate at once, as a flat dict.
    #[pyo3(signature = (budget=None))]
    fn classify<'py>(&self, py: Python<'py>, budget: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
        let classification = oracle_with(budget)
            .classify(&self.inner)
            .map_err(budget_err)?;
        classification_to_dict(py, &classification)
    }

    /// Minimal evidence of a reachable self-locked component group, or None.
    #[pyo3(signature = (budget=None))]
    fn find_self_lock<'py>(
        &self,
        py: Python<'py>,
        budget: Option<u64>,
    ) -> PyResult<Option<Bound<'py, PyDict>>> {
        match oracle_with(budget)
            .find_self_lock(&self.inner)
            .map_err(budget_err)?
        {
            None => Ok(None),
            Some(witness) => Ok(Some(witness_to_dict(py, &witness)?)),
        }
    }

    /// Run the compositional static analysis; returns the verdict as a dict.
    #[pyo3(signature = (dl_mode="relaxed"))]
    fn analyze<'py>(&self, py: Python<'py>, dl_mode: &str) -> PyResult<Bound<'py, PyDict>> {
        let mode = parse_dl_mode(dl_mode)?;
        typing::check_linear(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let verdict = analysis::analyze_with(&self.inner, mode)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        verdict_to_dict(py, &verdict)
    }

    /// Apply a disentangling rewrite with an explicit environment,
    /// e.g. `p.disentangle("d1", {"a": "i", "c": "o"})`.
    fn disentangle(&self, strategy: &str, env: &Bound<'_, PyDict>) -> PyResult<PyProcess> {
        let strategy = parse_strategy(strategy)?;
        let env = parse_env(env)?;
        Ok(PyProcess::wrap(refactor::disentangle(
            strategy,
            &env,
            &self.inner,
        )))
    }

    /// Detect a lock, rewrite, and re-verify. Returns None when the analysis
    /// reports no lock.
    #[pyo3(signature = (strategy="d1", dl_mode="relaxed", budget=None))]
    fn refactor<'py>(
        &self,
        py: Python<'py>,
        strategy: &str,
        dl_mode: &str,
        budget: Option<u64>,
    ) -> PyResult<Option<Bound<'py, PyDict>>> {
        let strategy = parse_strategy(strategy)?;
        let mode = parse_dl_mode(dl_mode)?;
        typing::check_linear(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))?;
        match refactor::refactor_with(&self.inner, strategy, mode, &oracle_with(budget)) {
            Err(RefactorError::NoLockDetected) => Ok(None),
            Err(RefactorError::Oracle(e)) => Err(budget_err(e)),
            Err(RefactorError::Analysis(e)) => Err(PyRuntimeError::new_err(e.to_string())),
            Ok(result) => {
                let dict = PyDict::new(py);
                dict.set_item("env", env_to_dict(py, &result.env_used)?)?;
                dict.set_item("output", PyProcess::wrap(result.output))?;
                dict.set_item("still_linear", result.still_linear)?;
                dict.set_item("output_lock_free", result.output_lock_free)?;
                let residual = PyList::empty(py);
                for env in &result.residual_reports {
                    residual.append(env_to_dict(py, env)?)?;
                }
                dict.set_item("residual_reports", residual)?;
                Ok(Some(dict))
            }
        }
    }
}

/// Parse a process from its concrete syntax.
#[pyfunction]
fn parse(text: &str) -> PyResult<PyProcess> {
    PyProcess::new(text)
}

/// Generate a reproducible linear process; complete when `force_complete`.
#[pyfunction]
#[pyo3(signature = (seed, names=3, max_depth=4, max_width=3, force_complete=false))]
fn gen(
    seed: u64,
    names: usize,
    max_depth: usize,
    max_width: usize,
    force_complete: bool,
) -> PyResult<PyProcess> {
    if names == 0 {
        return Err(PyValueError::new_err("names must be at least 1"));
    }
    Ok(PyProcess::wrap(gen_linear(&GenParams {
        seed,
        names,
        max_depth,
        max_width,
        force_complete,
    })))
}

/// True when these processes are structurally congruent.
#[pyfunction(name = "struct_eq")]
fn py_struct_eq(p: &PyProcess, q: &PyProcess) -> bool {
    struct_eq(&p.inner, &q.inner)
}

#[pymodule]
fn selflock(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProcess>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(gen, m)?)?;
    m.add_function(wrap_pyfunction!(py_struct_eq, m)?)?;
    Ok(())
}
