//! Python bindings: configure and run simulations, read metrics and
//! ledgers, evaluate the analytic bounds, and drive experiment matrices.
//!
//! Configurations cross the boundary as JSON through Python's `json`
//! module, so every `SimConfig` field is reachable as a keyword argument
//! and unknown keys are rejected exactly as in TOML files.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use advocate_core::experiment::{run_matrix, ExperimentMatrix, Report};
use advocate_core::metrics::{self, MetricsReport};
use advocate_core::sim::{self, SimRun};
use advocate_core::chain::{Digest, NewBlock};
use advocate_core::{Block, BlockId, BlockTree, Origin};

create_exception!(advocate, AdvocateError, PyException, "Raised for any failure reported by the simulator.");
create_exception!(advocate, SafetyViolation, AdvocateError, "Two honest parties disagreed on a stable ledger position.");

fn to_py(err: advocate_core::Error) -> PyErr {
    match err {
        advocate_core::Error::SafetyViolation { .. } => SafetyViolation::new_err(err.to_string()),
        other => AdvocateError::new_err(other.to_string()),
    }
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn json_dumps(value: &Bound<'_, PyAny>) -> PyResult<String> {
    value.py().import("json")?.call_method1("dumps", (value,))?.extract()
}

fn parse_id(hex: &str) -> PyResult<BlockId> {
    Digest::from_hex(hex)
        .map(BlockId)
        .ok_or_else(|| PyValueError::new_err(format!("not a 64-digit hex block id: {hex:?}")))
}

fn hex(id: &BlockId) -> String {
    id.0.to_hex()
}

/// One simulation configuration. Keyword arguments override the defaults:
///
/// ```python
/// cfg = advocate.SimConfig(beta=0.67, e=10, variant="advocate-hooks", hook_t=2)
/// ```
#[pyclass(name = "SimConfig", module = "advocate", frozen)]
pub struct PySimConfig {
    inner: sim::SimConfig,
}

impl PySimConfig {
    fn with_overrides(base: &sim::SimConfig, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let Some(kwargs) = kwargs else {
            return Ok(PySimConfig { inner: base.clone() });
        };
        let mut merged = serde_json::to_value(base).expect("config serializes");
        let overrides: serde_json::Value = serde_json::from_str(&json_dumps(kwargs.as_any())?)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        for (key, value) in overrides.as_object().into_iter().flatten() {
            merged[key] = value.clone();
        }
        let inner: sim::SimConfig =
            serde_json::from_value(merged).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(PySimConfig { inner })
    }
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Self::with_overrides(&sim::SimConfig::default(), kwargs)
    }

    /// Parses a TOML document holding `SimConfig` keys.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        sim::SimConfig::from_toml_str(text).map(|inner| PySimConfig { inner }).map_err(to_py)
    }

    /// Copy with the given fields changed.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Self::with_overrides(&self.inner, kwargs)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &serde_json::to_string(&self.inner).expect("config serializes"))
    }

    fn __getattr__<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
        let value = serde_json::to_value(&self.inner).expect("config serializes");
        match value.get(name) {
            Some(field) => json_loads(py, &field.to_string()),
            None => Err(pyo3::exceptions::PyAttributeError::new_err(format!("SimConfig has no field {name:?}"))),
        }
    }

    fn __eq__(&self, other: PyRef<'_, PySimConfig>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "SimConfig(variant={:?}, beta={}, e={}, c={}, rounds={}, seed={})",
            self.inner.variant.as_str(),
            self.inner.beta,
            self.inner.e,
            self.inner.c,
            self.inner.rounds,
            self.inner.seed
        )
    }
}

/// A finished run: event log, certificates, final ledger and metrics.
#[pyclass(name = "SimRun", module = "advocate", frozen)]
pub struct PySimRun {
    inner: SimRun,
}

#[pymethods]
impl PySimRun {
    #[getter]
    fn config(&self) -> PySimConfig {
        PySimConfig {
            inner: self.inner.config.clone(),
        }
    }

    /// Last round executed, drain included.
    #[getter]
    fn end_round(&self) -> u64 {
        self.inner.end_round
    }

    /// Certificates in issue order, as dicts. `tips` lists the anchors of
    /// the non-base chains and is empty on a single chain.
    fn certificates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let certs: Vec<serde_json::Value> = self
            .inner
            .certificates
            .iter()
            .map(|pc| {
                let mut value = serde_json::to_value(&pc.cert).expect("certificate serializes");
                value["tips"] = serde_json::to_value(&pc.tips).expect("ids serialize");
                value
            })
            .collect();
        json_loads(py, &serde_json::Value::Array(certs).to_string())
    }

    /// Block ids of the final aggregate ledger, in ledger order.
    fn ledger_blocks(&self) -> Vec<String> {
        self.inner.final_ledger.block_order().iter().map(hex).collect()
    }

    /// Transaction ids of the final ledger after sanitization.
    fn ledger_transactions(&self) -> Vec<String> {
        self.inner.final_ledger.tx_order().map(|tx| tx.0.to_hex()).collect()
    }

    /// The event log as newline-delimited JSON.
    fn events_ndjson(&self) -> String {
        self.inner.log.to_ndjson()
    }

    /// The event log as a list of dicts, each tagged by its `event` key.
    fn events<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_loads(py, &serde_json::to_string(&self.inner.log).expect("log serializes"))?.get_item("events")
    }

    /// FG, IL, HW and CQ against `reference`, a beta = 0 run of the same
    /// configuration.
    fn metrics<'py>(&self, py: Python<'py>, reference: PyRef<'_, PySimRun>) -> PyResult<Bound<'py, PyAny>> {
        let report = MetricsReport::compute(&self.inner, &reference.inner).map_err(to_py)?;
        json_loads(py, &serde_json::to_string(&report).expect("report serializes"))
    }

    /// Honest share of ledger blocks at positions `start..=end`, or of the
    /// whole ledger.
    #[pyo3(signature = (start=None, end=None))]
    fn chain_quality(&self, start: Option<usize>, end: Option<usize>) -> PyResult<f64> {
        let window = match (start, end) {
            (None, None) => None,
            (s, e) => Some(s.unwrap_or(0)..=e.unwrap_or(usize::MAX)),
        };
        metrics::chain_quality(&self.inner.final_ledger, &self.inner.log, window).map_err(to_py)
    }

    fn honest_wastage(&self) -> f64 {
        metrics::honest_wastage(&self.inner.log, &self.inner.final_ledger)
    }

    /// Mean inclusion latency in block intervals; `inf` once any
    /// transaction is stuck.
    fn inclusion_latency(&self) -> PyResult<f64> {
        metrics::inclusion_latency(&self.inner.log, &self.inner.final_ledger)
            .map(|l| l.value())
            .map_err(to_py)
    }

    /// `(mean gap, honest blocks missing from the ledger)`.
    fn inclusion_gap(&self) -> (f64, usize) {
        metrics::inclusion_gap(&self.inner.log, &self.inner.final_ledger)
    }

    /// Ledger windows `(start, end)` spanning `t` consecutive certificates.
    fn checkpoint_windows(&self, t: u64) -> Vec<(usize, usize)> {
        metrics::checkpoint_windows(&self.inner, t)
            .into_iter()
            .map(|w| (*w.start(), *w.end()))
            .collect()
    }

    /// Honest transactions that missed the liveness deadline plus `slack`
    /// rounds (by default twice the network and BFT delays).
    #[pyo3(signature = (slack=None))]
    fn liveness_violations(&self, slack: Option<u64>) -> PyResult<Vec<String>> {
        let cfg = &self.inner.config;
        let slack = slack.unwrap_or(2 * (cfg.delta + cfg.effective_delta_bft()));
        metrics::liveness_violations(&self.inner.log, slack)
            .map(|txs| txs.iter().map(|tx| tx.0.to_hex()).collect())
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimRun(variant={:?}, end_round={}, certificates={}, ledger_blocks={})",
            self.inner.config.variant.as_str(),
            self.inner.end_round,
            self.inner.certificates.len(),
            self.inner.final_ledger.block_order().len()
        )
    }
}

/// Runs one simulation with the interpreter lock released.
#[pyfunction]
fn simulate(py: Python<'_>, config: PyRef<'_, PySimConfig>) -> PyResult<PySimRun> {
    let cfg = config.inner.clone();
    py.detach(|| sim::simulate(&cfg))
        .map(|inner| PySimRun { inner })
        .map_err(to_py)
}

/// Rounds within which an honest transaction confirms: `ceil(2/h) * e`.
#[pyfunction]
fn bound_liveness(h: f64, e: u64) -> PyResult<u64> {
    metrics::bound_liveness(h, e).map_err(to_py)
}

/// Depth `e - c` after which a checkpointed uncle is stable.
#[pyfunction]
fn bound_safety_depth(e: u64, c: u64) -> PyResult<u64> {
    metrics::bound_safety_depth(e, c).map_err(to_py)
}

/// Chain-quality floor over `t` consecutive checkpoints with hooks.
#[pyfunction]
fn bound_short_term_cq(beta: f64, t: u64) -> PyResult<f64> {
    metrics::bound_short_term_cq(beta, t).map_err(to_py)
}

/// Expected inclusion gap in blocks; `inf` without hooks.
#[pyfunction]
#[pyo3(signature = (beta, t, e))]
fn bound_inclusion_gap(beta: f64, t: Option<u64>, e: u64) -> PyResult<f64> {
    metrics::bound_inclusion_gap(beta, t, e).map_err(to_py)
}

/// Merkle root of a list of hex block ids, as hex.
#[pyfunction]
fn merkle_root(ids: Vec<String>) -> PyResult<String> {
    let ids = ids.iter().map(|s| parse_id(s)).collect::<PyResult<Vec<_>>>()?;
    Ok(advocate_core::merkle_root(&ids).to_hex())
}

/// A block tree rooted at a genesis block, for exploring the canonical
/// block order.
#[pyclass(name = "BlockTree", module = "advocate")]
pub struct PyBlockTree {
    inner: BlockTree,
}

#[pymethods]
impl PyBlockTree {
    #[new]
    fn new() -> Self {
        PyBlockTree {
            inner: BlockTree::new(Block::genesis(0)),
        }
    }

    #[getter]
    fn genesis(&self) -> String {
        hex(&self.inner.genesis())
    }

    /// Adds a block under `parent` and returns its id.
    #[pyo3(signature = (parent, round=1, nonce=0, honest=true))]
    fn add_child(&mut self, parent: &str, round: u64, nonce: u64, honest: bool) -> PyResult<String> {
        let origin = if honest { Origin::Honest } else { Origin::Adversarial };
        let block = NewBlock::child_of(parse_id(parent)?, origin, round, nonce).seal();
        let id = block.id;
        self.inner.insert(block).map_err(to_py)?;
        Ok(hex(&id))
    }

    fn depth(&self, id: &str) -> PyResult<Option<u64>> {
        Ok(self.inner.depth(&parse_id(id)?))
    }

    /// Parents first, smallest id first among ready blocks.
    fn canonical_order(&self, ids: Vec<String>) -> PyResult<Vec<String>> {
        let ids = ids.iter().map(|s| parse_id(s)).collect::<PyResult<Vec<_>>>()?;
        let order = advocate_core::canonical_block_order(&ids, &self.inner).map_err(to_py)?;
        Ok(order.iter().map(hex).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Aggregated results of an experiment matrix.
#[pyclass(name = "Report", module = "advocate", frozen)]
pub struct PyReport {
    inner: Report,
    hook_t: u64,
}

#[pymethods]
impl PyReport {
    /// Cells that aborted on a safety violation.
    fn safety_violations(&self) -> usize {
        self.inner.safety_violations()
    }

    fn trials_csv(&self) -> PyResult<String> {
        self.inner.trials_csv().map_err(to_py)
    }

    fn cells_csv(&self) -> PyResult<String> {
        self.inner.cells_csv().map_err(to_py)
    }

    fn cq_vs_beta_csv(&self) -> PyResult<String> {
        self.inner.cq_vs_beta_csv(self.hook_t).map_err(to_py)
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }

    /// Writes the CSV files into `directory` and returns their paths.
    fn write(&self, directory: PathBuf) -> PyResult<Vec<PathBuf>> {
        self.inner.write(&directory, self.hook_t).map_err(to_py)
    }
}

/// Runs every (cell, seed) of a TOML experiment matrix.
#[pyfunction]
#[pyo3(signature = (toml, parallel=true))]
fn run_experiment(py: Python<'_>, toml: &str, parallel: bool) -> PyResult<PyReport> {
    let matrix = ExperimentMatrix::from_toml_str(toml).map_err(to_py)?;
    let hook_t = matrix.base.hook_t.unwrap_or(2);
    let inner = py.detach(|| run_matrix(&matrix, parallel)).map_err(to_py)?;
    Ok(PyReport { inner, hook_t })
}

/// Variant names accepted by `SimConfig(variant=...)`.
#[pyfunction]
fn variants(py: Python<'_>) -> PyResult<Bound<'_, PyList>> {
    PyList::new(py, sim::Variant::ALL.iter().map(|v| v.as_str()))
}

#[pymodule]
pub fn advocate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("AdvocateError", m.py().get_type::<AdvocateError>())?;
    m.add("SafetyViolation", m.py().get_type::<SafetyViolation>())?;
    m.add_class::<PySimConfig>()?;
    m.add_class::<PySimRun>()?;
    m.add_class::<PyBlockTree>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(bound_liveness, m)?)?;
    m.add_function(wrap_pyfunction!(bound_safety_depth, m)?)?;
    m.add_function(wrap_pyfunction!(bound_short_term_cq, m)?)?;
    m.add_function(wrap_pyfunction!(bound_inclusion_gap, m)?)?;
    m.add_function(wrap_pyfunction!(merkle_root, m)?)?;
    m.add_function(wrap_pyfunction!(variants, m)?)?;
    Ok(())
}
