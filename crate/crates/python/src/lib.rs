//! Python bindings for the `bellshare` crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bellshare::bounds;
use bellshare::metrics;
use bellshare::nalgebra::{Matrix3, Vector3};
use bellshare::search::{self, DEConfig, Problem, SamplingMode};
use bellshare::{MeasurementPolicy, Observable, Scenario, Side, TwoQubitState};

fn err(e: bellshare::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rows(m: &Matrix3<f64>) -> Vec<Vec<f64>> {
    (0..3).map(|i| (0..3).map(|j| m[(i, j)]).collect()).collect()
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "first" => Ok(Side::First),
        "second" => Ok(Side::Second),
        other => Err(PyValueError::new_err(format!("side must be 'first' or 'second', got {other:?}"))),
    }
}

/// Qubit observable `B·1 + S σ·x`.
#[pyclass(name = "Observable", frozen)]
struct PyObservable(Observable);

#[pymethods]
impl PyObservable {
    #[new]
    fn new(bias: f64, strength: f64, direction: [f64; 3]) -> PyResult<Self> {
        Observable::new(bias, strength, Vector3::from(direction)).map(Self).map_err(err)
    }

    #[staticmethod]
    fn projective(direction: [f64; 3]) -> PyResult<Self> {
        Observable::projective(Vector3::from(direction)).map(Self).map_err(err)
    }

    #[staticmethod]
    fn unbiased(strength: f64, direction: [f64; 3]) -> PyResult<Self> {
        Observable::unbiased(strength, Vector3::from(direction)).map(Self).map_err(err)
    }

    #[staticmethod]
    fn trivial(bias: f64) -> PyResult<Self> {
        Observable::trivial(bias).map(Self).map_err(err)
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.0.bias()
    }

    #[getter]
    fn strength(&self) -> f64 {
        self.0.strength()
    }

    #[getter]
    fn direction(&self) -> [f64; 3] {
        self.0.direction().into()
    }

    #[getter]
    fn reversibility(&self) -> f64 {
        self.0.reversibility()
    }

    /// `(operation fidelity, estimation fidelity)`.
    fn fidelities(&self) -> (f64, f64) {
        let f = self.0.fidelities();
        (f.operation_fidelity, f.estimation_fidelity)
    }

    fn bloch_channel_map(&self) -> Vec<Vec<f64>> {
        rows(self.0.bloch_channel_map().matrix())
    }

    fn __repr__(&self) -> String {
        let d = self.0.direction();
        format!("Observable(bias={}, strength={}, direction=[{}, {}, {}])", self.0.bias(), self.0.strength(), d[0], d[1], d[2])
    }
}

/// Two-qubit state in Bloch form `(a, b, T)`.
#[pyclass(name = "TwoQubitState", frozen)]
struct PyState(TwoQubitState);

#[pymethods]
impl PyState {
    #[new]
    fn new(a: [f64; 3], b: [f64; 3], t: [[f64; 3]; 3]) -> PyResult<Self> {
        let m = Matrix3::from_fn(|i, j| t[i][j]);
        TwoQubitState::new(Vector3::from(a), Vector3::from(b), m).map(Self).map_err(err)
    }

    #[staticmethod]
    fn singlet() -> Self {
        Self(TwoQubitState::singlet())
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self(TwoQubitState::maximally_mixed())
    }

    /// `cos α|00⟩ + sin α|11⟩`.
    #[staticmethod]
    fn pure_state(alpha: f64) -> PyResult<Self> {
        TwoQubitState::pure_state(alpha).map(Self).map_err(err)
    }

    #[getter]
    fn a(&self) -> [f64; 3] {
        self.0.bloch_a().into()
    }

    #[getter]
    fn b(&self) -> [f64; 3] {
        self.0.bloch_b().into()
    }

    #[getter(T)]
    fn t(&self) -> Vec<Vec<f64>> {
        rows(&self.0.corr())
    }

    fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue()
    }

    #[pyo3(signature = (observable, side = "first"))]
    fn apply_measurement(&self, observable: PyRef<'_, PyObservable>, side: &str) -> PyResult<Self> {
        Ok(Self(self.0.apply_measurement(&observable.0, parse_side(side)?)))
    }
}

/// Choice between two observables, the second taken with probability `epsilon`.
#[pyclass(name = "MeasurementPolicy", frozen)]
struct PyPolicy(MeasurementPolicy);

#[pymethods]
impl PyPolicy {
    #[new]
    #[pyo3(signature = (primary, secondary, epsilon = 0.5))]
    fn new(primary: PyRef<'_, PyObservable>, secondary: PyRef<'_, PyObservable>, epsilon: f64) -> PyResult<Self> {
        MeasurementPolicy::new(primary.0, secondary.0, epsilon).map(Self).map_err(err)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.secondary_prob()
    }

    fn averaged_map(&self) -> Vec<Vec<f64>> {
        rows(self.0.averaged_map().matrix())
    }
}

#[pyclass(name = "Scenario", frozen)]
struct PyScenario(Scenario);

#[pymethods]
impl PyScenario {
    #[new]
    fn new(state: PyRef<'_, PyState>, policy_a: PyRef<'_, PyPolicy>, policy_b: PyRef<'_, PyPolicy>) -> Self {
        Self(Scenario::new(state.0, policy_a.0, policy_b.0))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn chsh_first_pair(&self) -> f64 {
        self.0.chsh_first_pair()
    }

    fn proxy_12(&self) -> f64 {
        self.0.proxy_12()
    }

    fn proxy_21(&self) -> f64 {
        self.0.proxy_21()
    }

    fn proxy_22(&self) -> f64 {
        self.0.proxy_22()
    }

    /// Dict with keys `s11`, `s12`, `s21`, `s22`.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.0.report())
    }
}

#[pyfunction]
fn reversibility(bias: f64, strength: f64) -> PyResult<f64> {
    bellshare::observable::reversibility(bias, strength).map_err(err)
}

#[pyfunction]
fn monogamy_region(u: f64, v: f64) -> bool {
    metrics::monogamy_region(u, v)
}

#[pyfunction]
fn thresholds(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    json_to_py(py, &bounds::thresholds())
}

#[pyfunction]
fn r_minus(epsilon: f64) -> PyResult<f64> {
    bounds::r_minus(epsilon).map_err(err)
}

#[pyfunction]
fn epsilon_minus(r: f64) -> PyResult<f64> {
    bounds::epsilon_minus(r).map_err(err)
}

#[pyfunction]
fn biased_window(py: Python<'_>, epsilon: f64, strengths: Vec<f64>) -> PyResult<Bound<'_, PyAny>> {
    json_to_py(py, &bounds::biased_window(epsilon, &strengths).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n, mode = "eq13_hypotheses", seed = 0, workers = 1))]
fn monte_carlo_bounds<'py>(py: Python<'py>, n: u64, mode: &str, seed: u64, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    let mode: SamplingMode = mode.parse().map_err(err)?;
    let summary = py.detach(|| search::monte_carlo_bounds(n, mode, seed, workers)).map_err(err)?;
    json_to_py(py, &summary)
}

#[pyfunction]
#[pyo3(signature = (problem, s_values, population_size = 100, max_generations = 200, seed = 0, workers = 1))]
fn sweep_frontier<'py>(
    py: Python<'py>,
    problem: &str,
    s_values: Vec<f64>,
    population_size: usize,
    max_generations: usize,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let problem: Problem = problem.parse().map_err(err)?;
    let cfg = DEConfig {
        population_size,
        max_generations,
        seed,
        worker_count: workers,
        ..DEConfig::default()
    };
    let result = py.detach(|| search::sweep_frontier(problem, &s_values, &cfg)).map_err(err)?;
    json_to_py(py, &result)
}

#[pymodule]
fn pybellshare(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyObservable>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyPolicy>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(reversibility, m)?)?;
    m.add_function(wrap_pyfunction!(monogamy_region, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(r_minus, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_minus, m)?)?;
    m.add_function(wrap_pyfunction!(biased_window, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_frontier, m)?)?;
    Ok(())
}
