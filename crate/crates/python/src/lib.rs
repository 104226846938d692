//! Python bindings. Complex vectors cross the boundary as lists of Python
//! `complex`, matrices as lists of rows.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use risbal::channel::ChannelSet;
use risbal::manifold::{self, RcgConfig, ReflectionVector, StopReason};
use risbal::ris_design::{self, BalanceMatrix, EffectiveChannels};
use risbal::sim::{self, Scheme, ScenarioConfig, SweepKind, SweepOptions};
use risbal::{CMatrix, CVector, Complex64, Error};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyOSError::new_err(err.to_string()),
        Error::Numerical(_) | Error::RetractionSingular { .. } | Error::HermitianViolation { .. } => {
            PyArithmeticError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn vector(v: Vec<Complex64>) -> CVector {
    CVector::from_vec(v)
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn rows_of(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn list_of(v: &CVector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

fn point(v: Vec<Complex64>) -> PyResult<ReflectionVector> {
    ReflectionVector::new(vector(v)).map_err(to_py)
}

fn scheme_name(s: Scheme) -> &'static str {
    s.as_str()
}

/// Simulation scenario. Built from the reference operating point, a TOML
/// string or a file; fields not listed here are set through TOML.
#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let inner = match toml {
            Some(text) => ScenarioConfig::from_toml_str(text).map_err(to_py)?,
            None => ScenarioConfig::default(),
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ScenarioConfig::load(path).map_err(to_py)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn ris_elements(&self) -> usize {
        self.inner.ris_elements()
    }

    #[getter]
    fn users_per_cell(&self) -> usize {
        self.inner.users_per_cell
    }

    #[getter]
    fn lambda_db(&self) -> f64 {
        self.inner.lambda_db
    }

    #[setter]
    fn set_lambda_db(&mut self, v: f64) {
        self.inner.lambda_db = v;
    }

    #[getter]
    fn p_t_dbm(&self) -> f64 {
        self.inner.p_t_dbm
    }

    #[setter]
    fn set_p_t_dbm(&mut self, v: f64) {
        self.inner.p_t_dbm = v;
    }

    #[getter]
    fn num_drops(&self) -> usize {
        self.inner.num_drops
    }

    #[setter]
    fn set_num_drops(&mut self, v: usize) {
        self.inner.num_drops = v;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.seed = v;
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(M={}, K={}, p_t_dbm={}, lambda_db={}, num_drops={}, seed={})",
            self.inner.ris_elements(),
            self.inner.users_per_cell,
            self.inner.p_t_dbm,
            self.inner.lambda_db,
            self.inner.num_drops,
            self.inner.seed
        )
    }
}

/// One channel realization of the two-cell system.
#[pyclass(name = "Channels", skip_from_py_object)]
struct PyChannels {
    inner: ChannelSet,
}

#[pymethods]
impl PyChannels {
    /// Draws the realization used by drop `drop_seed`.
    #[staticmethod]
    fn generate(scenario: &PyScenario, drop_seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: sim::drop_channels(&scenario.inner, drop_seed).map_err(to_py)?,
        })
    }

    #[getter]
    fn g1(&self) -> Vec<Vec<Complex64>> {
        rows_of(&self.inner.g1)
    }

    #[getter]
    fn g2(&self) -> Vec<Vec<Complex64>> {
        rows_of(&self.inner.g2)
    }

    #[getter]
    fn h_r1(&self) -> Vec<Vec<Complex64>> {
        self.inner.h_r1.iter().map(list_of).collect()
    }

    #[getter]
    fn h_r2(&self) -> Vec<Vec<Complex64>> {
        self.inner.h_r2.iter().map(list_of).collect()
    }

    #[getter]
    fn h_d2(&self) -> Vec<Vec<Complex64>> {
        self.inner.h_d2.iter().map(list_of).collect()
    }

    #[getter]
    fn noise_var(&self) -> (f64, f64) {
        (self.inner.noise_var_1, self.inner.noise_var_2)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn ris_elements(&self) -> usize {
        self.inner.ris_elements()
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.inner.to_bytes()
    }

    /// `(φᴴ Ã₁ φ, φᴴ Ã₂ φ)`: total reflective gain of cell 1 and total
    /// uncontrolled gain of cell 2.
    fn gains(&self, phi: Vec<Complex64>) -> PyResult<(f64, f64)> {
        let eff = EffectiveChannels::from_channels(&self.inner).map_err(to_py)?;
        let phi = point(phi)?;
        if phi.len() != eff.ris_elements() {
            return Err(PyValueError::new_err(format!(
                "phi has {} entries, the RIS has {}",
                phi.len(),
                eff.ris_elements()
            )));
        }
        Ok((eff.reflective_gain(&phi), eff.uncontrolled_gain(&phi)))
    }

    /// `R(λ)` as a list of rows.
    fn balance_matrix(&self, lambda_: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let eff = EffectiveChannels::from_channels(&self.inner).map_err(to_py)?;
        Ok(rows_of(&eff.balance(lambda_).map_err(to_py)?.r))
    }
}

/// Iteration history of an RCG run.
#[pyclass(name = "RcgTrace", get_all, skip_from_py_object)]
struct PyRcgTrace {
    objective_values: Vec<f64>,
    iterations: usize,
    converged_by: &'static str,
    final_grad_norm: f64,
}

impl From<manifold::RcgTrace> for PyRcgTrace {
    fn from(t: manifold::RcgTrace) -> Self {
        Self {
            converged_by: match t.converged_by {
                StopReason::GradNorm => "grad_norm",
                StopReason::ObjDelta => "obj_delta",
                StopReason::MaxIters => "max_iters",
            },
            objective_values: t.objective_values,
            iterations: t.iterations,
            final_grad_norm: t.final_grad_norm,
        }
    }
}

#[pymethods]
impl PyRcgTrace {
    fn __repr__(&self) -> String {
        format!(
            "RcgTrace(iterations={}, converged_by='{}', final_grad_norm={:.3e})",
            self.iterations, self.converged_by, self.final_grad_norm
        )
    }
}

fn rcg_config(m: usize, max_iters: Option<usize>, grad_tol: Option<f64>) -> RcgConfig {
    let mut cfg = RcgConfig::for_dimension(m);
    if let Some(n) = max_iters {
        cfg.max_iters = n;
    }
    if let Some(t) = grad_tol {
        cfg.grad_tol = t;
    }
    cfg
}

/// Minimizes `−φᴴ R φ` over unit-modulus `φ` for a Hermitian `r`.
/// Starts from the rounded principal eigenvector unless `phi0` is given.
#[pyfunction]
#[pyo3(signature = (r, phi0=None, max_iters=None, grad_tol=None))]
fn minimize_quadratic(
    py: Python<'_>,
    r: Vec<Vec<Complex64>>,
    phi0: Option<Vec<Complex64>>,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
) -> PyResult<(Vec<Complex64>, PyRcgTrace)> {
    let bal = BalanceMatrix {
        r: matrix(r)?,
        lambda: 0.0,
    };
    let start = match phi0 {
        Some(p) => point(p)?,
        None => ris_design::warm_start(&bal),
    };
    let cfg = rcg_config(bal.dim(), max_iters, grad_tol);
    let (phi, trace) = py
        .detach(|| ris_design::minimize_balance(&bal, &cfg, &start))
        .map_err(to_py)?;
    Ok((list_of(phi.as_vector()), trace.into()))
}

/// Balanced RIS design for one realization.
#[pyfunction]
#[pyo3(signature = (channels, lambda_, phi0=None, max_iters=None, grad_tol=None))]
fn design_balanced(
    py: Python<'_>,
    channels: &PyChannels,
    lambda_: f64,
    phi0: Option<Vec<Complex64>>,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
) -> PyResult<(Vec<Complex64>, PyRcgTrace)> {
    let start = phi0.map(point).transpose()?;
    let cfg = rcg_config(channels.inner.ris_elements(), max_iters, grad_tol);
    let (phi, trace) = py
        .detach(|| ris_design::design_balanced(&channels.inner, lambda_, &cfg, start.as_ref()))
        .map_err(to_py)?;
    Ok((list_of(phi.as_vector()), trace.into()))
}

/// Tangent-space projection `g − Re(g ⊙ φ*) ⊙ φ`.
#[pyfunction]
fn project_to_tangent(g: Vec<Complex64>, phi: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let t = manifold::project_to_tangent(&vector(g), &point(phi)?).map_err(to_py)?;
    Ok(list_of(t.entries()))
}

/// Elementwise normalization onto the unit circle.
#[pyfunction]
fn retract(x: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let p = manifold::retract_point(&vector(x)).map_err(to_py)?;
    Ok(list_of(p.as_vector()))
}

/// Sum-rates of one drop as `{scheme: (cell1, cell2)}`.
#[pyfunction]
fn run_drop(py: Python<'_>, scenario: &PyScenario, drop_seed: u64) -> PyResult<Py<PyDict>> {
    let out = py.detach(|| sim::run_drop(&scenario.inner, drop_seed)).map_err(to_py)?;
    let dict = PyDict::new(py);
    for s in Scheme::ALL {
        let r = out.get(s);
        dict.set_item(scheme_name(s), (r.r1, r.r2))?;
    }
    Ok(dict.unbind())
}

fn parse_sweep(sweep: &str) -> PyResult<SweepKind> {
    match sweep {
        "txpower" => Ok(SweepKind::TransmitPowerDbm),
        "lambda" => Ok(SweepKind::LambdaDb),
        other => Err(PyValueError::new_err(format!(
            "unknown sweep '{other}', expected 'txpower' or 'lambda'"
        ))),
    }
}

fn sweep_results(
    py: Python<'_>,
    scenario: &PyScenario,
    sweep: &str,
    values: Vec<f64>,
    crn: bool,
    threads: usize,
) -> PyResult<Vec<sim::SweepResult>> {
    let kind = parse_sweep(sweep)?;
    let opts = SweepOptions { crn, threads };
    py.detach(|| sim::run_sweep_with(&scenario.inner, kind, &values, opts))
        .map_err(to_py)
}

/// Monte Carlo sweep; one dict per (value, scheme, cell).
#[pyfunction]
#[pyo3(signature = (scenario, sweep, values, crn=false, threads=0))]
fn run_sweep(
    py: Python<'_>,
    scenario: &PyScenario,
    sweep: &str,
    values: Vec<f64>,
    crn: bool,
    threads: usize,
) -> PyResult<Vec<Py<PyDict>>> {
    let results = sweep_results(py, scenario, sweep, values, crn, threads)?;
    results
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("scheme", r.scheme.as_str())?;
            d.set_item("cell", r.cell.as_str())?;
            d.set_item("sweep_param", r.sweep.as_str())?;
            d.set_item("sweep_value", r.sweep_value)?;
            d.set_item("mean_sum_rate", r.mean_sum_rate)?;
            d.set_item("std_err", r.std_err)?;
            d.set_item("num_drops", r.num_drops)?;
            Ok(d.unbind())
        })
        .collect()
}

/// Same as `run_sweep` but returns the CSV text the command line writes.
#[pyfunction]
#[pyo3(signature = (scenario, sweep, values, crn=false, threads=0))]
fn sweep_csv(
    py: Python<'_>,
    scenario: &PyScenario,
    sweep: &str,
    values: Vec<f64>,
    crn: bool,
    threads: usize,
) -> PyResult<String> {
    let results = sweep_results(py, scenario, sweep, values, crn, threads)?;
    let mut buf = Vec::new();
    sim::write_csv(&results, &mut buf).map_err(|e| PyOSError::new_err(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn risbal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyChannels>()?;
    m.add_class::<PyRcgTrace>()?;
    m.add_function(wrap_pyfunction!(minimize_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(design_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_tangent, m)?)?;
    m.add_function(wrap_pyfunction!(retract, m)?)?;
    m.add_function(wrap_pyfunction!(run_drop, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add("CSV_HEADER", sim::CSV_HEADER)?;
    Ok(())
}
