//! Python bindings: configuration, cases, time integration, diagnostics
//! and tableaus. Arrays cross the boundary as plain lists.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rigidlid as rl;
use rl::boundary::InterfaceExchange;
use rl::config::{parse_config, ResolvedConfig, RunConfig};
use rl::convergence::{space_study, time_study, ConvergenceRow};
use rl::coupling::{step, CoupledState};
use rl::diagnostics::{conservation_sample, courant_numbers, l2_error_coupled};
use rl::numflux::roe_flux_raw;
use rl::run::integrate;
use rl::state::{checked_primitive, ConservedField};
use rl::tableau::{tableau as lookup_tableau, NAMES};

fn to_py(e: rl::Error) -> PyErr {
    match e {
        rl::Error::Config(_) | rl::Error::Parameter(_) | rl::Error::Range(_) | rl::Error::Mismatch(_) => PyValueError::new_err(e.to_string()),
        rl::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Resolved run configuration.
#[pyclass(name = "Config", module = "rigidlid", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ResolvedConfig,
}

#[pymethods]
impl PyConfig {
    /// Parses TOML text; `overrides` are "section.key=value" strings.
    #[staticmethod]
    #[pyo3(signature = (text, overrides = Vec::new()))]
    fn from_toml(text: &str, overrides: Vec<String>) -> PyResult<Self> {
        let inner = RunConfig::from_toml_str_with(text, &overrides).and_then(|c| c.resolve()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, overrides = Vec::new()))]
    fn from_file(path: PathBuf, overrides: Vec<String>) -> PyResult<Self> {
        let (cfg, _) = parse_config(&path, &overrides).map_err(to_py)?;
        Ok(Self { inner: cfg.resolve().map_err(to_py)? })
    }

    /// Fully resolved configuration as TOML.
    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_run_config().to_toml_string().map_err(to_py)
    }

    #[getter]
    fn case(&self) -> &'static str {
        self.inner.case.name()
    }

    #[getter]
    fn method(&self) -> PyResult<String> {
        self.inner.method_name().map_err(to_py)
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.coupling.dt
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }

    /// (nx, nz1, nz2); nz2 is 0 for single-domain cases.
    #[getter]
    fn grid(&self) -> (usize, usize, usize) {
        let g = self.inner.grid;
        (g.nx, g.nz1, g.nz2)
    }

    /// Initial state of the configured case.
    fn initial_state(&self) -> PyResult<PyState> {
        Ok(PyState { inner: self.inner.case.init(self.inner.grid).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid;
        format!("Config(case={:?}, method={:?}, grid=({}, {}, {}), dt={}, t_end={})", self.inner.case.name(), self.method().unwrap_or_default(), g.nx, g.nz1, g.nz2, self.inner.coupling.dt, self.inner.t_end)
    }
}

fn field_dict<'py>(py: Python<'py>, f: &ConservedField) -> PyResult<Bound<'py, PyDict>> {
    let n = f.grid.cell_count();
    let mut cols: [Vec<f64>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
    let g = f.params.gamma;
    for j in 0..f.grid.nz {
        for i in 0..f.grid.nx {
            let (x, z) = f.grid.center0(i, j);
            let (rho, u, w, p) = checked_primitive(&f.cell(f.grid.idx0(i, j)), g).map_err(to_py)?;
            for (c, v) in cols.iter_mut().zip([x, z, rho, u, w, p, g * p / rho]) {
                c.push(v);
            }
        }
    }
    let d = PyDict::new(py);
    d.set_item("nx", f.grid.nx)?;
    d.set_item("nz", f.grid.nz)?;
    for (name, c) in ["x", "z", "rho", "u", "w", "p", "T"].iter().zip(cols) {
        d.set_item(*name, c)?;
    }
    Ok(d)
}

/// Two-domain state; domain 1 lies below the interface.
#[pyclass(name = "State", module = "rigidlid", from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: CoupledState,
}

impl PyState {
    fn domain(&self, d: u8) -> PyResult<&ConservedField> {
        match d {
            1 => Ok(&self.inner.q1),
            2 => self.inner.q2.as_ref().ok_or_else(|| PyValueError::new_err("single-domain state has no domain 2")),
            _ => Err(PyValueError::new_err(format!("domain must be 1 or 2, got {d}"))),
        }
    }
}

#[pymethods]
impl PyState {
    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn coupled(&self) -> bool {
        self.inner.q2.is_some()
    }

    /// Primitive fields of one domain as lists in storage order
    /// (x fastest), plus cell centers.
    #[pyo3(signature = (domain = 1))]
    fn field<'py>(&self, py: Python<'py>, domain: u8) -> PyResult<Bound<'py, PyDict>> {
        field_dict(py, self.domain(domain)?)
    }

    /// Conserved variables (rho, rho u, rho w, rho E) interleaved per cell.
    #[pyo3(signature = (domain = 1))]
    fn conserved(&self, domain: u8) -> PyResult<Vec<f64>> {
        Ok(self.domain(domain)?.data.clone())
    }

    /// (mass1, mass2, total energy).
    fn totals(&self) -> (f64, f64, f64) {
        let s = conservation_sample(&self.inner);
        (s.mass1, s.mass2, s.energy)
    }

    /// Courant numbers (Cr1, Cr2) for the given steps.
    #[pyo3(signature = (dt1, dt2 = None))]
    fn courant(&self, dt1: f64, dt2: Option<f64>) -> PyResult<(f64, f64)> {
        courant_numbers(&self.inner, dt1, dt2.unwrap_or(dt1)).map_err(to_py)
    }

    /// Interface exchange: per-column stress, heat flux and wall states.
    fn interface<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let q2 = self.domain(2)?;
        let ex = InterfaceExchange::compute(&self.inner.q1, q2).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("sigma_xz", ex.sigma_xz)?;
        d.set_item("pi_z", ex.pi_z)?;
        d.set_item("wall_u_1", ex.wall_u_1)?;
        d.set_item("wall_t_1", ex.wall_t_1)?;
        d.set_item("wall_u_2", ex.wall_u_2)?;
        d.set_item("wall_t_2", ex.wall_t_2)?;
        Ok(d)
    }

    /// L2 errors (rho, momentum, energy) against `reference`.
    fn l2_error(&self, reference: &PyState) -> PyResult<(f64, f64, f64)> {
        let e = l2_error_coupled(&self.inner, &reference.inner).map_err(to_py)?;
        Ok((e.rho, e.momentum, e.energy))
    }

    fn __repr__(&self) -> String {
        let g1 = self.inner.q1.grid;
        match &self.inner.q2 {
            Some(q2) => format!("State(t={}, domain1={}x{}, domain2={}x{})", self.inner.time, g1.nx, g1.nz, q2.grid.nx, q2.grid.nz),
            None => format!("State(t={}, domain1={}x{})", self.inner.time, g1.nx, g1.nz),
        }
    }
}

/// Advances `state` by one step of the configured method.
#[pyfunction]
#[pyo3(signature = (config, state, dt = None))]
fn advance(config: &PyConfig, state: &PyState, dt: Option<f64>) -> PyResult<PyState> {
    let c = &config.inner;
    let tab = lookup_tableau(&c.coupling.scheme).map_err(to_py)?;
    let sys = c.case.system(c.grid, c.coupling.operator, c.coupling.krylov_tol, c.coupling.gmres()).map_err(to_py)?;
    let (next, _) = step(&sys, &state.inner, &c.coupling, &tab, dt.unwrap_or(c.coupling.dt)).map_err(to_py)?;
    Ok(PyState { inner: next })
}

/// Runs the configured case to its end time. Returns (state, diagnostics)
/// with one dict per diagnostics row.
#[pyfunction]
#[pyo3(signature = (config, state = None))]
fn run<'py>(py: Python<'py>, config: &PyConfig, state: Option<&PyState>) -> PyResult<(PyState, Vec<Bound<'py, PyDict>>)> {
    let c = config.inner.clone();
    let init = match state {
        Some(s) => s.inner.clone(),
        None => c.case.init(c.grid).map_err(to_py)?,
    };
    let out = py
        .detach(move || -> rl::Result<_> {
            let tab = lookup_tableau(&c.coupling.scheme)?;
            let sys = c.case.system(c.grid, c.coupling.operator, c.coupling.krylov_tol, c.coupling.gmres())?;
            let t_end = init.time + c.t_end;
            integrate(&sys, init, &c.coupling, &tab, t_end, |_, _| Ok(()))
        })
        .map_err(to_py)?;
    let mut rows = Vec::with_capacity(out.rows.len());
    for r in &out.rows {
        let d = PyDict::new(py);
        d.set_item("step", r.step)?;
        d.set_item("time", r.time)?;
        d.set_item("mass1", r.mass1)?;
        d.set_item("mass2", r.mass2)?;
        d.set_item("mass_loss", r.mass_loss)?;
        d.set_item("energy_loss", r.energy_loss)?;
        d.set_item("cr1", r.cr1)?;
        d.set_item("cr2", r.cr2)?;
        rows.push(d);
    }
    Ok((PyState { inner: out.state }, rows))
}

fn rows_to_py<'py>(py: Python<'py>, rows: &[ConvergenceRow]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("method", &r.method)?;
            d.set_item("h", r.h)?;
            d.set_item("dt", r.dt)?;
            d.set_item("cr", r.cr)?;
            d.set_item("error", (r.error.rho, r.error.momentum, r.error.energy))?;
            d.set_item("orders", r.orders.map(|o| (o[0], o[1], o[2])))?;
            Ok(d)
        })
        .collect()
}

/// Convergence study along "space" or "time" over `levels` refinements.
#[pyfunction]
#[pyo3(signature = (config, levels, axis = "space"))]
fn converge<'py>(py: Python<'py>, config: &PyConfig, levels: usize, axis: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let c = config.inner.clone();
    let rows = match axis {
        "space" => py.detach(move || space_study(&c, levels)),
        "time" => py.detach(move || time_study(&c, levels)),
        other => return Err(PyValueError::new_err(format!("axis must be 'space' or 'time', got {other:?}"))),
    }
    .map_err(to_py)?;
    rows_to_py(py, &rows)
}

#[pyfunction]
fn tableau_names() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Coefficients of a registered scheme (validated on lookup).
#[pyfunction]
fn tableau<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyDict>> {
    let t = lookup_tableau(name).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("name", &t.name)?;
    d.set_item("stages", t.s)?;
    d.set_item("order", t.order)?;
    d.set_item("dense_order", t.dense_order)?;
    d.set_item("explicit", t.is_explicit())?;
    d.set_item("a", &t.a)?;
    d.set_item("b", &t.b)?;
    d.set_item("c", &t.c)?;
    d.set_item("a_tilde", &t.a_tilde)?;
    d.set_item("b_tilde", &t.b_tilde)?;
    d.set_item("bstar", &t.bstar)?;
    Ok(d)
}

/// Roe flux between conserved states `ql` and `qr` across a face with
/// unit normal `normal`.
#[pyfunction]
#[pyo3(signature = (ql, qr, normal, gamma = 1.4))]
fn roe_flux(ql: [f64; 4], qr: [f64; 4], normal: [f64; 2], gamma: f64) -> [f64; 4] {
    roe_flux_raw(&ql, &qr, normal, gamma)
}

/// Default configuration of each named case.
#[pyfunction]
fn case_defaults() -> PyResult<HashMap<&'static str, PyConfig>> {
    rl::cases::CASE_NAMES
        .iter()
        .map(|n| Ok((*n, PyConfig::from_toml(&format!("[case]\nname = \"{n}\"\n"), Vec::new())?)))
        .collect()
}

#[pymodule]
#[pyo3(name = "rigidlid")]
fn rigidlid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(advance, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(converge, m)?)?;
    m.add_function(wrap_pyfunction!(tableau_names, m)?)?;
    m.add_function(wrap_pyfunction!(tableau, m)?)?;
    m.add_function(wrap_pyfunction!(roe_flux, m)?)?;
    m.add_function(wrap_pyfunction!(case_defaults, m)?)?;
    Ok(())
}
