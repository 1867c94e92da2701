//! Python module `epmodes`: mode solvers, per-mode diagnostics and sweeps.

// The pyfunction macro expansion converts `PyErr` into itself.
#![allow(clippy::useless_conversion)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use epmodes::circstats::{extract_phases, resultant as circ_resultant, WeightedPhaseSet};
use epmodes::entropy::{
    chi_squared as pmf_chi_squared, renyi as pmf_renyi, shannon as pmf_shannon, EntropyConfig, HistogramPMF,
    DEFAULT_ALPHAS, DEFAULT_BINS, DEFAULT_K_MAX,
};
use epmodes::io::{parse_config, read_mode_file, render_sweep_csv, write_mode_file, CsvOptions, ModeFile};
use epmodes::linalg::{ComplexVector, C64};
use epmodes::models::{
    assemble_helmholtz, build_ellipse_grid, solve_cavity_modes, two_level_modes as tl_modes, CavitySpec, Mode,
    Provenance, Support, TwoLevelParams,
};
use epmodes::nonorth::{petermann as nonorth_petermann, rigidity_report};
use epmodes::sweep::{diagnose, run_sweep as core_run_sweep, AnalysisConfig, ModeDiagnostics, SweepRecord};
use epmodes::circstats::DEFAULT_NODE_CUTOFF;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An eigenmode with its complex eigenvalue.
#[pyclass(name = "Mode", module = "epmodes", frozen)]
struct PyMode {
    inner: Mode,
}

#[pymethods]
impl PyMode {
    /// Wavenumber for cavities, energy for the two-level model.
    #[getter]
    fn eigenvalue(&self) -> C64 {
        self.inner.eigen_k
    }

    #[getter]
    fn values(&self) -> Vec<C64> {
        self.inner.values.as_slice().to_vec()
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.inner.provenance.as_str()
    }

    #[getter]
    fn degenerate(&self) -> bool {
        self.inner.degenerate
    }

    /// `(x, y)` of each amplitude, or `None` for the two-level model.
    #[getter]
    fn coords(&self) -> Option<Vec<(f64, f64)>> {
        self.inner.geometry().map(|g| g.coords.clone())
    }

    #[getter]
    fn grid_step(&self) -> Option<f64> {
        self.inner.geometry().map(|g| g.h)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Signed phase rigidity `sum psi^2 / sum |psi|^2`.
    fn rigidity(&self) -> C64 {
        rigidity_report(&self.inner, None).r_complex
    }

    /// Petermann factor, `inf` at self-orthogonality.
    fn petermann(&self) -> f64 {
        rigidity_report(&self.inner, None).petermann.to_f64()
    }

    /// Mean resultant length of the `k`-th harmonic of the phases.
    #[pyo3(signature = (k, node_cutoff = DEFAULT_NODE_CUTOFF))]
    fn resultant(&self, k: u32, node_cutoff: f64) -> PyResult<(f64, f64)> {
        let s = extract_phases(&self.inner, node_cutoff).map_err(value_err)?;
        let r = circ_resultant(&s, k);
        Ok((r.r, r.mu))
    }

    /// Every diagnostic of the mode as a dict.
    #[pyo3(signature = (n_bins = DEFAULT_BINS, k_max = DEFAULT_K_MAX, alphas = None, node_cutoff = DEFAULT_NODE_CUTOFF))]
    fn diagnostics<'py>(
        &self,
        py: Python<'py>,
        n_bins: usize,
        k_max: usize,
        alphas: Option<Vec<f64>>,
        node_cutoff: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = AnalysisConfig {
            entropy: EntropyConfig {
                n_bins,
                k_max,
                alphas: alphas.unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
                ..EntropyConfig::default()
            },
            node_cutoff,
            delta_nu_st: None,
        };
        if cfg.entropy.n_bins < 2 || cfg.entropy.k_max < 1 || cfg.entropy.alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(PyValueError::new_err("n_bins >= 2, k_max >= 1 and positive alphas are required"));
        }
        let d = diagnose(&self.inner, &cfg).map_err(PyValueError::new_err)?;
        diagnostics_dict(py, &d)
    }

    /// Writes the mode as a text mode file.
    #[pyo3(signature = (path, parameter))]
    fn save(&self, path: std::path::PathBuf, parameter: f64) -> PyResult<()> {
        write_mode_file(&ModeFile { parameter, mode: self.inner.clone() }, &path)
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let k = self.inner.eigen_k;
        format!("Mode({}, eigenvalue={}{:+}j, n={})", self.inner.provenance.as_str(), k.re, k.im, self.inner.len())
    }
}

fn diagnostics_dict<'py>(py: Python<'py>, d: &ModeDiagnostics) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new_bound(py);
    out.set_item("eigenvalue", d.eigenvalue)?;
    out.set_item("r1", d.r1)?;
    out.set_item("lobe_imbalance", d.lobe_imbalance)?;
    out.set_item("r2", d.r2)?;
    out.set_item("rigidity_abs", d.rigidity_abs)?;
    out.set_item("petermann", d.petermann.to_f64())?;
    out.set_item("s_folded", d.s_folded)?;
    out.set_item("s_folded_diff", d.s_folded_differential)?;
    out.set_item("s_unfolded", d.s_unfolded)?;
    out.set_item("s_value", d.s_value)?;
    out.set_item("uncertainty_sum", d.uncertainty_sum)?;
    out.set_item("bound_gap", d.bound_gap)?;
    out.set_item("renyi", d.renyi.clone())?;
    out.set_item("chi_squared", d.chi_squared)?;
    out.set_item("delta_l2", d.delta_l2)?;
    out.set_item("degenerate_alignment", d.degenerate_alignment)?;
    Ok(out)
}

fn wrap(modes: impl IntoIterator<Item = Mode>) -> Vec<PyMode> {
    modes.into_iter().map(|inner| PyMode { inner }).collect()
}

/// Both eigenmodes of the two-level Hamiltonian, `lambda_+` first.
#[pyfunction]
#[pyo3(signature = (delta, g = 1.0, gamma = 2.0))]
fn two_level_modes(delta: f64, g: f64, gamma: f64) -> PyResult<Vec<PyMode>> {
    tl_modes(&TwoLevelParams::new(delta, g, gamma)).map(wrap).map_err(value_err)
}

/// The `m` elliptic-cavity modes whose wavenumbers lie nearest `k_target`.
/// An absorbing strip is added when `cap_strength` is given.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (epsilon, k_target, m = 2, h = 0.02, mean_radius = 1.0, cap_strength = None, cap_width = 0.2))]
fn solve_cavity(
    py: Python<'_>,
    epsilon: f64,
    k_target: f64,
    m: usize,
    h: f64,
    mean_radius: f64,
    cap_strength: Option<f64>,
    cap_width: f64,
) -> PyResult<Vec<PyMode>> {
    let spec = match cap_strength {
        Some(eta) => CavitySpec::open(epsilon, mean_radius, h, eta, cap_width),
        None => CavitySpec::closed(epsilon, mean_radius, h),
    };
    py.allow_threads(|| {
        let g = Arc::new(build_ellipse_grid(&spec).map_err(|e| e.to_string())?);
        let op = assemble_helmholtz(&g, &spec);
        solve_cavity_modes(&op, &g, k_target, m).map_err(|e| e.to_string())
    })
    .map(wrap)
    .map_err(PyValueError::new_err)
}

/// A mode built from raw amplitudes (two-level support).
#[pyfunction]
fn mode_from_values(values: Vec<C64>) -> PyResult<PyMode> {
    let values = ComplexVector::new(values).map_err(value_err)?;
    Ok(PyMode {
        inner: Mode {
            support: Support::TwoLevel,
            values,
            eigen_k: C64::default(),
            provenance: Provenance::TwoLevel,
            degenerate: false,
        },
    })
}

/// Reads a mode file; returns `(parameter, mode)`.
#[pyfunction]
fn load_mode(path: std::path::PathBuf) -> PyResult<(f64, PyMode)> {
    let f = read_mode_file(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok((f.parameter, PyMode { inner: f.mode }))
}

fn pmf(probs: Vec<f64>) -> PyResult<HistogramPMF> {
    HistogramPMF::new(probs).map_err(value_err)
}

#[pyfunction]
fn shannon(probs: Vec<f64>) -> PyResult<f64> {
    Ok(pmf_shannon(&pmf(probs)?))
}

#[pyfunction]
fn renyi(probs: Vec<f64>, alpha: f64) -> PyResult<f64> {
    if !(alpha > 0.0) {
        return Err(PyValueError::new_err("alpha must be positive"));
    }
    Ok(pmf_renyi(&pmf(probs)?, alpha))
}

#[pyfunction]
fn chi_squared(probs: Vec<f64>) -> PyResult<f64> {
    Ok(pmf_chi_squared(&pmf(probs)?))
}

/// `(R_k, mu_k)` of weighted phases.
#[pyfunction]
fn resultant(phases: Vec<f64>, weights: Vec<f64>, k: u32) -> PyResult<(f64, f64)> {
    let s = WeightedPhaseSet::new(phases, weights).map_err(value_err)?;
    let r = circ_resultant(&s, k);
    Ok((r.r, r.mu))
}

#[pyfunction]
fn petermann(r_abs: f64) -> f64 {
    nonorth_petermann(r_abs).to_f64()
}

fn sweep_records(py: Python<'_>, config: &str) -> PyResult<(String, Vec<SweepRecord>)> {
    let cfg = parse_config(config).map_err(value_err)?;
    let name = cfg.sweep.model.parameter_name().to_string();
    let recs = py.allow_threads(|| core_run_sweep(&cfg.sweep)).map_err(value_err)?;
    Ok((name, recs))
}

/// Runs the sweep described by configuration text. Returns one dict per
/// grid point with keys `param`, `error`, `ambiguous` and `modes`.
#[pyfunction]
fn run_sweep<'py>(py: Python<'py>, config: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let (_, recs) = sweep_records(py, config)?;
    recs.iter()
        .map(|r| {
            let row = PyDict::new_bound(py);
            row.set_item("param", r.param)?;
            row.set_item("error", r.error.clone())?;
            row.set_item("ambiguous", r.tracking_ambiguous)?;
            let modes = r.modes.iter().map(|d| diagnostics_dict(py, d)).collect::<PyResult<Vec<_>>>()?;
            row.set_item("modes", modes)?;
            Ok(row)
        })
        .collect()
}

/// Runs a sweep and returns the CSV table text, without a timestamp line.
#[pyfunction]
fn sweep_csv(py: Python<'_>, config: &str) -> PyResult<String> {
    let (name, recs) = sweep_records(py, config)?;
    render_sweep_csv(&recs, &CsvOptions::new(&name)).map_err(value_err)
}

#[pymodule]
#[pyo3(name = "epmodes")]
fn epmodes_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMode>()?;
    m.add_function(wrap_pyfunction!(two_level_modes, m)?)?;
    m.add_function(wrap_pyfunction!(solve_cavity, m)?)?;
    m.add_function(wrap_pyfunction!(mode_from_values, m)?)?;
    m.add_function(wrap_pyfunction!(load_mode, m)?)?;
    m.add_function(wrap_pyfunction!(shannon, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(chi_squared, m)?)?;
    m.add_function(wrap_pyfunction!(resultant, m)?)?;
    m.add_function(wrap_pyfunction!(petermann, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    Ok(())
}
