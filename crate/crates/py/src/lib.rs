//! Python module `qais`: grids, circuits, target distributions, QAIS
//! estimates, VEGAS and training.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qais_core::estimator::{qais_estimate_pmf, MixtureConfig};
use qais_core::target::{build_target_pmf, by_name, LtdForm, PentagonKinematics, TargetOptions};
use qais_core::tiling::{fuzz_check, gap_tiles, FuzzConfig};
use qais_core::train::{train_qcbm, Optimizer, TrainConfig};
use qais_core::vegas::{vegas_integrate, VegasConfig};

fn err(e: qais_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "GridSpec", frozen)]
struct PyGridSpec(qais_core::GridSpec);

#[pymethods]
impl PyGridSpec {
    #[new]
    #[pyo3(signature = (qubits, lower=None, upper=None))]
    fn new(qubits: Vec<u32>, lower: Option<Vec<f64>>, upper: Option<Vec<f64>>) -> PyResult<Self> {
        let d = qubits.len();
        qais_core::GridSpec::new(qubits, lower.unwrap_or(vec![0.0; d]), upper.unwrap_or(vec![1.0; d]))
            .map(PyGridSpec)
            .map_err(err)
    }

    #[getter]
    fn dims(&self) -> usize {
        self.0.dims()
    }

    #[getter]
    fn qubits(&self) -> Vec<u32> {
        self.0.qubits().to_vec()
    }

    #[getter]
    fn num_cells(&self) -> u64 {
        self.0.num_cells()
    }

    fn coords(&self, linear: u64) -> PyResult<Vec<u64>> {
        self.0.linear_to_coords(linear).map_err(err)
    }

    fn linear(&self, coords: Vec<u64>) -> PyResult<u64> {
        self.0.coords_to_linear(&coords).map_err(err)
    }

    fn cell_bounds(&self, linear: u64) -> PyResult<Vec<(f64, f64)>> {
        let c = self.0.linear_to_coords(linear).map_err(err)?;
        self.0.cell_bounds(&c).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("GridSpec(qubits={:?}, lower={:?}, upper={:?})", self.0.qubits(), self.0.lower(), self.0.upper())
    }
}

#[pyclass(name = "Integrand", frozen)]
struct PyIntegrand(qais_core::Integrand);

#[pymethods]
impl PyIntegrand {
    /// Built-in integrand by name. `kinematics` is a pentagon TOML file.
    #[new]
    #[pyo3(signature = (name, dims=2, kinematics=None, divided_difference=false))]
    fn new(name: &str, dims: usize, kinematics: Option<std::path::PathBuf>, divided_difference: bool) -> PyResult<Self> {
        let kin = kinematics.map(|p| PentagonKinematics::read(&p)).transpose().map_err(err)?;
        let form = if divided_difference { LtdForm::DividedDifference } else { LtdForm::Residue };
        by_name(name, dims, kin.as_ref(), form).map(PyIntegrand).map_err(err)
    }

    #[getter]
    fn dims(&self) -> usize {
        self.0.dims()
    }

    #[getter]
    fn domain(&self) -> Vec<(f64, f64)> {
        self.0.domain().to_vec()
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.0.dims() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.0.dims())));
        }
        Ok(self.0.eval(&x))
    }

    fn __repr__(&self) -> String {
        format!("Integrand({:?})", self.0.label())
    }
}

#[pyclass(name = "EstimateResult", frozen, get_all)]
struct PyEstimate {
    estimate: f64,
    std: f64,
    shots: u64,
    states: usize,
    hilbert_fraction: f64,
}

#[pyclass(name = "VegasResult", frozen, get_all)]
struct PyVegas {
    estimates: Vec<f64>,
    sigmas: Vec<f64>,
    combined: f64,
    combined_sigma: f64,
    best_iteration: usize,
}

#[pyclass(name = "TrainReport", frozen, get_all)]
struct PyTrain {
    params: Vec<f64>,
    final_kl: f64,
    history: Vec<f64>,
}

/// Probabilities of the ansatz state, e.g. `run_ansatz("EZ,U3", 4, params)`.
#[pyfunction]
fn run_ansatz(layers: &str, n: u32, params: Vec<f64>) -> PyResult<Vec<f64>> {
    let spec = qais_core::AnsatzSpec::parse(layers).map_err(err)?;
    Ok(qais_core::run_ansatz(&spec, n, &params).map_err(err)?.probabilities())
}

#[pyfunction]
fn num_params(layers: &str, n: u32) -> PyResult<usize> {
    Ok(qais_core::AnsatzSpec::parse(layers).map_err(err)?.num_params(n))
}

/// Normalized cell-averaged `|f|` over the grid.
#[pyfunction]
#[pyo3(signature = (grid, f, samples_per_cell=1, seed=0))]
fn target_pmf(grid: &PyGridSpec, f: &PyIntegrand, samples_per_cell: usize, seed: u64) -> PyResult<Vec<f64>> {
    let opts = TargetOptions { samples_per_cell, seed, use_abs: true, ..Default::default() };
    Ok(build_target_pmf(&grid.0, &f.0, &opts).map_err(err)?.probabilities().to_vec())
}

#[pyfunction]
#[pyo3(signature = (grid, f, proposal, shots, beta=0.0, seed=0))]
fn qais_estimate(py: Python<'_>, grid: &PyGridSpec, f: &PyIntegrand, proposal: Vec<f64>, shots: u64, beta: f64, seed: u64) -> PyResult<PyEstimate> {
    let mix = MixtureConfig::new(beta).map_err(err)?;
    let r = py
        .detach(|| qais_estimate_pmf(&grid.0, &f.0, &proposal, shots, mix, seed))
        .map_err(err)?;
    Ok(PyEstimate {
        estimate: r.estimate,
        std: r.std,
        shots: r.shots,
        states: r.states,
        hilbert_fraction: r.hilbert_fraction,
    })
}

#[pyfunction]
#[pyo3(signature = (f, samples=100_000, iterations=10, bins=50, alpha=1.5, seed=0))]
fn vegas(py: Python<'_>, f: &PyIntegrand, samples: usize, iterations: usize, bins: usize, alpha: f64, seed: u64) -> PyResult<PyVegas> {
    let cfg = VegasConfig {
        bins,
        samples_per_iteration: samples,
        iterations,
        alpha,
        seed,
        keep_final_samples: false,
    };
    let r = py.detach(|| vegas_integrate(&f.0, &cfg)).map_err(err)?;
    Ok(PyVegas {
        estimates: r.iterations.iter().map(|i| i.estimate).collect(),
        sigmas: r.iterations.iter().map(|i| i.sigma).collect(),
        combined: r.combined,
        combined_sigma: r.combined_sigma,
        best_iteration: r.best_iteration,
    })
}

/// Fits the ansatz to `target_pmf(grid, f)`.
#[pyfunction]
#[pyo3(signature = (grid, f, layers="EZ,U3,EX,U3", optimizer="cobyla", max_iterations=5000, seed=0, samples_per_cell=1))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    grid: &PyGridSpec,
    f: &PyIntegrand,
    layers: &str,
    optimizer: &str,
    max_iterations: usize,
    seed: u64,
    samples_per_cell: usize,
) -> PyResult<PyTrain> {
    let ansatz = qais_core::AnsatzSpec::parse(layers).map_err(err)?;
    let optimizer: Optimizer = optimizer.parse().map_err(err)?;
    let cfg = TrainConfig { optimizer, max_iterations, seed, ..Default::default() };
    let opts = TargetOptions { samples_per_cell, seed, use_abs: true, ..Default::default() };
    let r = py
        .detach(|| {
            let target = build_target_pmf(&grid.0, &f.0, &opts)?;
            train_qcbm(&ansatz, grid.0.total_qubits(), &target, &cfg)
        })
        .map_err(err)?;
    Ok(PyTrain {
        params: r.best_params.0,
        final_kl: r.final_kl,
        history: r.history.iter().map(|h| h.1).collect(),
    })
}

#[pyfunction]
fn kl_divergence(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    qais_core::train::kl_divergence(&p, &q).map_err(err)
}

/// Runs the tiling fuzz suite; returns the number of failing trials.
#[pyfunction]
#[pyo3(signature = (trials=1000, seed=0))]
fn tile_check(py: Python<'_>, trials: usize, seed: u64) -> usize {
    let cfg = FuzzConfig { trials, seed, ..Default::default() };
    py.detach(|| fuzz_check(&cfg, gap_tiles)).failures.len()
}

#[pymodule]
fn qais(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyIntegrand>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyVegas>()?;
    m.add_class::<PyTrain>()?;
    m.add_function(wrap_pyfunction!(run_ansatz, m)?)?;
    m.add_function(wrap_pyfunction!(num_params, m)?)?;
    m.add_function(wrap_pyfunction!(target_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(qais_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(vegas, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(tile_check, m)?)?;
    m.add("P11_REFERENCE", qais_core::target::P11_REFERENCE)?;
    Ok(())
}
