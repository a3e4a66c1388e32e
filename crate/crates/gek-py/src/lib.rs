//! Python bindings: ensemble specs, finite-N and limit kernels, check
//! utilities and the sampler.

use gek_core::finite_n::{self as fin, Beta};
use gek_core::limits as lim;
use gek_core::quad::QuadratureSpec;
use gek_core::sampler;
use gek_core::specfun;
use gek_core::{Complex64 as C64, GekError};
use pyo3::exceptions::{PyArithmeticError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: GekError) -> PyErr {
    match e {
        GekError::Domain(_) | GekError::Structure(_) | GekError::Usage(_) | GekError::Capacity(_) => PyValueError::new_err(e.to_string()),
        GekError::Range(_) => PyOverflowError::new_err(e.to_string()),
        GekError::Convergence(_) => PyArithmeticError::new_err(e.to_string()),
        GekError::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn beta(b: u32) -> PyResult<Beta> {
    Beta::from_index(b).map_err(to_py)
}

fn quad(rtol: Option<f64>) -> PyResult<QuadratureSpec> {
    let mut q = QuadratureSpec::from_env().map_err(to_py)?;
    if let Some(r) = rtol {
        q.rel_tol = r;
        q.validate().map_err(to_py)?;
    }
    Ok(q)
}

/// Ensemble parameters; `n` counts complex eigenvalues.
#[pyclass(name = "EnsembleSpec", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyEnsembleSpec {
    inner: fin::EnsembleSpec,
}

#[pymethods]
impl PyEnsembleSpec {
    #[new]
    fn new(beta_index: u32, n: usize, tau: f64) -> PyResult<Self> {
        Ok(Self { inner: fin::EnsembleSpec::new(beta(beta_index)?, n, tau).map_err(to_py)? })
    }

    /// Spec with `tau = 1 - sigma^2 n^(-1/3)`.
    #[staticmethod]
    fn weak(beta_index: u32, n: usize, sigma: f64) -> PyResult<Self> {
        Ok(Self { inner: fin::EnsembleSpec::weak(beta(beta_index)?, n, sigma).map_err(to_py)? })
    }

    #[getter]
    fn beta(&self) -> u32 {
        self.inner.beta.index()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    fn edge(&self) -> f64 {
        self.inner.edge()
    }

    fn edge_point(&self, zm: C64) -> C64 {
        self.inner.edge_point(zm)
    }

    fn __repr__(&self) -> String {
        format!("EnsembleSpec(beta={}, n={}, tau={})", self.inner.beta.index(), self.inner.n, self.inner.tau)
    }
}

/// Finite-N kernel of the spec's β: `K_N` for β = 2, 4 and the pre-kernel for β = 1.
#[pyfunction]
fn kernel(spec: PyEnsembleSpec, z1: C64, z2: C64) -> PyResult<C64> {
    let s = &spec.inner;
    match s.beta {
        Beta::Two => fin::kernel_b2(z1, z2, s),
        Beta::Four => fin::kernel_b4(z1, z2, s),
        Beta::One => fin::prekernel_b1(z1, z2, s),
    }
    .map_err(to_py)
}

/// Finite-N density; for β = 1 `real` selects the real-eigenvalue density.
#[pyfunction]
#[pyo3(signature = (spec, z, real = false))]
fn density(spec: PyEnsembleSpec, z: C64, real: bool) -> PyResult<f64> {
    let s = &spec.inner;
    match (s.beta, real) {
        (Beta::Two, false) => fin::density_b2(z, s),
        (Beta::Four, false) => fin::density_b4(z, s),
        (Beta::One, false) => fin::density_b1_complex(z, s),
        (Beta::One, true) => fin::density_b1_real(z.re, s),
        _ => Err(GekError::Usage("real density exists only for beta = 1".into())),
    }
    .map_err(to_py)
}

#[pyfunction]
fn g_real_b1(spec: PyEnsembleSpec, z1: C64, x2: f64) -> PyResult<C64> {
    fin::g_real_b1(z1, x2, &spec.inner).map_err(to_py)
}

#[pyfunction]
fn i_j(x: f64, tau: f64, j: usize) -> PyResult<f64> {
    fin::i_j(x, tau, j).map_err(to_py)
}

/// k-point correlation function at finite N.
#[pyfunction]
fn correlation(spec: PyEnsembleSpec, points: Vec<C64>) -> PyResult<f64> {
    fin::correlations(&points, &spec.inner).map_err(to_py)
}

/// Interpolating edge kernel: `K_Ai` for β = 2, 4 and the pre-kernel for β = 1.
#[pyfunction]
#[pyo3(signature = (beta_index, z1, z2, sigma, rtol = None))]
fn kernel_ai(beta_index: u32, z1: C64, z2: C64, sigma: f64, rtol: Option<f64>) -> PyResult<C64> {
    let q = quad(rtol)?;
    match beta(beta_index)? {
        Beta::Two => lim::kernel_ai_b2(z1, z2, sigma, &q),
        Beta::Four => lim::kernel_ai_b4(z1, z2, sigma, &q),
        Beta::One => lim::prekernel_ai_b1(z1, z2, sigma, &q),
    }
    .map_err(to_py)
}

/// Interpolating edge density at microscopic `z`.
#[pyfunction]
#[pyo3(signature = (beta_index, z, sigma, real = false, rtol = None))]
fn density_ai(beta_index: u32, z: C64, sigma: f64, real: bool, rtol: Option<f64>) -> PyResult<f64> {
    let q = quad(rtol)?;
    match (beta(beta_index)?, real) {
        (Beta::Two, false) => lim::density_ai_b2(z, sigma, &q),
        (Beta::Four, false) => lim::density_ai_b4(z, sigma, &q),
        (Beta::One, false) => lim::density_ai_b1_complex(z, sigma, &q),
        (Beta::One, true) => lim::density_ai_b1_real(z.re, sigma, &q),
        _ => Err(GekError::Usage("real density exists only for beta = 1".into())),
    }
    .map_err(to_py)
}

#[pyfunction]
fn hermitian_airy_kernel(x1: f64, x2: f64) -> PyResult<f64> {
    lim::hermitian_airy_kernel(x1, x2).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (beta_index, z1, z2, rtol = None))]
fn strong_edge_kernel(beta_index: u32, z1: C64, z2: C64, rtol: Option<f64>) -> PyResult<C64> {
    let q = quad(rtol)?;
    match beta(beta_index)? {
        Beta::Two => lim::strong_edge_kernel_b2(z1, z2),
        Beta::Four => lim::strong_edge_kernel_b4(z1, z2, &q),
        Beta::One => lim::strong_edge_prekernel_b1(z1, z2),
    }
    .map_err(to_py)
}

#[pyfunction]
fn airy_ai(z: C64) -> PyResult<C64> {
    specfun::airy_ai(z).map_err(to_py)
}

/// Pfaffian of an antisymmetric matrix given as a list of rows.
#[pyfunction]
fn pfaffian(rows: Vec<Vec<C64>>) -> PyResult<C64> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("pfaffian needs a square matrix"));
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    specfun::pfaffian(&m).map_err(to_py)
}

/// Eigenvalues of `trials` independent draws, one list per trial.
#[pyfunction]
#[pyo3(signature = (spec, trials, seed = 0))]
fn sample_eigenvalues(py: Python<'_>, spec: PyEnsembleSpec, trials: u64, seed: u64) -> PyResult<Vec<Vec<C64>>> {
    let batch = py.detach(|| sampler::SampleBatch::generate(&spec.inner, seed, trials)).map_err(to_py)?;
    Ok(batch.eigenvalues)
}

/// Gumbel fit of the largest real part; returns `(location, scale, ks, p_value)`.
#[pyfunction]
#[pyo3(signature = (spec, trials, seed = 0))]
fn gumbel_experiment(py: Python<'_>, spec: PyEnsembleSpec, trials: u64, seed: u64) -> PyResult<(f64, f64, f64, f64)> {
    let r = py.detach(|| sampler::gumbel_experiment(&spec.inner, trials, seed)).map_err(to_py)?;
    Ok((r.location, r.scale, r.ks_statistic, r.p_value))
}

#[pymodule]
pub fn gek(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsembleSpec>()?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(g_real_b1, m)?)?;
    m.add_function(wrap_pyfunction!(i_j, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_ai, m)?)?;
    m.add_function(wrap_pyfunction!(density_ai, m)?)?;
    m.add_function(wrap_pyfunction!(hermitian_airy_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(strong_edge_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(airy_ai, m)?)?;
    m.add_function(wrap_pyfunction!(pfaffian, m)?)?;
    m.add_function(wrap_pyfunction!(sample_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(gumbel_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
