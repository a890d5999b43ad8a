//! Python bindings for `gtd-core`.
//!
//! Vectors cross the boundary as plain lists of floats in column-major
//! order; tensors keep their shape alongside.

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use gtd_core::linops::materialize;
use gtd_core::solver::{EIG_MAX_ITER, EIG_TOL};
use gtd_core::{
    admm_mm_solve, bcd_solve, init_params, pg_solve, Blur, DenseOperator, DenseTensor, Downsample, GtdError, Identity,
    LinearOperator, LossKind, Mask, Matrix, ModelKind, Ranks, TdParams,
};

fn to_py(e: GtdError) -> PyErr {
    match e {
        GtdError::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
        GtdError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn loss_kind(name: &str) -> PyResult<LossKind> {
    name.parse().map_err(to_py)
}

/// Dense tensor with column-major storage.
#[pyclass(name = "Tensor", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTensor {
    inner: DenseTensor,
}

#[pymethods]
impl PyTensor {
    #[new]
    fn new(shape: Vec<usize>, data: Vec<f64>) -> PyResult<Self> {
        Ok(PyTensor { inner: DenseTensor::new(shape, data).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyTensor { inner: DenseTensor::from_text(text).map_err(to_py)? })
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn get(&self, index: Vec<usize>) -> PyResult<f64> {
        if index.len() != self.inner.order() || index.iter().zip(self.inner.shape()).any(|(i, j)| i >= j) {
            return Err(PyValueError::new_err(format!("index {index:?} out of range")));
        }
        Ok(self.inner.get(&index))
    }

    /// Mode-`mode` unfolding as `(rows, cols, column-major data)`.
    fn unfold(&self, mode: usize) -> PyResult<(usize, usize, Vec<f64>)> {
        let m = self.inner.unfold(mode).map_err(to_py)?;
        Ok((m.rows(), m.cols(), m.data().to_vec()))
    }

    fn norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Tensor(shape={:?})", self.inner.shape())
    }
}

/// Observation operator. Build one with the static constructors.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    inner: Box<dyn LinearOperator>,
}

fn operator(op: impl LinearOperator + 'static) -> PyOperator {
    PyOperator { inner: Box::new(op) }
}

fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> PyResult<Matrix> {
    Matrix::from_col_major(rows, cols, data).map_err(to_py)
}

#[pymethods]
impl PyOperator {
    #[staticmethod]
    fn identity(n: usize) -> Self {
        operator(Identity::new(n))
    }

    /// Keeps the listed entries.
    #[staticmethod]
    fn mask(n: usize, kept: Vec<usize>) -> PyResult<Self> {
        Ok(operator(Mask::new(n, kept).map_err(to_py)?))
    }

    /// Keeps `round(fraction * n)` entries chosen by `seed`.
    #[staticmethod]
    #[pyo3(signature = (n, fraction, seed=0))]
    fn random_mask(n: usize, fraction: f64, seed: u64) -> PyResult<Self> {
        Ok(operator(Mask::random(n, fraction, seed).map_err(to_py)?))
    }

    /// Zero-padded 2-D convolution of every channel with a column-major kernel.
    #[staticmethod]
    fn blur(shape: Vec<usize>, kernel_rows: usize, kernel_cols: usize, kernel: Vec<f64>) -> PyResult<Self> {
        let k = matrix(kernel_rows, kernel_cols, kernel)?;
        Ok(operator(Blur::new(shape, k).map_err(to_py)?))
    }

    #[staticmethod]
    #[pyo3(signature = (shape, size=5, sigma=1.0))]
    fn gaussian_blur(shape: Vec<usize>, size: usize, sigma: f64) -> PyResult<Self> {
        let k = Blur::gaussian_kernel(size, sigma).map_err(to_py)?;
        Ok(operator(Blur::new(shape, k).map_err(to_py)?))
    }

    #[staticmethod]
    fn downsample(shape: Vec<usize>, factor: usize) -> PyResult<Self> {
        Ok(operator(Downsample::new(shape, factor).map_err(to_py)?))
    }

    /// Explicit `rows × cols` matrix in column-major order.
    #[staticmethod]
    fn dense(rows: usize, cols: usize, data: Vec<f64>) -> PyResult<Self> {
        Ok(operator(DenseOperator::new(matrix(rows, cols, data)?)))
    }

    #[getter]
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }

    #[getter]
    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward(&x).map_err(to_py)
    }

    fn adjoint(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.adjoint(&u).map_err(to_py)
    }

    fn gram(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.gram(&x).map_err(to_py)
    }

    /// Dense matrix as `(rows, cols, column-major data)`.
    fn materialize(&self) -> (usize, usize, Vec<f64>) {
        let m = materialize(self.inner.as_ref());
        (m.rows(), m.cols(), m.data().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Operator({}, {} -> {})", self.inner.name(), self.inner.in_dim(), self.inner.out_dim())
    }
}

/// Model kind, target shape, ranks and initialisation seed.
///
/// For `cp` a single rank may be given; Tucker takes one rank per mode, TT
/// the internal bond ranks and TR one bond rank per mode.
#[pyclass(name = "ModelSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelSpec {
    inner: gtd_core::ModelSpec,
}

#[pymethods]
impl PyModelSpec {
    #[new]
    #[pyo3(signature = (kind, shape, ranks, seed=0))]
    fn new(kind: &str, shape: Vec<usize>, ranks: Vec<usize>, seed: u64) -> PyResult<Self> {
        let kind: ModelKind = kind.parse().map_err(to_py)?;
        let ranks = match (kind, ranks.as_slice()) {
            (ModelKind::Cp, [r]) => Ranks::Scalar(*r),
            _ => Ranks::PerMode(ranks),
        };
        Ok(PyModelSpec { inner: gtd_core::ModelSpec::new(kind, shape, ranks, seed).map_err(to_py)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape.clone()
    }

    fn __repr__(&self) -> String {
        format!("ModelSpec({}, shape={:?}, ranks={:?})", self.inner.kind.as_str(), self.inner.shape, self.inner.ranks)
    }
}

/// Fitted model parameters.
#[pyclass(name = "Params", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: TdParams,
}

#[pymethods]
impl PyParams {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyParams { inner: TdParams::from_text(text).map_err(to_py)? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().as_str()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape()
    }

    /// Sum of squared parameter entries.
    fn penalty(&self) -> f64 {
        self.inner.penalty()
    }

    fn reconstruct(&self) -> PyResult<PyTensor> {
        reconstruct(self)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

#[pyclass(name = "SolverConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: gtd_core::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (loss="l2", alpha=0.0, beta=1.0, lambda_=None, sweeps=1, max_iter=1000, tol=1e-8, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        loss: &str,
        alpha: f64,
        beta: f64,
        lambda_: Option<f64>,
        sweeps: usize,
        max_iter: usize,
        tol: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let inner = gtd_core::SolverConfig {
            loss: loss_kind(loss)?,
            alpha,
            beta,
            lambda_override: lambda_,
            sweeps_per_iter: sweeps,
            max_iter,
            tol,
            seed,
        };
        inner.validate().map_err(to_py)?;
        Ok(PySolverConfig { inner })
    }

    #[getter]
    fn loss(&self) -> &'static str {
        self.inner.loss.as_str()
    }

    #[getter]
    fn max_iter(&self) -> usize {
        self.inner.max_iter
    }
}

/// Result of a solver run.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    objectives: Vec<f64>,
    #[pyo3(get)]
    lambda_: f64,
    #[pyo3(get)]
    converged: bool,
    params: TdParams,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn params(&self) -> PyParams {
        PyParams { inner: self.params.clone() }
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.objectives.len()
    }
}

fn solution(s: gtd_core::Solution) -> PySolution {
    PySolution { objectives: s.trace.objectives(), x: s.x, lambda_: s.lambda, converged: s.converged, params: s.params }
}

#[pyfunction]
fn admm_mm(b: Vec<f64>, op: &PyOperator, spec: &PyModelSpec, config: &PySolverConfig) -> PyResult<PySolution> {
    admm_mm_solve(&b, op.inner.as_ref(), &spec.inner, &config.inner).map(solution).map_err(to_py)
}

#[pyfunction]
fn pg(b: Vec<f64>, op: &PyOperator, spec: &PyModelSpec, config: &PySolverConfig, mu: f64) -> PyResult<PySolution> {
    pg_solve(&b, op.inner.as_ref(), &spec.inner, &config.inner, mu).map(solution).map_err(to_py)
}

#[pyfunction]
fn bcd(b: Vec<f64>, op: &PyOperator, spec: &PyModelSpec, config: &PySolverConfig, mu: f64) -> PyResult<PySolution> {
    bcd_solve(&b, op.inner.as_ref(), &spec.inner, &config.inner, mu).map(solution).map_err(to_py)
}

#[pyfunction]
fn eval_loss(loss: &str, b: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    gtd_core::eval_loss(loss_kind(loss)?, &b, &y).map_err(to_py)
}

#[pyfunction]
fn y_update(loss: &str, b: Vec<f64>, d: Vec<f64>, beta: f64) -> PyResult<Vec<f64>> {
    gtd_core::y_update(loss_kind(loss)?, &b, &d, beta).map_err(to_py)
}

#[pyfunction]
fn loss_gradient(loss: &str, b: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    gtd_core::loss_gradient(loss_kind(loss)?, &b, &y).map_err(to_py)
}

/// Safety-scaled bound on the largest eigenvalue of `AᵀA`.
#[pyfunction]
#[pyo3(signature = (op, seed=0))]
fn max_eigenvalue(op: &PyOperator, seed: u64) -> PyResult<f64> {
    gtd_core::max_eigenvalue(op.inner.as_ref(), EIG_TOL, EIG_MAX_ITER, seed).map(|b| b.lambda).map_err(to_py)
}

#[pyfunction]
fn init(spec: &PyModelSpec) -> PyResult<PyParams> {
    Ok(PyParams { inner: init_params(&spec.inner).map_err(to_py)? })
}

#[pyfunction]
fn reconstruct(params: &PyParams) -> PyResult<PyTensor> {
    Ok(PyTensor { inner: gtd_core::reconstruct(&params.inner).map_err(to_py)? })
}

#[pymodule]
fn gtd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyModelSpec>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(admm_mm, m)?)?;
    m.add_function(wrap_pyfunction!(pg, m)?)?;
    m.add_function(wrap_pyfunction!(bcd, m)?)?;
    m.add_function(wrap_pyfunction!(eval_loss, m)?)?;
    m.add_function(wrap_pyfunction!(y_update, m)?)?;
    m.add_function(wrap_pyfunction!(loss_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(max_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(init, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
