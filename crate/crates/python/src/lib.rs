//! Python bindings. Dense matrices cross the boundary as row-major lists of
//! lists; reports come back as dicts.

use osnap::matio::{read_matrix_market as read_mm, write_matrix_market as write_mm};
use osnap::solvers::{LeverageOptions, LowRankOptions, RegressionOptions};
use osnap::verify::VerificationReport;
use osnap::{DenseMatrix, Matrix, Operand, ParamConstants, SketchKind, SketchParams, SketchSpec};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(osnap_py, NumericalError, PyArithmeticError);

fn to_py(e: osnap::Error) -> PyErr {
    match e {
        osnap::Error::Io(io) => PyIOError::new_err(io.to_string()),
        e if e.is_numerical() => NumericalError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<SketchKind> {
    kind.parse::<SketchKind>().map_err(to_py)
}

fn dense(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(to_py)
}

fn report_dict<'py>(py: Python<'py>, report: &VerificationReport) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?
        .call_method1("loads", (report.to_json_line(),))
}

#[pyclass(name = "KWiseHash", module = "osnap_py", frozen)]
struct PyKWiseHash {
    inner: osnap::KWiseHash,
}

#[pymethods]
impl PyKWiseHash {
    /// Degree-(k-1) random polynomial over a prime field covering `domain`,
    /// reduced into `range`.
    #[new]
    fn new(k: usize, domain: u64, range: u64, seed: u64) -> PyResult<Self> {
        let inner = osnap::KWiseHash::new(k, domain, range, seed).map_err(to_py)?;
        Ok(PyKWiseHash { inner })
    }

    fn eval(&self, x: u64) -> PyResult<u64> {
        if x >= self.inner.domain() {
            return Err(PyIndexError::new_err(format!(
                "{x} outside the hash domain"
            )));
        }
        Ok(self.inner.eval(x))
    }

    fn eval_sign(&self, x: u64) -> PyResult<f64> {
        if x >= self.inner.domain() {
            return Err(PyIndexError::new_err(format!(
                "{x} outside the hash domain"
            )));
        }
        Ok(self.inner.eval_sign(x))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn prime(&self) -> u64 {
        self.inner.prime()
    }

    #[getter]
    fn coefficients(&self) -> Vec<u64> {
        self.inner.coefficients().to_vec()
    }
}

#[pyclass(name = "Sketch", module = "osnap_py", frozen)]
struct PySketch {
    inner: osnap::Sketch,
}

#[pymethods]
impl PySketch {
    #[new]
    #[pyo3(signature = (kind, m, n, s, seed=0, independence_k=None))]
    fn new(
        kind: &str,
        m: usize,
        n: usize,
        s: usize,
        seed: u64,
        independence_k: Option<usize>,
    ) -> PyResult<Self> {
        let kind = parse_kind(kind)?;
        let default_k = if kind == SketchKind::Tz { 2 } else { 4 };
        let spec = SketchSpec {
            kind,
            m,
            n,
            s,
            independence_k: independence_k.unwrap_or(default_k),
            seed,
        };
        let inner = osnap::Sketch::new(spec).map_err(to_py)?;
        Ok(PySketch { inner })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.spec().kind.to_string()
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.spec().s
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.spec().seed
    }

    /// `(row, value)` pairs of column `j`, sorted by row.
    fn column_nonzeros(&self, j: usize) -> PyResult<Vec<(usize, f64)>> {
        if j >= self.inner.cols() {
            return Err(PyIndexError::new_err(format!("column {j} out of range")));
        }
        Ok(self.inner.column_nonzeros(j))
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.inner.to_dense().to_rows()
    }

    /// `Π A` for a dense row-major `A`.
    fn apply(&self, py: Python<'_>, a: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let a = dense(a)?;
        let out = py.detach(|| self.inner.apply_dense(&a)).map_err(to_py)?;
        Ok(out.to_rows())
    }

    /// `Π A` for `A` given as `(row, col, value)` triplets of an `n x d` matrix.
    fn apply_sparse(
        &self,
        py: Python<'_>,
        d: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let a =
            osnap::SparseMatrixCSC::from_triplets(self.inner.cols(), d, triplets).map_err(to_py)?;
        let out = py.detach(|| self.inner.apply_sparse(&a)).map_err(to_py)?;
        Ok(out.to_rows())
    }

    fn __repr__(&self) -> String {
        let s = self.inner.spec();
        format!(
            "Sketch(kind='{}', m={}, n={}, s={}, seed={})",
            s.kind, s.m, s.n, s.s, s.seed
        )
    }
}

/// Running `Π A` under entry updates `A[i, j] += v`.
#[pyclass(name = "SketchState", module = "osnap_py")]
struct PySketchState {
    inner: osnap::SketchState,
}

#[pymethods]
impl PySketchState {
    #[new]
    fn new(sketch: &PySketch, d: usize) -> Self {
        PySketchState {
            inner: osnap::SketchState::new(sketch.inner.clone(), d),
        }
    }

    fn update(&mut self, i: usize, j: usize, v: f64) -> PyResult<()> {
        self.inner.update(i, j, v).map_err(to_py)
    }

    fn sa(&self) -> Vec<Vec<f64>> {
        self.inner.sa().to_rows()
    }
}

#[pyfunction]
#[pyo3(signature = (d, eps, delta=1.0/3.0, kind="tz", c_m=1.0, c_s=1.0, gamma=1.0))]
#[allow(clippy::too_many_arguments)]
fn recommend_params<'py>(
    py: Python<'py>,
    d: usize,
    eps: f64,
    delta: f64,
    kind: &str,
    c_m: f64,
    c_s: f64,
    gamma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let constants = ParamConstants { c_m, c_s, gamma };
    let p = osnap::recommend_params(d, eps, delta, parse_kind(kind)?, &constants).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("kind", p.kind.to_string())?;
    out.set_item("m", p.m)?;
    out.set_item("s", p.s)?;
    out.set_item("independence_k", p.independence_k)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (a, b, eps, delta=1.0/3.0, kind="tz", seed=0, repeats=1))]
#[allow(clippy::too_many_arguments)]
fn sketched_regression<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    eps: f64,
    delta: f64,
    kind: &str,
    seed: u64,
    repeats: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let a = dense(a)?;
    let b = DenseMatrix::column_vector(b).map_err(to_py)?;
    let mut opts = RegressionOptions::new(eps, delta, parse_kind(kind)?, seed);
    opts.repeats = repeats;
    let res = py
        .detach(|| osnap::solvers::sketched_regression(&a, &b, &opts))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("x", res.x.data().to_vec())?;
    out.set_item("residual", res.residual)?;
    out.set_item("sketched_residual", res.sketched_residual)?;
    out.set_item("m", res.sketch_spec_used.m)?;
    out.set_item("s", res.sketch_spec_used.s)?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (a, eps, delta=1.0/3.0, seed=0))]
fn approx_leverage_scores(
    py: Python<'_>,
    a: Vec<Vec<f64>>,
    eps: f64,
    delta: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let a = dense(a)?;
    let opts = LeverageOptions::new(eps, delta, seed);
    let res = py
        .detach(|| osnap::solvers::approx_leverage_scores(&a, &opts))
        .map_err(to_py)?;
    Ok(res.scores)
}

#[pyfunction]
#[pyo3(signature = (a, k, eps, seed=0, sketch_rows=None))]
fn low_rank_approx<'py>(
    py: Python<'py>,
    a: Vec<Vec<f64>>,
    k: usize,
    eps: f64,
    seed: u64,
    sketch_rows: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let a = dense(a)?;
    let mut opts = LowRankOptions::new(k, eps, seed);
    opts.sketch_rows = sketch_rows;
    let res = py
        .detach(|| osnap::solvers::low_rank_approx(&a, &opts))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("u", res.u.to_rows())?;
    out.set_item("sigma", res.sigma.clone())?;
    out.set_item("v", res.v.to_rows())?;
    out.set_item("error_frobenius", res.error_frobenius)?;
    out.set_item("m", res.sketch_spec_used.m)?;
    Ok(out)
}

/// Reads a Matrix Market file into a dense row-major list of lists.
#[pyfunction]
fn read_matrix_market(path: &str) -> PyResult<Vec<Vec<f64>>> {
    Ok(read_mm(path).map_err(to_py)?.to_dense().to_rows())
}

/// Writes a dense matrix; `sparse=True` uses coordinate format.
#[pyfunction]
#[pyo3(signature = (path, a, sparse=false))]
fn write_matrix_market(path: &str, a: Vec<Vec<f64>>, sparse: bool) -> PyResult<()> {
    let a = dense(a)?;
    let m = if sparse {
        Matrix::Sparse(osnap::SparseMatrixCSC::from_dense(&a))
    } else {
        Matrix::Dense(a)
    };
    write_mm(&m, path).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (kind, m, s, n, d, eps, trials, seed0=0, independence_k=None))]
#[allow(clippy::too_many_arguments)]
fn embedding_success_rate<'py>(
    py: Python<'py>,
    kind: &str,
    m: usize,
    s: usize,
    n: usize,
    d: usize,
    eps: f64,
    trials: usize,
    seed0: u64,
    independence_k: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = parse_kind(kind)?;
    let family = SketchParams {
        kind,
        m,
        s,
        independence_k: independence_k.unwrap_or(if kind == SketchKind::Tz { 2 } else { 4 }),
    };
    let r = py
        .detach(|| osnap::verify::embedding_success_rate(&family, n, d, eps, trials, seed0))
        .map_err(to_py)?;
    report_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (n, d, m, trials, seed0=0))]
fn frobenius_moment_check<'py>(
    py: Python<'py>,
    n: usize,
    d: usize,
    m: usize,
    trials: usize,
    seed0: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = py
        .detach(|| osnap::verify::frobenius_moment_check(n, d, m, trials, seed0))
        .map_err(to_py)?;
    report_dict(py, &r)
}

#[pyfunction]
fn hash_independence_exhaustive<'py>(
    py: Python<'py>,
    k: usize,
    p: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = osnap::verify::hash_independence_exhaustive(k, p).map_err(to_py)?;
    report_dict(py, &r)
}

#[pyfunction]
fn random_orthonormal(n: usize, d: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    Ok(osnap::verify::random_orthonormal(n, d, seed)
        .map_err(to_py)?
        .to_rows())
}

#[pyfunction]
fn singular_values(a: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let a = dense(a)?;
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    Ok(osnap::densela::singular_values(&a))
}

#[pymodule]
fn osnap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyKWiseHash>()?;
    m.add_class::<PySketch>()?;
    m.add_class::<PySketchState>()?;
    m.add_function(wrap_pyfunction!(recommend_params, m)?)?;
    m.add_function(wrap_pyfunction!(sketched_regression, m)?)?;
    m.add_function(wrap_pyfunction!(approx_leverage_scores, m)?)?;
    m.add_function(wrap_pyfunction!(low_rank_approx, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix_market, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_success_rate, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_moment_check, m)?)?;
    m.add_function(wrap_pyfunction!(hash_independence_exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(random_orthonormal, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    Ok(())
}
