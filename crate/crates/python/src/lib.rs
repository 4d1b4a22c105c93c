//! Python bindings: `import monomvn`.
//!
//! Panels are lists of rows, most recent first, with `None` or NaN for
//! missing cells. Matrices are lists of rows.

use monomvn::evaluate::{ell, kl_mvn, TruthSpec};
use monomvn::monomle::{self, MonomvnConfig, MvnEstimate};
use monomvn::panel::{self, Grid};
use monomvn::portfolio;
use monomvn::regress::{CvRule, CvScheme, CvSpec, Hyperparameter, Method};
use monomvn::simulate::{simulate_trial, SimSpec};
use nalgebra::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(monomvn, MonomvnError, PyException, "Estimation or portfolio failure.");

fn to_py(e: monomvn::Error) -> PyErr {
    use monomvn::Error::*;
    match e {
        Io(io) => PyOSError::new_err(io.to_string()),
        InvalidConfig(_) | Parse { .. } | InconsistentRowWidth { .. } | NonFiniteValue { .. } | EmptyColumn { .. }
        | NonMonotonePattern { .. } | DimensionMismatch(_) => PyValueError::new_err(e.to_string()),
        other => MonomvnError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn square(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let s = matrix(rows)?;
    if s.nrows() != s.ncols() {
        return Err(PyValueError::new_err("covariance must be square"));
    }
    Ok(s)
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cv_spec(cv: &str, folds: usize, rule: Option<&str>, seed: u64) -> PyResult<CvSpec> {
    let scheme = match cv {
        "tenfold" | "kfold" => CvScheme::KFold { folds },
        "loo" => CvScheme::LeaveOneOut,
        other => return Err(PyValueError::new_err(format!("unknown cv scheme {other:?}"))),
    };
    let rule = match rule {
        None => None,
        Some("min") => Some(CvRule::MinimumScore),
        Some("1se") => Some(CvRule::OneStandardError),
        Some(other) => return Err(PyValueError::new_err(format!("unknown cv rule {other:?}"))),
    };
    Ok(CvSpec { scheme, seed, rule })
}

/// Result of `estimate`.
#[pyclass(module = "monomvn", frozen)]
struct Estimate {
    inner: MvnEstimate,
}

#[pymethods]
impl Estimate {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean.iter().copied().collect()
    }

    #[getter]
    fn covariance(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.covariance)
    }

    #[getter]
    fn positive_definite(&self) -> bool {
        self.inner.positive_definite
    }

    #[getter]
    fn factor_block(&self) -> Option<usize> {
        self.inner.factor_block
    }

    /// One dict per column in monotone order.
    #[getter]
    fn method_log<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .method_log
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("label", &r.label)?;
                d.set_item("column", r.column)?;
                d.set_item("position", r.position)?;
                d.set_item("observed", r.observed)?;
                d.set_item("method", r.method.map(Method::name))?;
                if let Some(s) = r.selection {
                    let (name, value) = match s.hyperparameter {
                        Hyperparameter::Lambda(l) => ("lambda", l),
                        Hyperparameter::Components(k) => ("components", k as f64),
                        Hyperparameter::Fraction { fraction, .. } => ("fraction", fraction),
                        Hyperparameter::Steps(k) => ("steps", k as f64),
                    };
                    d.set_item(name, value)?;
                    d.set_item("cv_score", s.cv_score)?;
                }
                Ok(d)
            })
            .collect()
    }

    /// Split off the asset block when `factor_count` factors lead the panel.
    fn asset_block(&self) -> PyResult<Estimate> {
        let k = self.inner.factor_block.unwrap_or(0);
        let split = monomle::extract_asset_block(&self.inner, k).map_err(to_py)?;
        Ok(Estimate { inner: split.assets })
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate(m={}, positive_definite={})",
            self.inner.dim(),
            self.inner.positive_definite
        )
    }
}

fn to_grid(rows: Vec<Vec<Option<f64>>>, labels: Option<Vec<String>>) -> PyResult<Grid> {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|c| c.filter(|v| !v.is_nan())).collect())
        .collect();
    match labels {
        Some(l) => Grid::new(l, rows),
        None => Grid::from_rows(rows),
    }
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (panel, labels=None, method="pcr", p=1.0, cv="tenfold", folds=10, cv_rule=None, seed=0, factor_count=0, mle_denominator=false))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    py: Python<'_>,
    panel: Vec<Vec<Option<f64>>>,
    labels: Option<Vec<String>>,
    method: &str,
    p: f64,
    cv: &str,
    folds: usize,
    cv_rule: Option<&str>,
    seed: u64,
    factor_count: usize,
    mle_denominator: bool,
) -> PyResult<Estimate> {
    let grid = to_grid(panel, labels)?;
    let config = MonomvnConfig {
        method: method.parse().map_err(to_py)?,
        parsimony_p: p,
        cv: cv_spec(cv, folds, cv_rule, seed)?,
        factor_count,
        mle_denominator,
    };
    let inner = py
        .detach(|| {
            let (panel, order) = panel::validate_and_order(&grid)?;
            monomle::estimate(&panel, &order, &config)
        })
        .map_err(to_py)?;
    Ok(Estimate { inner })
}

/// Read a panel CSV into `(labels, rows)`.
#[pyfunction]
fn read_panel(path: &str) -> PyResult<(Vec<String>, Vec<Vec<Option<f64>>>)> {
    let g = panel::read_panel(path).map_err(to_py)?;
    Ok((g.labels().to_vec(), g.rows()))
}

/// Random parameters plus a monotone panel; returns a dict.
#[pyfunction]
#[pyo3(signature = (m, n, seed=0, dist="mvn", nu=None))]
fn simulate<'py>(py: Python<'py>, m: usize, n: usize, seed: u64, dist: &str, nu: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = SimSpec::new(m, n, seed);
    match dist {
        "mvn" => {}
        "mvt" => spec = spec.mvt(nu),
        other => return Err(PyValueError::new_err(format!("unknown distribution {other:?}"))),
    }
    spec.validate().map_err(to_py)?;
    let t = simulate_trial(&spec).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("labels", t.panel.labels().to_vec())?;
    d.set_item("mu", t.mu.iter().copied().collect::<Vec<_>>())?;
    d.set_item("sigma", rows_of(&t.sigma))?;
    d.set_item("nu", t.nu)?;
    d.set_item("full", rows_of(&t.full))?;
    d.set_item("panel", t.panel.rows())?;
    Ok(d)
}

/// Score `(mu, sigma)` against a true MVN or MVt distribution.
#[pyfunction]
#[pyo3(signature = (mu, sigma, true_mu, true_sigma, nu=None, mc_draws=10_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn evaluate<'py>(
    py: Python<'py>,
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    true_mu: Vec<f64>,
    true_sigma: Vec<Vec<f64>>,
    nu: Option<f64>,
    mc_draws: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let m = mu.len();
    let labels = (1..=m).map(|j| format!("V{j}")).collect();
    let q = MvnEstimate::new(labels, DVector::from_vec(mu), square(&sigma)?);
    let base = TruthSpec::mvn(DVector::from_vec(true_mu), square(&true_sigma)?);
    let mut truth = match nu {
        Some(v) => TruthSpec::mvt(base.mu, base.sigma, v),
        None => base,
    };
    truth.mc_draws = mc_draws;
    truth.seed = seed;
    let score = ell(&q, &truth).map_err(to_py)?;
    let kl = if nu.is_none() && q.positive_definite {
        Some(kl_mvn(&q, &truth).map_err(to_py)?)
    } else {
        None
    };
    let d = PyDict::new(py);
    d.set_item("kl", kl)?;
    d.set_item("ell", score.value)?;
    d.set_item("ell_se", score.std_error)?;
    d.set_item("positive_definite", q.positive_definite)?;
    Ok(d)
}

/// Minimum-variance weights summing to one.
#[pyfunction]
#[pyo3(signature = (sigma, no_short=true))]
fn min_variance(sigma: Vec<Vec<f64>>, no_short: bool) -> PyResult<Vec<f64>> {
    let s = square(&sigma)?;
    Ok(portfolio::min_variance(&s, no_short).map_err(to_py)?.weights)
}

/// Module initializer; public so tests can embed it.
#[pymodule]
#[pyo3(name = "monomvn")]
pub fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MonomvnError", m.py().get_type::<MonomvnError>())?;
    m.add_class::<Estimate>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(read_panel, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(min_variance, m)?)?;
    m.add("METHODS", Method::ALL.iter().map(|x| x.name()).collect::<Vec<_>>())?;
    Ok(())
}
