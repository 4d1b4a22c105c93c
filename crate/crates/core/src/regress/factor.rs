use nalgebra::{DMatrix, DVector};

use super::{fit_ols, Method, RegressionFit};
use crate::error::{Error, Result};

/// OLS on the columns listed in `columns`, zero coefficients elsewhere.
pub fn fit_on_columns(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    columns: &[usize],
) -> Result<RegressionFit> {
    let sub = DMatrix::from_fn(x.nrows(), columns.len(), |i, k| x[(i, columns[k])]);
    let inner = fit_ols(&sub, y)?;
    let mut coef = DVector::zeros(x.ncols());
    for (k, &j) in columns.iter().enumerate() {
        coef[j] = inner.coefficients[k];
    }
    Ok(RegressionFit {
        intercept: inner.intercept,
        coefficients: coef,
        residual_variance: inner.residual_variance,
        method: Method::FactorParsimony,
        selection: None,
    })
}

/// Factor-parsimony regression: OLS on the first `k` (factor) columns and
/// exact zeros on the remaining (asset) columns.
pub fn fit_factor_parsimony(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<RegressionFit> {
    if k > x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{k} factor columns requested but design has {}",
            x.ncols()
        )));
    }
    let cols: Vec<usize> = (0..k).collect();
    fit_on_columns(x, y, &cols)
}
