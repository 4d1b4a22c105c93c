use nalgebra::{DMatrix, DVector};

use super::{Method, RegressionFit, Standardized};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, symmetrize};

/// Multi-response OLS fit: one column of coefficients per response.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFit {
    pub intercepts: DVector<f64>,
    /// `p × q`
    pub coefficients: DMatrix<f64>,
    /// Residual cross-products over `n - 1`, `q × q`.
    pub residual_covariance: DMatrix<f64>,
}

/// Solve the centered, standardized least-squares system for every column
/// of `y`, failing when the intercept-augmented design is rank deficient.
fn solve(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, p) = x.shape();
    let q = y.ncols();
    if p == 0 {
        let means = DVector::from_iterator(q, y.column_iter().map(|c| c.mean()));
        return Ok((means, DMatrix::zeros(0, q)));
    }
    let deficient = |rank| Error::RankDeficient { rows: n, cols: p, rank };
    if n <= p {
        return Err(deficient(n.saturating_sub(1)));
    }
    let s = Standardized::new(x, &DVector::zeros(n));
    if s.width() < p {
        return Err(deficient(s.width()));
    }
    let svd = s.x.clone().svd(true, true);
    let rank = numerical_rank(&svd.singular_values);
    if rank < p {
        return Err(deficient(rank));
    }
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let mut intercepts = DVector::zeros(q);
    let mut coef = DMatrix::zeros(p, q);
    for r in 0..q {
        let yc = y.column(r).add_scalar(-y.column(r).mean());
        let mut g = u.transpose() * &yc;
        for (gi, d) in g.iter_mut().zip(svd.singular_values.iter()) {
            *gi /= d;
        }
        let beta_s = vt.transpose() * g;
        // s was built with a zero response, so its intercept omits the mean
        let (b0, b) = s.unstandardize(&beta_s);
        intercepts[r] = b0 + y.column(r).mean();
        coef.set_column(r, &b);
    }
    Ok((intercepts, coef))
}

/// Ordinary least squares with an intercept.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<RegressionFit> {
    let ym = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    let (b0, b) = solve(x, &ym)?;
    let coef = b.column(0).into_owned();
    let coef = if coef.is_empty() { DVector::zeros(x.ncols()) } else { coef };
    Ok(RegressionFit::from_coefficients(b0[0], coef, x, y, Method::Ols))
}

/// OLS of several responses on one design, with the joint residual covariance.
pub fn fit_ols_multi(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<MultiFit> {
    let (b0, b) = solve(x, y)?;
    let b = if b.nrows() == 0 { DMatrix::zeros(x.ncols(), y.ncols()) } else { b };
    let mut resid = y - x * &b;
    for (mut col, c) in resid.column_iter_mut().zip(b0.iter()) {
        col.add_scalar_mut(-c);
    }
    let denom = (y.nrows().saturating_sub(1)).max(1) as f64;
    let mut v = resid.transpose() * &resid / denom;
    symmetrize(&mut v);
    Ok(MultiFit {
        intercepts: b0,
        coefficients: b,
        residual_covariance: v,
    })
}
