//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

/// Column means of `x`.
pub fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows().max(1) as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n))
}

/// Sample covariance of the rows of `x` with the given denominator.
pub fn covariance(x: &DMatrix<f64>, denominator: f64) -> DMatrix<f64> {
    let mean = column_means(x);
    let mut centered = x.clone();
    for (mut col, mu) in centered.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-mu);
    }
    let mut cov = centered.transpose() * &centered / denominator;
    symmetrize(&mut cov);
    cov
}

pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Smallest squared Cholesky pivot relative to its diagonal entry below
/// which a matrix is treated as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// True when a Cholesky factorization succeeds and every squared pivot
/// exceeds `PIVOT_TOL` times the matching diagonal entry, so matrices that
/// are singular up to roundoff are rejected.
pub fn is_positive_definite(a: &DMatrix<f64>) -> bool {
    if a.nrows() != a.ncols() || a.iter().any(|v| !v.is_finite()) {
        return false;
    }
    match a.clone().cholesky() {
        Some(ch) => ch
            .l_dirty()
            .diagonal()
            .iter()
            .zip(a.diagonal().iter())
            .all(|(&d, &ajj)| d > 0.0 && d * d > PIVOT_TOL * ajj),
        None => false,
    }
}

/// Number of singular values above `RANK_TOL` times the largest.
pub fn numerical_rank(singular_values: &DVector<f64>) -> usize {
    let max = singular_values.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > RANK_TOL * max).count()
}

/// Log-determinant and inverse of a symmetric positive definite matrix.
pub fn spd_logdet_inverse(a: &DMatrix<f64>) -> Option<(f64, DMatrix<f64>)> {
    if !is_positive_definite(a) {
        return None;
    }
    let ch = a.clone().cholesky()?;
    let logdet = 2.0 * ch.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Some((logdet, ch.inverse()))
}

pub fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}
