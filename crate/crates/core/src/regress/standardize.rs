use nalgebra::{DMatrix, DVector};

use crate::linalg::RANK_TOL;

/// Centered response and centered, unit-variance predictors.
///
/// Columns whose sample standard deviation is zero (relative to their
/// magnitude) are dropped; `kept` lists the surviving original columns.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: DVector<f64>,
    pub x_scale: Vec<f64>,
    pub kept: Vec<usize>,
    pub y_mean: f64,
    p: usize,
}

impl Standardized {
    pub fn new(x: &DMatrix<f64>, y: &DVector<f64>) -> Self {
        let (n, p) = x.shape();
        assert_eq!(n, y.len(), "design and response row counts differ");
        let nf = n.max(1) as f64;
        let x_mean = DVector::from_iterator(p, x.column_iter().map(|c| c.sum() / nf));
        let y_mean = if n == 0 { 0.0 } else { y.sum() / nf };
        let mut kept = Vec::new();
        let mut x_scale = Vec::new();
        if n >= 2 {
            for j in 0..p {
                let col = x.column(j);
                let mu = x_mean[j];
                let ss: f64 = col.iter().map(|v| (v - mu).powi(2)).sum();
                let sd = (ss / (n - 1) as f64).sqrt();
                let magnitude = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if sd > RANK_TOL * magnitude && sd > 0.0 {
                    kept.push(j);
                    x_scale.push(sd);
                }
            }
        }
        let xs = DMatrix::from_fn(n, kept.len(), |i, k| {
            let j = kept[k];
            (x[(i, j)] - x_mean[j]) / x_scale[k]
        });
        let ys = y.add_scalar(-y_mean);
        Self {
            x: xs,
            y: ys,
            x_mean,
            x_scale,
            kept,
            y_mean,
            p,
        }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of retained predictors.
    pub fn width(&self) -> usize {
        self.kept.len()
    }

    /// Apply the training transformation to new rows (kept columns only).
    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), self.kept.len(), |i, k| {
            let j = self.kept[k];
            (x[(i, j)] - self.x_mean[j]) / self.x_scale[k]
        })
    }

    /// Map standardized coefficients back to `(intercept, coefficients)` on
    /// the original scale.
    pub fn unstandardize(&self, beta: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut coef = DVector::zeros(self.p);
        let mut intercept = self.y_mean;
        for (k, &j) in self.kept.iter().enumerate() {
            let b = beta[k] / self.x_scale[k];
            coef[j] = b;
            intercept -= b * self.x_mean[j];
        }
        (intercept, coef)
    }

    /// Predictions for new rows from standardized coefficients, one column
    /// per coefficient vector in `betas`.
    pub fn predict_many(&self, x_test: &DMatrix<f64>, betas: &DMatrix<f64>) -> DMatrix<f64> {
        let xt = self.transform(x_test);
        let mut pred = if self.kept.is_empty() {
            DMatrix::zeros(x_test.nrows(), betas.ncols())
        } else {
            xt * betas
        };
        pred.add_scalar_mut(self.y_mean);
        pred
    }
}
