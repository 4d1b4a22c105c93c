use nalgebra::{DMatrix, DVector};

use super::{
    cross_validate, CvSpec, Hyperparameter, Method, PathModel, RegressionFit, Selection,
    Standardized,
};

const GRID_POINTS: usize = 100;

/// Log-spaced penalties from `1e4·g` down to `1e-4·g`, where `g` is the mean
/// diagonal of the standardized Gram matrix (largest penalty first).
pub fn ridge_lambda_grid(n: usize) -> Vec<f64> {
    let g = n.saturating_sub(1).max(1) as f64;
    let (lo, hi) = ((1e-4 * g).ln(), (1e4 * g).ln());
    (0..GRID_POINTS)
        .map(|i| (hi - (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Standardized ridge coefficients for each penalty, one column per penalty.
fn ridge_betas(s: &Standardized, lambdas: &[f64]) -> DMatrix<f64> {
    let w = s.width();
    if w == 0 || s.n() < 2 {
        return DMatrix::zeros(w, lambdas.len());
    }
    let svd = s.x.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let uty = u.transpose() * &s.y;
    let dmax = svd.singular_values.amax();
    let mut out = DMatrix::zeros(w, lambdas.len());
    for (k, &lambda) in lambdas.iter().enumerate() {
        let shrunk = DVector::from_iterator(
            uty.len(),
            svd.singular_values.iter().zip(uty.iter()).map(|(&d, &g)| {
                if d <= crate::linalg::RANK_TOL * dmax {
                    0.0
                } else {
                    g * d / (d * d + lambda)
                }
            }),
        );
        out.set_column(k, &(vt.transpose() * shrunk));
    }
    out
}

struct RidgePath {
    lambdas: Vec<f64>,
}

impl PathModel for RidgePath {
    fn grid_len(&self) -> usize {
        self.lambdas.len()
    }

    fn predict_path(
        &self,
        x_train: &DMatrix<f64>,
        y_train: &DVector<f64>,
        x_test: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let s = Standardized::new(x_train, y_train);
        s.predict_many(x_test, &ridge_betas(&s, &self.lambdas))
    }
}

/// Ridge regression at a fixed penalty on the standardized scale.
/// `lambda = 0` gives the minimum-norm least-squares solution.
pub fn fit_ridge_at(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> RegressionFit {
    let s = Standardized::new(x, y);
    let beta = ridge_betas(&s, &[lambda]).column(0).into_owned();
    let (b0, b) = s.unstandardize(&beta);
    RegressionFit::from_coefficients(b0, b, x, y, Method::Ridge)
}

/// Ridge regression with the penalty chosen by cross-validation.
pub fn fit_ridge(x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> RegressionFit {
    let n = y.len();
    if n < 2 || Standardized::new(x, y).width() == 0 {
        return RegressionFit::intercept_only(y, x.ncols(), Method::Ridge);
    }
    let path = RidgePath {
        lambdas: ridge_lambda_grid(n),
    };
    let rule = cv.rule.unwrap_or(Method::Ridge.default_rule());
    let out = cross_validate(&path, x, y, cv, rule);
    let lambda = path.lambdas[out.chosen];
    let mut fit = fit_ridge_at(x, y, lambda);
    fit.selection = Some(Selection {
        hyperparameter: Hyperparameter::Lambda(lambda),
        cv_score: out.curve[out.chosen],
    });
    fit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::testutil::{randn, randv};
    use crate::regress::{fit_ols, CvRule};

    #[test]
    fn zero_penalty_is_ols() {
        let x = randn(40, 5, 11);
        let y = randv(40, 12);
        let r = fit_ridge_at(&x, &y, 0.0);
        let o = fit_ols(&x, &y).unwrap();
        assert!((r.coefficients - o.coefficients).amax() < 1e-8);
        assert!((r.intercept - o.intercept).abs() < 1e-8);
    }

    #[test]
    fn orthonormal_design_shrinks_uniformly() {
        // centered orthonormal columns: Q from a QR of centered noise
        let n = 30;
        let mut z = randn(n, 3, 13);
        for mut c in z.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let q = z.qr().q();
        let y = randv(n, 14);
        let ols = q.transpose() * y.add_scalar(-y.mean());
        let lambda = 3.7;
        let fit = fit_ridge_at(&q, &y, lambda);
        // the penalty acts on unit-variance columns, i.e. on (n-1)·QᵀQ
        let factor = 1.0 / (1.0 + lambda / (n - 1) as f64);
        for j in 0..3 {
            assert!((fit.coefficients[j] - ols[j] * factor).abs() < 1e-10);
        }
    }

    #[test]
    fn huge_penalty_kills_coefficients() {
        let x = randn(20, 4, 15);
        let y = randv(20, 16);
        let grid = ridge_lambda_grid(20);
        let base = fit_ridge_at(&x, &y, 0.0).coefficients.amax();
        let big = fit_ridge_at(&x, &y, grid[0] * 1e8).coefficients.amax();
        assert!(big < 1e-6 * base);
    }

    #[test]
    fn ridge_is_finite_for_wide_design() {
        let x = randn(10, 30, 17);
        let y = randv(10, 18);
        let f = fit_ridge(&x, &y, &CvSpec::tenfold(3));
        assert!(f.coefficients.iter().all(|b| b.is_finite()));
        assert!(matches!(
            f.selection.unwrap().hyperparameter,
            Hyperparameter::Lambda(_)
        ));
    }

    #[test]
    fn pure_noise_prefers_heavy_shrinkage() {
        let mut large = 0;
        for seed in 0..10 {
            let x = randn(60, 5, 100 + seed);
            let y = randv(60, 200 + seed);
            let f = fit_ridge(&x, &y, &CvSpec::tenfold(seed).with_rule(CvRule::MinimumScore));
            if let Some(Selection {
                hyperparameter: Hyperparameter::Lambda(l),
                ..
            }) = f.selection
            {
                if l >= 59.0 {
                    large += 1;
                }
            }
        }
        assert!(large >= 7, "only {large} of 10 noise fits chose lambda >= g");
    }

    #[test]
    fn grid_is_descending_and_scaled() {
        let g = ridge_lambda_grid(101);
        assert_eq!(g.len(), 100);
        assert!((g[0] - 1e6).abs() < 1e-6);
        assert!((g[99] - 1e-2).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }
}
