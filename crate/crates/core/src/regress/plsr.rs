use nalgebra::{DMatrix, DVector};

use super::{
    cross_validate, CvSpec, Hyperparameter, Method, PathModel, RegressionFit, Selection,
    Standardized,
};
use super::pcr::with_intercept_only;
use crate::linalg::RANK_TOL;

/// Orthogonal-scores PLS1 on standardized data, deflating `X` only.
/// Returns standardized coefficients for 1..=kmax latent variables; the
/// iteration stops early once `Xᵀy` vanishes, repeating the last column.
fn plsr_betas(s: &Standardized, kmax: usize) -> (DMatrix<f64>, usize) {
    let w_cols = s.width();
    let mut out = DMatrix::zeros(w_cols, kmax);
    if w_cols == 0 || s.n() < 2 || kmax == 0 {
        return (out, 0);
    }
    let mut x = s.x.clone();
    let y = &s.y;
    let scale = s.x.norm() * y.norm();
    let mut weights: Vec<DVector<f64>> = Vec::new();
    let mut loadings: Vec<DVector<f64>> = Vec::new();
    let mut yload: Vec<f64> = Vec::new();
    let mut fitted = 0;
    for k in 0..kmax {
        let mut w = x.transpose() * y;
        let wn = w.norm();
        if k < s.n() - 1 && wn > RANK_TOL * scale && scale > 0.0 {
            w /= wn;
            let t = &x * &w;
            let tt = t.norm_squared();
            if tt > 0.0 {
                let p = x.transpose() * &t / tt;
                let q = y.dot(&t) / tt;
                x -= &t * p.transpose();
                weights.push(w);
                loadings.push(p);
                yload.push(q);
                fitted = k + 1;
            }
        }
        if fitted == k + 1 {
            let a = weights.len();
            let wm = DMatrix::from_columns(&weights);
            let pm = DMatrix::from_columns(&loadings);
            let ptw = pm.transpose() * &wm;
            let qv = DVector::from_column_slice(&yload);
            let coef = match ptw.lu().solve(&qv) {
                Some(c) => wm * c,
                None => DVector::zeros(w_cols),
            };
            debug_assert_eq!(a, k + 1);
            out.set_column(k, &coef);
        } else if k > 0 {
            let prev = out.column(k - 1).into_owned();
            out.set_column(k, &prev);
        }
    }
    (out, fitted)
}

fn max_latent(s: &Standardized) -> usize {
    if s.width() == 0 || s.n() < 2 {
        0
    } else {
        s.width().min(s.n() - 1)
    }
}

struct PlsrPath {
    kmax: usize,
}

impl PathModel for PlsrPath {
    fn grid_len(&self) -> usize {
        self.kmax + 1
    }

    fn predict_path(
        &self,
        x_train: &DMatrix<f64>,
        y_train: &DVector<f64>,
        x_test: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let s = Standardized::new(x_train, y_train);
        s.predict_many(x_test, &with_intercept_only(plsr_betas(&s, self.kmax).0))
    }
}

/// Partial least squares regression with `k` latent variables.
pub fn fit_plsr_components(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> RegressionFit {
    let s = Standardized::new(x, y);
    let (betas, fitted) = plsr_betas(&s, k);
    if k == 0 || fitted == 0 {
        return RegressionFit::intercept_only(y, x.ncols(), Method::Plsr);
    }
    let (b0, b) = s.unstandardize(&betas.column(k - 1).into_owned());
    RegressionFit::from_coefficients(b0, b, x, y, Method::Plsr)
}

/// PLS regression with the latent-variable count (possibly zero) chosen by
/// cross-validation.
pub fn fit_plsr(x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> RegressionFit {
    let s = Standardized::new(x, y);
    let kmax = max_latent(&s);
    if kmax == 0 || plsr_betas(&s, 1).1 == 0 {
        return RegressionFit::intercept_only(y, x.ncols(), Method::Plsr);
    }
    let path = PlsrPath { kmax };
    let rule = cv.rule.unwrap_or(Method::Plsr.default_rule());
    let out = cross_validate(&path, x, y, cv, rule);
    let k = out.chosen;
    let mut fit = fit_plsr_components(x, y, k);
    fit.selection = Some(Selection {
        hyperparameter: Hyperparameter::Components(k),
        cv_score: out.curve[out.chosen],
    });
    fit
}

#[cfg(test)]
pub(crate) fn plsr_cv_curve(x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> Vec<f64> {
    let s = Standardized::new(x, y);
    let path = PlsrPath { kmax: max_latent(&s) };
    cross_validate(&path, x, y, cv, super::CvRule::MinimumScore).curve
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::pcr::pcr_cv_curve;
    use crate::regress::testutil::{randn, randv};
    use crate::regress::fit_ols;

    #[test]
    fn saturated_pls_is_ols() {
        let x = randn(40, 5, 31);
        let y = randv(40, 32);
        let p = fit_plsr_components(&x, &y, 5);
        let o = fit_ols(&x, &y).unwrap();
        assert!((p.coefficients - o.coefficients).amax() < 1e-6);
    }

    #[test]
    fn orthogonal_response_gives_intercept_only() {
        // y orthogonal to both centered columns
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
        let y = DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0]);
        let f = fit_plsr(&x, &y, &CvSpec::loo());
        assert!(f.coefficients.iter().all(|&b| b == 0.0));
        assert_eq!(f.intercept, 0.0);
    }

    #[test]
    fn minor_component_signal_favours_pls() {
        // y driven by the smallest principal direction of X
        let n = 60;
        let z = randn(n, 4, 33);
        let x = DMatrix::from_fn(n, 4, |i, j| z[(i, j)] * [6.0, 4.0, 2.0, 0.5][j]);
        let e = randv(n, 34);
        let y = DVector::from_fn(n, |i, _| 3.0 * z[(i, 3)] + 0.1 * e[i]);
        let cv = CvSpec::tenfold(9);
        let pls = plsr_cv_curve(&x, &y, &cv);
        let pcr = pcr_cv_curve(&x, &y, &cv);
        assert!(pls[1] <= pcr[1], "pls {} pcr {}", pls[1], pcr[1]);
    }
}
