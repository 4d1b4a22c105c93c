use nalgebra::{DMatrix, DVector};

use super::{
    cross_validate, CvSpec, Hyperparameter, Method, PathModel, RegressionFit, Selection,
    Standardized,
};
use crate::linalg::numerical_rank;

/// Standardized PCR coefficients using 1..=kmax leading components (one
/// column per k). When fewer components exist the last one is repeated.
fn pcr_betas(s: &Standardized, kmax: usize) -> DMatrix<f64> {
    let w = s.width();
    let mut out = DMatrix::zeros(w, kmax);
    if w == 0 || s.n() < 2 {
        return out;
    }
    let svd = s.x.clone().svd(true, true);
    let rank = numerical_rank(&svd.singular_values).min(s.n() - 1);
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let mut beta = DVector::zeros(w);
    for k in 0..kmax {
        if k < rank {
            let gamma = u.column(k).dot(&s.y) / svd.singular_values[k];
            beta += vt.row(k).transpose() * gamma;
        }
        out.set_column(k, &beta);
    }
    out
}

/// Prepend the all-zero coefficient column of the intercept-only model.
pub(crate) fn with_intercept_only(betas: DMatrix<f64>) -> DMatrix<f64> {
    betas.insert_column(0, 0.0)
}

fn max_components(s: &Standardized) -> usize {
    if s.width() == 0 || s.n() < 2 {
        return 0;
    }
    let sv = s.x.clone().svd(false, false).singular_values;
    numerical_rank(&sv).min(s.n() - 1)
}

struct PcrPath {
    kmax: usize,
}

impl PathModel for PcrPath {
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
        s.predict_many(x_test, &with_intercept_only(pcr_betas(&s, self.kmax)))
    }
}

/// Principal component regression on the leading `k` components.
pub fn fit_pcr_components(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> RegressionFit {
    let s = Standardized::new(x, y);
    if k == 0 || s.width() == 0 || s.n() < 2 {
        return RegressionFit::intercept_only(y, x.ncols(), Method::Pcr);
    }
    let beta = pcr_betas(&s, k).column(k - 1).into_owned();
    let (b0, b) = s.unstandardize(&beta);
    RegressionFit::from_coefficients(b0, b, x, y, Method::Pcr)
}

/// Principal component regression with the component count chosen by
/// cross-validation over `0..=min(rank, n - 1)`; zero is the intercept-only model.
pub fn fit_pcr(x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> RegressionFit {
    let s = Standardized::new(x, y);
    let kmax = max_components(&s);
    if kmax == 0 {
        return RegressionFit::intercept_only(y, x.ncols(), Method::Pcr);
    }
    let path = PcrPath { kmax };
    let rule = cv.rule.unwrap_or(Method::Pcr.default_rule());
    let out = cross_validate(&path, x, y, cv, rule);
    let k = out.chosen;
    let mut fit = fit_pcr_components(x, y, k);
    fit.selection = Some(Selection {
        hyperparameter: Hyperparameter::Components(k),
        cv_score: out.curve[out.chosen],
    });
    fit
}

#[cfg(test)]
pub(crate) fn pcr_cv_curve(x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> Vec<f64> {
    let s = Standardized::new(x, y);
    let path = PcrPath { kmax: max_components(&s) };
    cross_validate(&path, x, y, cv, super::CvRule::MinimumScore).curve
}
