//! Parsimonious regression suite.
//!
//! Every fitter centers the response and standardizes the predictors to unit
//! sample standard deviation before fitting. Zero-variance predictors are left
//! out of the fitted system and receive a coefficient of exactly zero.
//! Coefficients are always reported on the original predictor scale, with an
//! unpenalized intercept.

mod cv;
mod factor;
mod lars;
mod ols;
mod pcr;
mod plsr;
mod ridge;
mod standardize;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use cv::{cross_validate, cv_folds, CvOutcome, CvRule, CvScheme, CvSpec, PathModel};
pub use factor::{fit_factor_parsimony, fit_on_columns};
pub use lars::{fit_lars_family, lars_path, LarsPath, LarsVariant, PathPoint};
pub use ols::{fit_ols, fit_ols_multi, MultiFit};
pub use pcr::{fit_pcr, fit_pcr_components};
pub use plsr::{fit_plsr, fit_plsr_components};
pub use ridge::{fit_ridge, fit_ridge_at, ridge_lambda_grid};
pub use standardize::Standardized;

use crate::error::{Error, Result};

/// Regression method tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ols,
    Ridge,
    Lasso,
    Lar,
    Stepwise,
    Pcr,
    Plsr,
    FactorParsimony,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Ols,
        Method::Ridge,
        Method::Lasso,
        Method::Lar,
        Method::Stepwise,
        Method::Pcr,
        Method::Plsr,
        Method::FactorParsimony,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ols => "ols",
            Method::Ridge => "ridge",
            Method::Lasso => "lasso",
            Method::Lar => "lar",
            Method::Stepwise => "stepwise",
            Method::Pcr => "pcr",
            Method::Plsr => "plsr",
            Method::FactorParsimony => "factor-parsimony",
        }
    }

    /// Methods that produce exact zeros through a path algorithm.
    pub fn is_lars_family(self) -> bool {
        matches!(self, Method::Lasso | Method::Lar | Method::Stepwise)
    }

    pub fn default_rule(self) -> CvRule {
        if self.is_lars_family() {
            CvRule::OneStandardError
        } else {
            CvRule::MinimumScore
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols" => Ok(Method::Ols),
            "ridge" => Ok(Method::Ridge),
            "lasso" => Ok(Method::Lasso),
            "lar" => Ok(Method::Lar),
            "stepwise" | "step" | "forward.stagewise" => Ok(Method::Stepwise),
            "pcr" => Ok(Method::Pcr),
            "plsr" => Ok(Method::Plsr),
            "factor-parsimony" | "fp" => Ok(Method::FactorParsimony),
            other => Err(Error::InvalidConfig(format!("unknown regression method {other:?}"))),
        }
    }
}

/// Hyperparameter chosen by cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hyperparameter {
    /// Ridge penalty on the standardized scale.
    Lambda(f64),
    /// Number of principal components or latent variables.
    Components(usize),
    /// Lasso path position as a fraction of the final L1 norm, with the
    /// penalty (in correlation units) at that position.
    Fraction { fraction: f64, lambda: f64 },
    /// Number of steps along a LAR or stepwise path.
    Steps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub hyperparameter: Hyperparameter,
    pub cv_score: f64,
}

/// Single-response regression fit on the original predictor scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub intercept: f64,
    pub coefficients: DVector<f64>,
    /// Residual sum of squares over `n - 1`.
    pub residual_variance: f64,
    pub method: Method,
    pub selection: Option<Selection>,
}

impl RegressionFit {
    pub(crate) fn intercept_only(y: &DVector<f64>, p: usize, method: Method) -> Self {
        let n = y.len();
        let mean = if n == 0 { 0.0 } else { y.mean() };
        Self::from_coefficients(mean, DVector::zeros(p), &DMatrix::zeros(n, p), y, method)
    }

    pub(crate) fn from_coefficients(
        intercept: f64,
        coefficients: DVector<f64>,
        x: &DMatrix<f64>,
        y: &DVector<f64>,
        method: Method,
    ) -> Self {
        let residuals = y - x * &coefficients - DVector::from_element(y.len(), intercept);
        let denom = (y.len().saturating_sub(1)).max(1) as f64;
        Self {
            intercept,
            coefficients,
            residual_variance: residuals.norm_squared() / denom,
            method,
            selection: None,
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        x * &self.coefficients + DVector::from_element(x.nrows(), self.intercept)
    }

    /// Number of coefficients that are exactly zero.
    pub fn zero_count(&self) -> usize {
        self.coefficients.iter().filter(|&&b| b == 0.0).count()
    }
}

/// Fit the generic parsimonious methods. Factor-parsimony needs the factor
/// column positions and goes through [`fit_on_columns`] instead.
pub fn fit(method: Method, x: &DMatrix<f64>, y: &DVector<f64>, cv: &CvSpec) -> Result<RegressionFit> {
    match method {
        Method::Ols => fit_ols(x, y),
        Method::Ridge => Ok(fit_ridge(x, y, cv)),
        Method::Lasso => Ok(fit_lars_family(x, y, LarsVariant::Lasso, cv)),
        Method::Lar => Ok(fit_lars_family(x, y, LarsVariant::Lar, cv)),
        Method::Stepwise => Ok(fit_lars_family(x, y, LarsVariant::Stepwise, cv)),
        Method::Pcr => Ok(fit_pcr(x, y, cv)),
        Method::Plsr => Ok(fit_plsr(x, y, cv)),
        Method::FactorParsimony => Err(Error::InvalidConfig(
            "factor-parsimony needs the factor column count".into(),
        )),
    }
}
