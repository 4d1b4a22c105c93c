//! Least angle regression and its lasso and forward-stepwise variants.
//!
//! Paths are computed on standardized data. Penalties are expressed in
//! correlation units: the lasso objective is
//! `‖y − Xβ‖² / (2(n−1)) + λ‖β‖₁`, so the KKT conditions read
//! `|x_jᵀ(y − Xβ)| / (n−1) ≤ λ` with equality on the active set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    cross_validate, CvSpec, Hyperparameter, Method, PathModel, RegressionFit, Selection,
    Standardized,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LarsVariant {
    Lasso,
    Lar,
    Stepwise,
}

impl LarsVariant {
    pub fn method(self) -> Method {
        match self {
            LarsVariant::Lasso => Method::Lasso,
            LarsVariant::Lar => Method::Lar,
            LarsVariant::Stepwise => Method::Stepwise,
        }
    }
}

/// One breakpoint of a coefficient path (standardized coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub lambda: f64,
    pub beta: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LarsPath {
    pub variant: LarsVariant,
    /// Breakpoints from the null model (first) to the end of the path.
    pub points: Vec<PathPoint>,
}

const FRACTION_POINTS: usize = 100;

impl LarsPath {
    fn l1_norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta.lp_norm(1)).collect()
    }

    /// Coefficients after `steps` path steps (clamped to the last point).
    pub fn beta_at_step(&self, steps: usize) -> &DVector<f64> {
        &self.points[steps.min(self.points.len() - 1)].beta
    }

    /// Lasso/LAR coefficients at penalty `lambda`, interpolating linearly
    /// between breakpoints. Penalties below the final breakpoint return it.
    pub fn beta_at_lambda(&self, lambda: f64) -> DVector<f64> {
        let pts = &self.points;
        if lambda >= pts[0].lambda {
            return pts[0].beta.clone();
        }
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if lambda >= b.lambda {
                let span = a.lambda - b.lambda;
                let t = if span > 0.0 { (a.lambda - lambda) / span } else { 1.0 };
                return &a.beta + (&b.beta - &a.beta) * t;
            }
        }
        pts.last().expect("non-empty").beta.clone()
    }

    /// Coefficients whose L1 norm is `fraction` of the final L1 norm, plus
    /// the penalty at that position.
    pub fn beta_at_fraction(&self, fraction: f64) -> (DVector<f64>, f64) {
        let l1 = self.l1_norms();
        let total = *l1.last().expect("non-empty");
        let target = fraction.clamp(0.0, 1.0) * total;
        let pts = &self.points;
        if total <= 0.0 || target <= 0.0 {
            return (pts[0].beta.clone(), pts[0].lambda);
        }
        for k in 1..pts.len() {
            if l1[k] >= target {
                let span = l1[k] - l1[k - 1];
                let t = if span > 0.0 { (target - l1[k - 1]) / span } else { 1.0 };
                let beta = &pts[k - 1].beta + (&pts[k].beta - &pts[k - 1].beta) * t;
                let lambda = pts[k - 1].lambda + (pts[k].lambda - pts[k - 1].lambda) * t;
                return (beta, lambda);
            }
        }
        let last = pts.last().expect("non-empty");
        (last.beta.clone(), last.lambda)
    }
}

fn correlations(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, nn: f64) -> DVector<f64> {
    x.transpose() * (y - x * beta) / nn
}

fn homotopy(x: &DMatrix<f64>, y: &DVector<f64>, lasso: bool) -> Vec<PathPoint> {
    let (n, p) = x.shape();
    let nn = (n - 1) as f64;
    let max_active = p.min(n - 1);
    let mut beta = DVector::zeros(p);
    let mut c = correlations(x, y, &beta, nn);
    let (first, lambda0) = c
        .iter()
        .enumerate()
        .map(|(j, v)| (j, v.abs()))
        .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
    let mut lambda = lambda0;
    let mut points = vec![PathPoint {
        lambda,
        beta: beta.clone(),
    }];
    if lambda0 <= f64::MIN_POSITIVE || max_active == 0 {
        return points;
    }
    let eps = 1e-12 * lambda0;
    let gram = x.transpose() * x / nn;
    let mut active: Vec<usize> = vec![first];
    let mut signs: Vec<f64> = vec![c[first].signum()];
    let mut ignored = vec![false; p];
    let mut just_dropped: Option<usize> = None;

    for _ in 0..(8 * max_active + 64) {
        if active.is_empty() {
            break;
        }
        let k = active.len();
        let gaa = DMatrix::from_fn(k, k, |a, b| gram[(active[a], active[b])]);
        let s = DVector::from_column_slice(&signs);
        let d = match gaa.cholesky() {
            Some(ch) => ch.solve(&s),
            None => {
                // collinear with the active set: never consider it again
                let j = active.pop().expect("non-empty");
                signs.pop();
                ignored[j] = true;
                continue;
            }
        };
        let a: DVector<f64> = DVector::from_fn(p, |j, _| (0..k).map(|t| gram[(j, active[t])] * d[t]).sum());

        let mut step = lambda;
        let mut enter: Option<usize> = None;
        let mut drop: Option<usize> = None;
        if k < max_active {
            for j in 0..p {
                if ignored[j] || active.contains(&j) {
                    continue;
                }
                for (num, den) in [(lambda - c[j], 1.0 - a[j]), (lambda + c[j], 1.0 + a[j])] {
                    if den > 1e-12 {
                        let dd = (num / den).max(0.0_f64);
                        // a dropped variable may come back only with the opposite sign
                        if Some(j) == just_dropped && dd <= eps {
                            continue;
                        }
                        if dd < step {
                            step = dd;
                            enter = Some(j);
                            drop = None;
                        }
                    }
                }
            }
        }
        if lasso {
            for (t, &j) in active.iter().enumerate() {
                if d[t] != 0.0 {
                    let dd = -beta[j] / d[t];
                    if dd > eps && dd < step {
                        step = dd;
                        drop = Some(t);
                        enter = None;
                    }
                }
            }
        }

        for (t, &j) in active.iter().enumerate() {
            beta[j] += step * d[t];
        }
        lambda = (lambda - step).max(0.0);
        just_dropped = None;
        if let Some(t) = drop {
            let j = active.remove(t);
            signs.remove(t);
            beta[j] = 0.0;
            just_dropped = Some(j);
        }
        c = correlations(x, y, &beta, nn);
        if let Some(j) = enter {
            active.push(j);
            signs.push(c[j].signum());
        }
        points.push(PathPoint {
            lambda,
            beta: beta.clone(),
        });
        if lambda <= eps {
            points.last_mut().expect("pushed").lambda = 0.0;
            break;
        }
    }
    points
}

fn stepwise(x: &DMatrix<f64>, y: &DVector<f64>) -> Vec<PathPoint> {
    let (n, p) = x.shape();
    let nn = (n - 1) as f64;
    let max_active = p.min(n - 1);
    let mut beta = DVector::zeros(p);
    let lambda_of = |b: &DVector<f64>| correlations(x, y, b, nn).amax();
    let mut points = vec![PathPoint {
        lambda: lambda_of(&beta),
        beta: beta.clone(),
    }];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut resid = y.clone();
    let scale = y.norm_squared();
    while active.len() < max_active {
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for j in 0..p {
            if active.contains(&j) {
                continue;
            }
            let mut xt = x.column(j).into_owned();
            for q in &basis {
                let proj = q.dot(&xt);
                xt.axpy(-proj, q, 1.0);
            }
            let norm2 = xt.norm_squared();
            if norm2 <= 1e-10 * x.column(j).norm_squared() {
                continue;
            }
            let gain = xt.dot(&resid).powi(2) / norm2;
            if best.as_ref().is_none_or(|b| gain > b.1) {
                best = Some((j, gain, xt / norm2.sqrt()));
            }
        }
        let Some((j, gain, q)) = best else { break };
        if gain <= 1e-24 * scale {
            break;
        }
        let proj = q.dot(&resid);
        resid.axpy(-proj, &q, 1.0);
        basis.push(q);
        active.push(j);
        let xa = DMatrix::from_fn(n, active.len(), |i, t| x[(i, active[t])]);
        let ba = match (xa.transpose() * &xa).cholesky() {
            Some(ch) => ch.solve(&(xa.transpose() * y)),
            None => break,
        };
        beta = DVector::zeros(p);
        for (t, &jj) in active.iter().enumerate() {
            beta[jj] = ba[t];
        }
        points.push(PathPoint {
            lambda: lambda_of(&beta),
            beta: beta.clone(),
        });
    }
    points
}

/// Full coefficient path on standardized data.
pub fn lars_path(s: &Standardized, variant: LarsVariant) -> LarsPath {
    let points = if s.width() == 0 || s.n() < 2 {
        vec![PathPoint {
            lambda: 0.0,
            beta: DVector::zeros(s.width()),
        }]
    } else {
        match variant {
            LarsVariant::Lasso => homotopy(&s.x, &s.y, true),
            LarsVariant::Lar => homotopy(&s.x, &s.y, false),
            LarsVariant::Stepwise => stepwise(&s.x, &s.y),
        }
    };
    LarsPath { variant, points }
}

fn fraction_grid() -> Vec<f64> {
    (0..FRACTION_POINTS)
        .map(|i| i as f64 / (FRACTION_POINTS - 1) as f64)
        .collect()
}

struct LarsCv {
    variant: LarsVariant,
    steps: usize,
}

impl LarsCv {
    fn betas(&self, path: &LarsPath) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = match self.variant {
            LarsVariant::Lasso => fraction_grid()
                .into_iter()
                .map(|t| path.beta_at_fraction(t).0)
                .collect(),
            _ => (0..=self.steps).map(|k| path.beta_at_step(k).clone()).collect(),
        };
        DMatrix::from_columns(&cols)
    }
}

impl PathModel for LarsCv {
    fn grid_len(&self) -> usize {
        match self.variant {
            LarsVariant::Lasso => FRACTION_POINTS,
            _ => self.steps + 1,
        }
    }

    fn predict_path(
        &self,
        x_train: &DMatrix<f64>,
        y_train: &DVector<f64>,
        x_test: &DMatrix<f64>,
    ) -> DMatrix<f64> {
        let s = Standardized::new(x_train, y_train);
        let path = lars_path(&s, self.variant);
        s.predict_many(x_test, &self.betas(&path))
    }
}

/// Lasso, LAR or forward-stepwise regression with the path position chosen
/// by cross-validation: L1-norm fraction for the lasso, step count otherwise.
pub fn fit_lars_family(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    variant: LarsVariant,
    cv: &CvSpec,
) -> RegressionFit {
    let method = variant.method();
    let s = Standardized::new(x, y);
    if s.width() == 0 || s.n() < 2 {
        return RegressionFit::intercept_only(y, x.ncols(), method);
    }
    let path = lars_path(&s, variant);
    let model = LarsCv {
        variant,
        steps: path.points.len() - 1,
    };
    let rule = cv.rule.unwrap_or(method.default_rule());
    let out = cross_validate(&model, x, y, cv, rule);
    let (beta, hyper) = match variant {
        LarsVariant::Lasso => {
            let fraction = fraction_grid()[out.chosen];
            let (beta, lambda) = path.beta_at_fraction(fraction);
            (beta, Hyperparameter::Fraction { fraction, lambda })
        }
        _ => (path.beta_at_step(out.chosen).clone(), Hyperparameter::Steps(out.chosen)),
    };
    let (b0, b) = s.unstandardize(&beta);
    let mut fit = RegressionFit::from_coefficients(b0, b, x, y, method);
    fit.selection = Some(Selection {
        hyperparameter: hyper,
        cv_score: out.curve[out.chosen],
    });
    fit
}
