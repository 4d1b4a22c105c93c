//! Monotone maximum-likelihood estimation of `(μ, Σ)`.
//!
//! The first (longest) column supplies the starting mean and variance. Each
//! later column is regressed on every column before it, using only the rows
//! it shares with them, and the regression is mapped back to a new row and
//! column of `(μ, Σ)`:
//!
//! ```text
//! μ_j        = β₀ + βᵀ μ_prev
//! Σ_prev,j   = Σ_prev β
//! Σ_jj       = σ² + βᵀ Σ_prev β
//! ```
//!
//! Columns sharing a history length and qualifying for OLS are fitted
//! jointly as one multi-response regression, with the residual covariance
//! matrix taking the place of `σ²`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, numerical_rank, sample_variance, symmetrize};
use crate::panel::{design_block, design_slice, Grid, MonotoneOrder, ReturnPanel};
use crate::regress::{self, fit_ols, fit_ols_multi, fit_on_columns, CvSpec, Method, Selection, Standardized};

/// Residual variances of parsimonious fits are floored at this multiple of
/// the response variance so the assembled covariance stays positive definite.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomvnConfig {
    pub method: Method,
    /// Parsimonious proportion: a parsimonious fit replaces OLS whenever
    /// the design's column-to-row ratio `j / n_j` is at least `parsimony_p`.
    /// Zero means always parsimonious, one means only when OLS is infeasible.
    pub parsimony_p: f64,
    pub cv: CvSpec,
    /// Number of leading factor columns in the panel.
    pub factor_count: usize,
    /// Use `n_j` instead of `n_j − 1` as the variance denominator.
    pub mle_denominator: bool,
}

impl Default for MonomvnConfig {
    fn default() -> Self {
        Self {
            method: Method::Pcr,
            parsimony_p: 1.0,
            cv: CvSpec::default(),
            factor_count: 0,
            mle_denominator: false,
        }
    }
}

impl MonomvnConfig {
    pub fn new(method: Method, parsimony_p: f64) -> Self {
        Self {
            method,
            parsimony_p,
            ..Self::default()
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.parsimony_p) {
            return Err(Error::InvalidConfig(format!(
                "parsimonious proportion {} outside [0, 1]",
                self.parsimony_p
            )));
        }
        if self.method == Method::FactorParsimony && self.factor_count == 0 {
            return Err(Error::InvalidConfig("factor-parsimony needs at least one factor".into()));
        }
        if self.factor_count > m {
            return Err(Error::InvalidConfig(format!(
                "{} factors requested for a {m}-column panel",
                self.factor_count
            )));
        }
        Ok(())
    }
}

/// How one column's row of `(μ, Σ)` was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRecord {
    /// Original column index.
    pub column: usize,
    pub label: String,
    /// 1-based monotone position `j`.
    pub position: usize,
    pub observed: usize,
    /// `None` for the first column (sample moments).
    pub method: Option<Method>,
    pub selection: Option<Selection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvnEstimate {
    pub labels: Vec<String>,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// One record per column, in monotone order.
    pub method_log: Vec<ColumnRecord>,
    /// Number of leading factor columns, when factors were attached.
    pub factor_block: Option<usize>,
    pub positive_definite: bool,
}

impl MvnEstimate {
    pub fn new(labels: Vec<String>, mean: DVector<f64>, mut covariance: DMatrix<f64>) -> Self {
        symmetrize(&mut covariance);
        let positive_definite = is_positive_definite(&covariance);
        Self {
            labels,
            mean,
            covariance,
            method_log: Vec::new(),
            factor_block: None,
            positive_definite,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// A group of monotone positions regressed together on all earlier columns.
#[derive(Debug, Clone)]
enum Unit {
    /// Joint OLS of positions `start..end` on positions `0..start`.
    OlsBlock { start: usize, end: usize },
    /// One position regressed on every earlier position.
    Single { pos: usize },
}

struct UnitFit {
    start: usize,
    intercepts: DVector<f64>,
    // predictors × responses
    coefficients: DMatrix<f64>,
    residual_covariance: DMatrix<f64>,
    records: Vec<(Method, Option<Selection>)>,
}

fn design_full_rank(x: &DMatrix<f64>) -> bool {
    let (n, p) = x.shape();
    if p == 0 {
        return true;
    }
    if n <= p {
        return false;
    }
    let s = Standardized::new(x, &DVector::zeros(n));
    if s.width() < p {
        return false;
    }
    numerical_rank(&s.x.svd(false, false).singular_values) == p
}

fn plan(order: &MonotoneOrder, panel: &ReturnPanel, p: f64) -> Vec<Unit> {
    let mut units = Vec::new();
    for block in &order.blocks {
        let start = block.start.max(1);
        if start >= block.end {
            continue;
        }
        let n_b = order.lengths[start];
        // OLS-eligible positions form a prefix of the block since j grows;
        // p = 0 means always parsimonious
        let eligible_end = (start..block.end)
            .take_while(|&c| p * (n_b as f64) > (c + 1) as f64 && n_b > c + 1)
            .last()
            .map_or(start, |c| c + 1);
        let mut next = start;
        if eligible_end > start {
            let (x, _) = design_block(panel, order, start..eligible_end);
            if design_full_rank(&x) {
                units.push(Unit::OlsBlock {
                    start,
                    end: eligible_end,
                });
                next = eligible_end;
            }
        }
        for pos in next..block.end {
            units.push(Unit::Single { pos });
        }
    }
    units
}

fn floor_variance(sigma2: f64, y: &DVector<f64>) -> f64 {
    sigma2.max(RESIDUAL_FLOOR * sample_variance(y.as_slice()))
}

fn fit_single(
    panel: &ReturnPanel,
    order: &MonotoneOrder,
    pos: usize,
    config: &MonomvnConfig,
) -> Result<UnitFit> {
    let (x, y) = design_slice(panel, order, pos);
    let fit = match config.method {
        Method::Ols => fit_ols(&x, &y)?,
        Method::FactorParsimony => {
            let factors: Vec<usize> = (0..pos)
                .filter(|&k| order.columns[k] < config.factor_count)
                .collect();
            let mut f = fit_on_columns(&x, &y, &factors)?;
            f.residual_variance = floor_variance(f.residual_variance, &y);
            f
        }
        method => {
            let mut f = regress::fit(method, &x, &y, &config.cv)?;
            f.residual_variance = floor_variance(f.residual_variance, &y);
            f
        }
    };
    Ok(UnitFit {
        start: pos,
        intercepts: DVector::from_element(1, fit.intercept),
        coefficients: DMatrix::from_column_slice(pos, 1, fit.coefficients.as_slice()),
        residual_covariance: DMatrix::from_element(1, 1, fit.residual_variance),
        records: vec![(fit.method, fit.selection)],
    })
}

fn fit_unit(
    panel: &ReturnPanel,
    order: &MonotoneOrder,
    unit: &Unit,
    config: &MonomvnConfig,
) -> Result<Vec<UnitFit>> {
    match *unit {
        Unit::OlsBlock { start, end } => {
            let (x, y) = design_block(panel, order, start..end);
            let joint = fit_ols_multi(&x, &y)
                .ok()
                .filter(|f| is_positive_definite(&f.residual_covariance));
            match joint {
                Some(f) => Ok(vec![UnitFit {
                    start,
                    intercepts: f.intercepts,
                    coefficients: f.coefficients,
                    residual_covariance: f.residual_covariance,
                    records: vec![(Method::Ols, None); end - start],
                }]),
                // residuals collinear within the block: go column by column
                None => (start..end)
                    .map(|pos| fit_single_with_ols(panel, order, pos, config))
                    .collect(),
            }
        }
        Unit::Single { pos } => fit_single(panel, order, pos, config).map(|f| vec![f]),
    }
}

fn fit_single_with_ols(
    panel: &ReturnPanel,
    order: &MonotoneOrder,
    pos: usize,
    config: &MonomvnConfig,
) -> Result<UnitFit> {
    let (x, y) = design_slice(panel, order, pos);
    match fit_ols(&x, &y) {
        Ok(fit) if fit.residual_variance > 0.0 => Ok(UnitFit {
            start: pos,
            intercepts: DVector::from_element(1, fit.intercept),
            coefficients: DMatrix::from_column_slice(pos, 1, fit.coefficients.as_slice()),
            residual_covariance: DMatrix::from_element(1, 1, fit.residual_variance),
            records: vec![(Method::Ols, None)],
        }),
        _ => fit_single(panel, order, pos, config),
    }
}

/// Estimate `(μ, Σ)` from a validated panel.
pub fn estimate(panel: &ReturnPanel, order: &MonotoneOrder, config: &MonomvnConfig) -> Result<MvnEstimate> {
    let m = order.m();
    config.validate(m)?;
    for (k, &len) in order.lengths.iter().enumerate() {
        if len < 2 {
            let col = order.columns[k];
            return Err(Error::DegenerateColumn {
                column: panel.labels()[col].clone(),
                observed: len,
            });
        }
    }
    let units = plan(order, panel, config.parsimony_p);
    let fits: Vec<Vec<UnitFit>> = units
        .par_iter()
        .map(|u| fit_unit(panel, order, u, config))
        .collect::<Result<_>>()?;

    let first = panel.observed(order.columns[0]);
    let n1 = first.len() as f64;
    let denom = |n: f64| if config.mle_denominator { n } else { n - 1.0 };
    let mut mean = DVector::zeros(m);
    let mut cov = DMatrix::zeros(m, m);
    mean[0] = first.mean();
    cov[(0, 0)] = first.iter().map(|v| (v - mean[0]).powi(2)).sum::<f64>() / denom(n1);

    let mut log = vec![ColumnRecord {
        column: order.columns[0],
        label: panel.labels()[order.columns[0]].clone(),
        position: 1,
        observed: order.lengths[0],
        method: None,
        selection: None,
    }];
    for fit in fits.iter().flatten() {
        let s = fit.start;
        let q = fit.intercepts.len();
        let n_b = order.lengths[s] as f64;
        let mut v = fit.residual_covariance.clone();
        if config.mle_denominator {
            v *= (n_b - 1.0) / n_b;
        }
        let b = &fit.coefficients;
        let mu_prev = mean.rows(0, s).into_owned();
        let sig_prev = cov.view((0, 0), (s, s)).into_owned();
        let mu_new = &fit.intercepts + b.transpose() * mu_prev;
        let cross = &sig_prev * b;
        let explained = b.transpose() * &cross;
        if q == 1 && fit.records[0].0 != Method::Ols {
            // an exact fit leaves a pivot that roundoff in `explained` can swamp
            v[(0, 0)] = v[(0, 0)].max(RESIDUAL_FLOOR * explained[(0, 0)]);
        }
        let block = v + explained;
        mean.rows_mut(s, q).copy_from(&mu_new);
        cov.view_mut((0, s), (s, q)).copy_from(&cross);
        cov.view_mut((s, 0), (q, s)).copy_from(&cross.transpose());
        cov.view_mut((s, s), (q, q)).copy_from(&block);
        for (r, (method, selection)) in fit.records.iter().enumerate() {
            let pos = s + r;
            log.push(ColumnRecord {
                column: order.columns[pos],
                label: panel.labels()[order.columns[pos]].clone(),
                position: pos + 1,
                observed: order.lengths[pos],
                method: Some(*method),
                selection: *selection,
            });
        }
    }
    symmetrize(&mut cov);

    let pos = &order.positions;
    let mean_orig = DVector::from_fn(m, |j, _| mean[pos[j]]);
    let cov_orig = DMatrix::from_fn(m, m, |i, j| cov[(pos[i], pos[j])]);
    let mut est = MvnEstimate::new(panel.labels().to_vec(), mean_orig, cov_orig);
    est.method_log = log;
    est.factor_block = (config.factor_count > 0).then_some(config.factor_count);
    Ok(est)
}

/// Prepend factor columns to a return grid; returns the augmented grid and
/// the factor count. Validation may later reorder a factor that is shorter
/// than some asset; estimates are reported in this augmented column order.
pub fn attach_factors(returns: &Grid, factors: &Grid) -> Result<(Grid, usize)> {
    if factors.n_cols() == 0 {
        return Ok((returns.clone(), 0));
    }
    if factors.n_rows() != returns.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "factor file has {} rows, returns have {}",
            factors.n_rows(),
            returns.n_rows()
        )));
    }
    Ok((factors.hstack(returns)?, factors.n_cols()))
}

/// Asset and factor blocks of an estimate made with leading factor columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSplit {
    pub assets: MvnEstimate,
    pub factor_mean: DVector<f64>,
    pub factor_covariance: DMatrix<f64>,
}

/// Split off the bottom-right asset block and the factor block of an
/// estimate over `K + m` columns.
pub fn extract_asset_block(est: &MvnEstimate, k: usize) -> Result<FactorSplit> {
    let total = est.dim();
    if k > total || est.factor_block.unwrap_or(0) != k {
        return Err(Error::DimensionMismatch(format!(
            "estimate carries factor block {:?}, requested {k}",
            est.factor_block
        )));
    }
    let m = total - k;
    let mean = est.mean.rows(k, m).into_owned();
    let cov = est.covariance.view((k, k), (m, m)).into_owned();
    let mut assets = MvnEstimate::new(est.labels[k..].to_vec(), mean, cov);
    assets.method_log = est
        .method_log
        .iter()
        .filter(|r| r.column >= k)
        .cloned()
        .map(|mut r| {
            r.column -= k;
            r
        })
        .collect();
    Ok(FactorSplit {
        assets,
        factor_mean: est.mean.rows(0, k).into_owned(),
        factor_covariance: est.covariance.view((0, 0), (k, k)).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::covariance;
    use crate::panel::validate_and_order;
    use crate::regress::testutil::randn;

    fn grid(rows: Vec<Vec<Option<f64>>>) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn hand_example() {
        // y1 = (1,2,3,4), y2 = (1,2,NA,NA)
        let g = grid(vec![
            vec![Some(1.0), Some(1.0)],
            vec![Some(2.0), Some(2.0)],
            vec![Some(3.0), None],
            vec![Some(4.0), None],
        ]);
        let (panel, order) = validate_and_order(&g).unwrap();
        let est = estimate(&panel, &order, &MonomvnConfig::new(Method::Ols, 1.0)).unwrap();
        let third = 5.0 / 3.0;
        assert!((est.mean[0] - 2.5).abs() < 1e-12);
        assert!((est.mean[1] - 2.5).abs() < 1e-12);
        for v in est.covariance.iter() {
            assert!((v - third).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_data_matches_sample_moments() {
        let x = randn(40, 6, 101);
        let (panel, order) = validate_and_order(&Grid::from_matrix(&x, None)).unwrap();
        for method in [Method::Lasso, Method::Pcr, Method::Ridge] {
            let est = estimate(&panel, &order, &MonomvnConfig::new(method, 1.0)).unwrap();
            assert!((est.covariance.clone() - covariance(&x, 39.0)).amax() < 1e-10);
            assert!(est.method_log.iter().skip(1).all(|r| r.method == Some(Method::Ols)));
        }
    }

    #[test]
    fn parsimony_zero_uses_method_everywhere() {
        let x = randn(30, 5, 102);
        let (panel, order) = validate_and_order(&Grid::from_matrix(&x, None)).unwrap();
        let est = estimate(&panel, &order, &MonomvnConfig::new(Method::Lasso, 0.0)).unwrap();
        assert_eq!(est.method_log.len(), 5);
        assert!(est.method_log.iter().skip(1).all(|r| r.method == Some(Method::Lasso)));
    }

    #[test]
    fn degenerate_column() {
        let g = grid(vec![vec![Some(1.0), Some(1.0)], vec![Some(2.0), None], vec![Some(3.0), None]]);
        let (panel, order) = validate_and_order(&g).unwrap();
        assert!(matches!(
            estimate(&panel, &order, &MonomvnConfig::default()),
            Err(Error::DegenerateColumn { .. })
        ));
    }

    #[test]
    fn ols_on_wide_panel_fails() {
        let x = randn(6, 10, 103);
        let (panel, order) = validate_and_order(&Grid::from_matrix(&x, None)).unwrap();
        assert!(matches!(
            estimate(&panel, &order, &MonomvnConfig::new(Method::Ols, 1.0)),
            Err(Error::RankDeficient { .. })
        ));
        let est = estimate(&panel, &order, &MonomvnConfig::new(Method::Ridge, 1.0)).unwrap();
        assert!(est.positive_definite);
    }

    #[test]
    fn invalid_configs() {
        let x = randn(10, 2, 104);
        let (panel, order) = validate_and_order(&Grid::from_matrix(&x, None)).unwrap();
        let bad_p = MonomvnConfig::new(Method::Pcr, 1.5);
        assert!(matches!(estimate(&panel, &order, &bad_p), Err(Error::InvalidConfig(_))));
        let no_factor = MonomvnConfig::new(Method::FactorParsimony, 0.0);
        assert!(matches!(estimate(&panel, &order, &no_factor), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn attach_and_extract() {
        let f = Grid::from_matrix(&randn(5, 1, 105), Some(vec!["mkt".into()]));
        let r = Grid::from_matrix(&randn(5, 3, 106), None);
        let (aug, k) = attach_factors(&r, &f).unwrap();
        assert_eq!(k, 1);
        assert_eq!(aug.n_cols(), 4);
        assert_eq!(aug.labels()[0], "mkt");
        let (same, zero) = attach_factors(&r, &Grid::from_rows(vec![vec![]; 5]).unwrap()).unwrap();
        assert_eq!((same, zero), (r.clone(), 0));
        let short = Grid::from_matrix(&randn(4, 1, 107), None);
        assert!(attach_factors(&r, &short).is_err());
    }

    fn monotone_grid(x: &DMatrix<f64>, lengths: &[usize]) -> Grid {
        let rows = (0..x.nrows())
            .map(|i| (0..x.ncols()).map(|j| (i < lengths[j]).then(|| x[(i, j)])).collect())
            .collect();
        grid(rows)
    }

    fn run(g: &Grid, config: &MonomvnConfig) -> MvnEstimate {
        let (panel, order) = validate_and_order(g).unwrap();
        estimate(&panel, &order, config).unwrap()
    }

    #[test]
    fn permutation_equivariant() {
        let x = randn(30, 5, 110);
        let lengths = [30, 22, 22, 14, 9];
        let perm = [3, 0, 1, 4, 2]; // keeps the tied pair in order
        let xp = DMatrix::from_fn(30, 5, |i, j| x[(i, perm[j])]);
        let lp: Vec<usize> = perm.iter().map(|&k| lengths[k]).collect();
        let config = MonomvnConfig::new(Method::Lasso, 0.5);
        let a = run(&monotone_grid(&x, &lengths), &config);
        let b = run(&monotone_grid(&xp, &lp), &config);
        for i in 0..5 {
            assert_eq!(a.mean[perm[i]], b.mean[i]);
            for j in 0..5 {
                assert_eq!(a.covariance[(perm[i], perm[j])], b.covariance[(i, j)]);
            }
        }
    }

    #[test]
    fn dropping_shortest_column_changes_nothing_else() {
        let x = randn(25, 8, 111);
        let lengths = [25, 25, 20, 20, 20, 12, 12, 7];
        for method in [Method::Ridge, Method::Plsr, Method::Stepwise] {
            let config = MonomvnConfig::new(method, 0.25);
            let full = run(&monotone_grid(&x, &lengths), &config);
            let x7 = x.columns(0, 7).into_owned();
            let part = run(&monotone_grid(&x7, &lengths[..7]), &config);
            assert_eq!(full.mean.rows(0, 7), part.mean);
            assert_eq!(full.covariance.view((0, 0), (7, 7)), part.covariance);
        }
    }

    #[test]
    fn estimates_are_positive_definite() {
        let x = randn(20, 30, 112);
        let lengths: Vec<usize> = (0..30).map(|j| 20 - j / 3).collect();
        for method in [Method::Ridge, Method::Lasso, Method::Lar, Method::Stepwise, Method::Pcr, Method::Plsr] {
            for p in [0.0, 0.25, 1.0] {
                let est = run(&monotone_grid(&x, &lengths), &MonomvnConfig::new(method, p));
                assert!(est.positive_definite, "{method} p={p}");
                assert!(est.covariance.diagonal().iter().all(|&d| d > 0.0));
                assert_eq!(est.covariance, est.covariance.transpose());
            }
        }
    }

    #[test]
    fn lasso_zeros_propagate() {
        // independent columns: lasso should often select nothing
        let x = randn(15, 12, 113);
        let lengths: Vec<usize> = (0..12).map(|j| 15 - j).collect();
        let est = run(&monotone_grid(&x, &lengths), &MonomvnConfig::new(Method::Lasso, 0.0));
        let mut checked = 0;
        for rec in &est.method_log[1..] {
            let Some(Selection {
                hyperparameter: regress::Hyperparameter::Fraction { fraction, .. },
                ..
            }) = rec.selection
            else {
                continue;
            };
            if fraction == 0.0 {
                let c = rec.column;
                for other in est.method_log.iter().take(rec.position - 1) {
                    assert_eq!(est.covariance[(other.column, c)], 0.0);
                }
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn mle_denominator_rescales_complete_data() {
        let x = randn(12, 3, 114);
        let mut config = MonomvnConfig::new(Method::Ols, 1.0);
        config.mle_denominator = true;
        let est = run(&Grid::from_matrix(&x, None), &config);
        assert!((est.covariance.clone() - covariance(&x, 12.0)).amax() < 1e-12);
    }

    #[test]
    fn tied_block_wider_than_its_history() {
        // six columns of 5 rows each after a long one: the block cannot be
        // fitted jointly, yet the estimate stays positive definite
        let x = randn(40, 7, 115);
        let lengths = [40, 5, 5, 5, 5, 5, 5];
        let est = run(&monotone_grid(&x, &lengths), &MonomvnConfig::new(Method::Ridge, 1.0));
        assert!(est.positive_definite);
        assert_eq!(est.method_log[1].method, Some(Method::Ols));
        assert!(est.method_log[6].method == Some(Method::Ridge));
    }

    #[test]
    fn factor_parsimony_matches_one_factor_model() {
        let n = 60;
        let f = randn(n, 1, 116);
        let e = randn(n, 4, 117);
        let mut x = DMatrix::zeros(n, 5);
        for i in 0..n {
            x[(i, 0)] = f[(i, 0)];
            for j in 1..5 {
                x[(i, j)] = 0.1 * j as f64 + (0.5 + 0.2 * j as f64) * f[(i, 0)] + e[(i, j - 1)];
            }
        }
        let mut config = MonomvnConfig::new(Method::FactorParsimony, 0.0);
        config.factor_count = 1;
        let est = run(&Grid::from_matrix(&x, None), &config);
        let split = extract_asset_block(&est, 1).unwrap();

        // classical one-factor covariance built from separate regressions
        let fv = f.column(0).into_owned();
        let omega = sample_variance(fv.as_slice());
        let mut lam = DVector::zeros(4);
        let mut d = DVector::zeros(4);
        for j in 0..4 {
            let y = x.column(j + 1).into_owned();
            let fit = fit_ols(&f, &y).unwrap();
            lam[j] = fit.coefficients[0];
            d[j] = fit.residual_variance;
        }
        let sigma_f = &lam * lam.transpose() * omega + DMatrix::from_diagonal(&d);
        assert!((split.assets.covariance - sigma_f).amax() < 1e-10);
        assert!((split.factor_covariance[(0, 0)] - omega).abs() < 1e-12);
        assert_eq!(split.assets.labels.len(), 4);
    }

    #[test]
    fn intermediate_parsimony_uses_column_to_row_ratio() {
        // 0.25 · 30 > 5 keeps OLS at j = 5; 0.25 · 12 < 6 switches at j = 6
        let x = randn(40, 6, 118);
        let lengths = [40, 40, 40, 40, 30, 12];
        let est = run(&monotone_grid(&x, &lengths), &MonomvnConfig::new(Method::Ridge, 0.25));
        assert_eq!(est.method_log[4].method, Some(Method::Ols));
        assert_eq!(est.method_log[5].method, Some(Method::Ridge));
        let all = run(&monotone_grid(&x, &lengths), &MonomvnConfig::new(Method::Ridge, 1.0));
        assert_eq!(all.method_log[5].method, Some(Method::Ols));
    }
}
