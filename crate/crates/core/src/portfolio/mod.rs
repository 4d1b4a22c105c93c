//! Minimum-variance portfolios, buy-and-hold returns, performance
//! statistics and the rolling backtest.

mod backtest;

pub use backtest::{
    backtest, one_factor_covariance, read_dated_panel, read_dated_series, BacktestConfig, BacktestData,
    BacktestEstimator, BacktestReport, DatedPanel, PathStats,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite, sample_variance};

/// Weights above this share count towards `active_count`.
pub const ACTIVE_WEIGHT: f64 = 0.005;
pub const KKT_TOL: f64 = 1e-8;
pub const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioWeights {
    pub weights: Vec<f64>,
    pub objective: f64,
    pub active_count: usize,
}

impl PortfolioWeights {
    fn new(weights: DVector<f64>, sigma: &DMatrix<f64>) -> Self {
        let objective = weights.dot(&(sigma * &weights));
        let active_count = weights.iter().filter(|&&w| w > ACTIVE_WEIGHT).count();
        Self {
            weights: weights.iter().copied().collect(),
            objective,
            active_count,
        }
    }

    pub fn equal(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
            objective: f64::NAN,
            active_count: if 1.0 / (m as f64) > ACTIVE_WEIGHT { m } else { 0 },
        }
    }
}

/// `Σ⁻¹1 / (1ᵀΣ⁻¹1)` restricted to `free`, zeros elsewhere.
fn equality_solution(sigma: &DMatrix<f64>, free: &[usize]) -> Option<DVector<f64>> {
    let k = free.len();
    let sub = DMatrix::from_fn(k, k, |i, j| sigma[(free[i], free[j])]);
    let z = sub.cholesky()?.solve(&DVector::from_element(k, 1.0));
    let total = z.sum();
    if !(total > 0.0) {
        return None;
    }
    let mut w = DVector::zeros(sigma.nrows());
    for (i, &f) in free.iter().enumerate() {
        w[f] = z[i] / total;
    }
    Some(w)
}

/// Largest violation of the long-only KKT conditions at `w`: with
/// `g = 2Σw` and `ν` the mean of `g` over the support, each multiplier
/// `g_i − ν` must vanish on the support and be nonnegative off it.
pub fn kkt_residual(sigma: &DMatrix<f64>, w: &[f64]) -> f64 {
    let wv = DVector::from_column_slice(w);
    let g = 2.0 * sigma * &wv;
    let support: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    if support.is_empty() {
        return f64::INFINITY;
    }
    let nu = support.iter().map(|&i| g[i]).sum::<f64>() / support.len() as f64;
    let mut worst = (wv.sum() - 1.0).abs();
    for i in 0..w.len() {
        let lambda = g[i] - nu;
        let violation = if w[i] > 0.0 { lambda.abs() } else { (-lambda).max(-w[i]).max(0.0) };
        worst = worst.max(violation);
    }
    worst
}

fn active_set(sigma: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = sigma.nrows();
    let mut w = DVector::from_element(m, 1.0 / m as f64);
    let mut at_zero = vec![false; m];
    let cap = 10 * m * m;
    for _ in 0..cap.max(10) {
        let free: Vec<usize> = (0..m).filter(|&i| !at_zero[i]).collect();
        let target = equality_solution(sigma, &free).ok_or(Error::NonPdCovariance)?;
        let step = &target - &w;
        if step.amax() <= FEASIBILITY_TOL {
            w = target;
            let g = 2.0 * sigma * &w;
            let nu = free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64;
            // release the bound with the most negative multiplier
            let release = (0..m)
                .filter(|&i| at_zero[i])
                .map(|i| (i, g[i] - nu))
                .filter(|&(_, l)| l < -1e-12 * nu.abs())
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match release {
                Some((i, _)) => at_zero[i] = false,
                None => return Ok(w),
            }
            continue;
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for &i in &free {
            if step[i] < 0.0 {
                let a = -w[i] / step[i];
                if a < alpha {
                    alpha = a;
                    blocking = Some(i);
                }
            }
        }
        w += step * alpha;
        if let Some(i) = blocking {
            w[i] = 0.0;
            at_zero[i] = true;
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: cap,
        residual: kkt_residual(sigma, w.as_slice()),
    })
}

/// Global minimum-variance weights, long-only when `no_short`.
pub fn min_variance(sigma: &DMatrix<f64>, no_short: bool) -> Result<PortfolioWeights> {
    let m = sigma.nrows();
    if m == 0 || sigma.ncols() != m {
        return Err(Error::DimensionMismatch(format!("covariance is {:?}", sigma.shape())));
    }
    if !is_positive_definite(sigma) {
        return Err(Error::NonPdCovariance);
    }
    let all: Vec<usize> = (0..m).collect();
    let w = if no_short {
        let mut w = active_set(sigma)?;
        for v in w.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let s = w.sum();
        w / s
    } else {
        equality_solution(sigma, &all).ok_or(Error::NonPdCovariance)?
    };
    Ok(PortfolioWeights::new(w, sigma))
}

/// Per-period returns of a portfolio formed once with `weights`. Positions
/// drift with returns unless `rebalance` holds the weights fixed.
pub fn buy_and_hold(weights: &[f64], returns: &DMatrix<f64>, rebalance: bool) -> Result<Vec<f64>> {
    if returns.ncols() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} assets",
            weights.len(),
            returns.ncols()
        )));
    }
    let mut value: Vec<f64> = weights.to_vec();
    let mut out = Vec::with_capacity(returns.nrows());
    for t in 0..returns.nrows() {
        let total: f64 = value.iter().sum();
        let gain: f64 = value.iter().enumerate().map(|(j, v)| v * returns[(t, j)]).sum();
        out.push(if total != 0.0 { gain / total } else { 0.0 });
        if rebalance {
            continue;
        }
        for (j, v) in value.iter_mut().enumerate() {
            *v *= 1.0 + returns[(t, j)];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceStats {
    pub mean: f64,
    pub sd: f64,
    /// `+inf` when the portfolio has zero volatility.
    pub sharpe: f64,
    pub tracking_error: f64,
    pub market_correlation: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Annualized summary of a per-period return series.
pub fn performance_stats(
    returns: &[f64],
    riskfree: &[f64],
    market: &[f64],
    periods_per_year: f64,
) -> Result<PerformanceStats> {
    let n = returns.len();
    if riskfree.len() != n || market.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} returns, {} risk-free, {} market",
            riskfree.len(),
            market.len()
        )));
    }
    if n == 0 {
        return Err(Error::DimensionMismatch("empty return series".into()));
    }
    // exact for constant series, where roundoff in the mean would leave a tiny sd
    let spread = |v: &[f64]| {
        if v.iter().all(|&x| x == v[0]) {
            0.0
        } else {
            (sample_variance(v) * periods_per_year).sqrt()
        }
    };
    let sd = spread(returns);
    let excess: Vec<f64> = returns.iter().zip(riskfree).map(|(r, f)| r - f).collect();
    let active: Vec<f64> = returns.iter().zip(market).map(|(r, m)| r - m).collect();
    Ok(PerformanceStats {
        mean: periods_per_year * mean(returns),
        sd,
        sharpe: if sd > 0.0 {
            periods_per_year * mean(&excess) / sd
        } else {
            f64::INFINITY
        },
        tracking_error: spread(&active),
        market_correlation: pearson(returns, market),
    })
}
