use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{buy_and_hold, min_variance, performance_stats, PerformanceStats, PortfolioWeights};
use crate::error::{Error, Result};
use crate::linalg::covariance;
use crate::monomle::{attach_factors, estimate, extract_asset_block, MonomvnConfig};
use crate::panel::{validate_and_order, Grid, MISSING_TOKEN};
use crate::regress::{fit_ols, CvSpec, Method};

/// Returns with one date label per row, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedPanel {
    pub dates: Vec<String>,
    pub labels: Vec<String>,
    /// NaN marks a missing return.
    pub values: DMatrix<f64>,
}

fn parse_cell(raw: &str, line: usize, column: usize) -> Result<f64> {
    let s = raw.trim();
    if s.is_empty() || s == MISSING_TOKEN {
        return Ok(f64::NAN);
    }
    let v: f64 = s.parse().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("cannot parse {s:?} as a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue { row: line, column });
    }
    Ok(v)
}

/// Parse a CSV whose first column holds dates and whose header row names
/// the remaining columns.
pub fn parse_dated_panel<R: Read>(reader: R) -> Result<DatedPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| Error::Parse {
            line: 1,
            column: 0,
            message: e.to_string(),
        })?,
        None => return Err(Error::Parse { line: 1, column: 0, message: "empty file".into() }),
    };
    let width = header.len();
    if width < 2 {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            message: "need a date column and at least one value column".into(),
        });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut dates = Vec::new();
    let mut cells = Vec::new();
    for (k, rec) in records.enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() != width {
            return Err(Error::InconsistentRowWidth {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        dates.push(rec[0].to_string());
        for (j, raw) in rec.iter().enumerate().skip(1) {
            cells.push(parse_cell(raw, line, j + 1)?);
        }
    }
    let values = DMatrix::from_row_slice(dates.len(), width - 1, &cells);
    Ok(DatedPanel { dates, labels, values })
}

pub fn read_dated_panel(path: impl AsRef<Path>) -> Result<DatedPanel> {
    parse_dated_panel(std::fs::File::open(path)?)
}

/// A two-column `date,value` file with no missing values.
pub fn read_dated_series(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<f64>)> {
    let p = read_dated_panel(path)?;
    if p.values.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "series file has {} value columns",
            p.values.ncols()
        )));
    }
    if let Some(i) = p.values.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFiniteValue { row: i + 2, column: 2 });
    }
    Ok((p.dates, p.values.iter().copied().collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestData {
    pub returns: DatedPanel,
    pub riskfree: Vec<f64>,
    pub market: Vec<f64>,
}

impl BacktestData {
    pub fn new(returns: DatedPanel, riskfree: (Vec<String>, Vec<f64>), market: (Vec<String>, Vec<f64>)) -> Result<Self> {
        for (name, dates) in [("risk-free", &riskfree.0), ("market", &market.0)] {
            if *dates != returns.dates {
                return Err(Error::DimensionMismatch(format!(
                    "{name} dates do not match the return dates"
                )));
            }
        }
        Ok(Self {
            returns,
            riskfree: riskfree.1,
            market: market.1,
        })
    }

    fn periods(&self) -> usize {
        self.returns.dates.len()
    }
}

/// How an estimator picks rows for the complete-data comparators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompleteRows {
    /// The last `min_history` periods.
    Minimum,
    /// The longest stretch observed for every sampled asset.
    Maximal,
    /// Only the assets with a full window.
    FullWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BacktestEstimator {
    Equal,
    Complete(CompleteRows),
    /// One-factor model on the market, over the same rows as `Complete`.
    FactorModel(CompleteRows),
    Monomvn(Method),
    /// Monotone estimate with the market prepended as a factor.
    FactorMonomvn(Method),
}

impl BacktestEstimator {
    pub fn name(&self) -> String {
        let rows = |r: &CompleteRows| match r {
            CompleteRows::Minimum => "min",
            CompleteRows::Maximal => "com",
            CompleteRows::FullWindow => "rm",
        };
        match self {
            BacktestEstimator::Equal => "eq".into(),
            BacktestEstimator::Complete(r) => rows(r).into(),
            BacktestEstimator::FactorModel(r) => format!("f{}", rows(r)),
            BacktestEstimator::Monomvn(m) => m.name().into(),
            BacktestEstimator::FactorMonomvn(Method::FactorParsimony) => "ffp".into(),
            BacktestEstimator::FactorMonomvn(m) => format!("f{}", m.name()),
        }
    }
}

impl fmt::Display for BacktestEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for BacktestEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use BacktestEstimator::*;
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "eq" | "equal" => Equal,
            "min" => Complete(CompleteRows::Minimum),
            "com" => Complete(CompleteRows::Maximal),
            "rm" => Complete(CompleteRows::FullWindow),
            "fmin" => FactorModel(CompleteRows::Minimum),
            "fcom" => FactorModel(CompleteRows::Maximal),
            "frm" => FactorModel(CompleteRows::FullWindow),
            "ffp" => FactorMonomvn(Method::FactorParsimony),
            other => match other.parse::<Method>() {
                Ok(m) => Monomvn(m),
                Err(e) => match other.strip_prefix('f').map(str::parse::<Method>) {
                    Some(Ok(m)) => FactorMonomvn(m),
                    _ => return Err(e),
                },
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub estimators: Vec<BacktestEstimator>,
    /// Parsimonious proportion for plain monotone estimates.
    pub parsimony_p: f64,
    /// Parsimonious proportion when the market factor is attached.
    pub factor_parsimony_p: f64,
    pub cv: CvSpec,
    pub subsample: usize,
    pub window: usize,
    pub min_history: usize,
    pub hold: usize,
    pub paths: usize,
    pub seed: u64,
    pub periods_per_year: f64,
    /// Reset weights every period instead of letting them drift.
    pub rebalance_each_period: bool,
    /// First rebalance row; defaults to `min_history`.
    pub start: Option<usize>,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            estimators: vec![BacktestEstimator::Equal, BacktestEstimator::Monomvn(Method::Pcr)],
            parsimony_p: 0.25,
            factor_parsimony_p: 0.0,
            cv: CvSpec::default(),
            subsample: 250,
            window: 60,
            min_history: 12,
            hold: 12,
            paths: 50,
            seed: 0,
            periods_per_year: 12.0,
            rebalance_each_period: false,
            start: None,
        }
    }
}

impl BacktestConfig {
    fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() || self.paths == 0 || self.hold == 0 || self.subsample == 0 {
            return Err(Error::InvalidConfig(
                "estimators, paths, hold and subsample must be nonzero".into(),
            ));
        }
        if self.min_history < 2 || self.window < self.min_history {
            return Err(Error::InvalidConfig(format!(
                "need 2 <= min_history ({}) <= window ({})",
                self.min_history, self.window
            )));
        }
        Ok(())
    }

    fn rebalance_rows(&self, periods: usize) -> Vec<usize> {
        let start = self.start.unwrap_or(self.min_history);
        (start..periods).step_by(self.hold).collect()
    }
}

/// Statistics of one estimator along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub path: usize,
    pub stats: PerformanceStats,
    pub mean_active: f64,
    pub failures: usize,
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub estimator: String,
    pub mean: f64,
    pub sd: f64,
    /// Average over paths with finite Sharpe ratios.
    pub sharpe: f64,
    pub infinite_sharpe_paths: usize,
    pub tracking_error: f64,
    pub market_correlation: f64,
    pub wmin: f64,
    /// Rebalances where the estimator failed and equal weights were held.
    pub failures: usize,
    pub paths: Vec<PathStats>,
}

/// Classical one-factor covariance `λλᵀω + D` from per-asset OLS on the factor.
pub fn one_factor_covariance(x: &DMatrix<f64>, factor: &DVector<f64>) -> Result<DMatrix<f64>> {
    let (n, k) = x.shape();
    let f = DMatrix::from_column_slice(n, 1, factor.as_slice());
    let omega = crate::linalg::sample_variance(factor.as_slice());
    let mut lambda = DVector::zeros(k);
    let mut d = DVector::zeros(k);
    for j in 0..k {
        let fit = fit_ols(&f, &x.column(j).into_owned())?;
        lambda[j] = fit.coefficients[0];
        d[j] = fit.residual_variance;
    }
    Ok(&lambda * lambda.transpose() * omega + DMatrix::from_diagonal(&d))
}

/// Everything an estimator needs at one rebalance date.
struct Window<'a> {
    /// Selected original asset indices.
    assets: Vec<usize>,
    /// Contiguous observed history length ending at the date, capped at the window.
    lengths: Vec<usize>,
    /// Excess returns, most recent row first.
    excess: DMatrix<f64>,
    market_excess: DVector<f64>,
    labels: Vec<String>,
    config: &'a BacktestConfig,
}

impl Window<'_> {
    fn grid(&self, cols: &[usize]) -> Grid {
        let rows = (0..self.excess.nrows())
            .map(|i| {
                cols.iter()
                    .map(|&k| (i < self.lengths[k]).then(|| self.excess[(i, k)]))
                    .collect()
            })
            .collect();
        Grid::new(cols.iter().map(|&k| self.labels[k].clone()).collect(), rows).expect("rectangular")
    }

    /// Rows and asset columns (window positions) for a complete-data comparator.
    fn complete_rows(&self, rows: CompleteRows) -> Result<(usize, Vec<usize>)> {
        let k = self.assets.len();
        let shortest = *self.lengths.iter().min().expect("non-empty");
        match rows {
            CompleteRows::Minimum => Ok((self.config.min_history, (0..k).collect())),
            CompleteRows::Maximal => Ok((shortest, (0..k).collect())),
            CompleteRows::FullWindow => {
                let cols: Vec<usize> = (0..k).filter(|&j| self.lengths[j] == self.config.window).collect();
                if cols.is_empty() {
                    return Err(Error::InsufficientAssets("no asset has a full window".into()));
                }
                Ok((self.config.window, cols))
            }
        }
    }

    /// Covariance over a subset of window positions.
    fn estimate(&self, est: BacktestEstimator) -> Result<(Vec<usize>, DMatrix<f64>)> {
        let all: Vec<usize> = (0..self.assets.len()).collect();
        let sub = |n: usize, cols: &[usize]| DMatrix::from_fn(n, cols.len(), |i, j| self.excess[(i, cols[j])]);
        match est {
            BacktestEstimator::Equal => unreachable!("handled by caller"),
            BacktestEstimator::Complete(rows) => {
                let (n, cols) = self.complete_rows(rows)?;
                Ok((cols.clone(), covariance(&sub(n, &cols), (n - 1) as f64)))
            }
            BacktestEstimator::FactorModel(rows) => {
                let (n, cols) = self.complete_rows(rows)?;
                let f = self.market_excess.rows(0, n).into_owned();
                Ok((cols.clone(), one_factor_covariance(&sub(n, &cols), &f)?))
            }
            BacktestEstimator::Monomvn(method) => {
                let (panel, order) = validate_and_order(&self.grid(&all))?;
                let config = MonomvnConfig {
                    method,
                    parsimony_p: self.config.parsimony_p,
                    cv: self.config.cv,
                    ..MonomvnConfig::default()
                };
                Ok((all, estimate(&panel, &order, &config)?.covariance))
            }
            BacktestEstimator::FactorMonomvn(method) => {
                let n = self.excess.nrows();
                let factor = Grid::from_matrix(
                    &DMatrix::from_column_slice(n, 1, self.market_excess.as_slice()),
                    Some(vec!["market".into()]),
                );
                let (aug, k) = attach_factors(&self.grid(&all), &factor)?;
                let (panel, order) = validate_and_order(&aug)?;
                let config = MonomvnConfig {
                    method,
                    parsimony_p: self.config.factor_parsimony_p,
                    cv: self.config.cv,
                    factor_count: k,
                    mle_denominator: false,
                };
                let est = estimate(&panel, &order, &config)?;
                Ok((all, extract_asset_block(&est, k)?.assets.covariance))
            }
        }
    }
}

fn contiguous_history(values: &DMatrix<f64>, col: usize, end: usize, cap: usize) -> usize {
    (0..end.min(cap))
        .take_while(|&k| !values[(end - 1 - k, col)].is_nan())
        .count()
}

fn run_path(data: &BacktestData, config: &BacktestConfig, path: usize) -> Result<Vec<PathStats>> {
    let r = &data.returns.values;
    let periods = data.periods();
    let n_est = config.estimators.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(path as u64));
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); n_est];
    let mut active: Vec<Vec<usize>> = vec![Vec::new(); n_est];
    let mut failures = vec![0; n_est];
    let mut rf_all = Vec::new();
    let mut mkt_all = Vec::new();
    for t in config.rebalance_rows(periods) {
        let histories: Vec<usize> = (0..r.ncols())
            .map(|j| contiguous_history(r, j, t, config.window))
            .collect();
        let eligible: Vec<usize> = (0..r.ncols()).filter(|&j| histories[j] >= config.min_history).collect();
        if eligible.is_empty() {
            return Err(Error::InsufficientAssets(format!(
                "no asset has {} periods of history before {}",
                config.min_history, data.returns.dates[t]
            )));
        }
        let take = config.subsample.min(eligible.len());
        let mut picked: Vec<usize> = sample_indices(&mut rng, eligible.len(), take)
            .into_iter()
            .map(|i| eligible[i])
            .collect();
        picked.sort_unstable();
        let depth = picked.iter().map(|&j| histories[j]).max().expect("non-empty");
        let excess = DMatrix::from_fn(depth, take, |i, k| r[(t - 1 - i, picked[k])] - data.riskfree[t - 1 - i]);
        let market_excess = DVector::from_fn(depth, |i, _| data.market[t - 1 - i] - data.riskfree[t - 1 - i]);
        let window = Window {
            lengths: picked.iter().map(|&j| histories[j]).collect(),
            labels: picked.iter().map(|&j| data.returns.labels[j].clone()).collect(),
            assets: picked,
            excess,
            market_excess,
            config,
        };
        let end = (t + config.hold).min(periods);
        // delisted or missing returns inside the hold count as zero
        let hold = DMatrix::from_fn(end - t, take, |i, k| {
            let v = r[(t + i, window.assets[k])];
            if v.is_nan() { 0.0 } else { v }
        });
        rf_all.extend_from_slice(&data.riskfree[t..end]);
        mkt_all.extend_from_slice(&data.market[t..end]);
        for (e, est) in config.estimators.iter().enumerate() {
            let weights = if *est == BacktestEstimator::Equal {
                PortfolioWeights::equal(take)
            } else {
                match window.estimate(*est).and_then(|(cols, sigma)| Ok((cols, min_variance(&sigma, true)?))) {
                    Ok((cols, w)) => {
                        let mut full = vec![0.0; take];
                        for (k, &c) in cols.iter().enumerate() {
                            full[c] = w.weights[k];
                        }
                        PortfolioWeights {
                            weights: full,
                            objective: w.objective,
                            active_count: w.active_count,
                        }
                    }
                    Err(_) => {
                        failures[e] += 1;
                        PortfolioWeights::equal(take)
                    }
                }
            };
            active[e].push(weights.active_count);
            series[e].extend(buy_and_hold(&weights.weights, &hold, config.rebalance_each_period)?);
        }
    }
    (0..n_est)
        .map(|e| {
            Ok(PathStats {
                path,
                stats: performance_stats(&series[e], &rf_all, &mkt_all, config.periods_per_year)?,
                mean_active: active[e].iter().sum::<usize>() as f64 / active[e].len().max(1) as f64,
                failures: failures[e],
                returns: std::mem::take(&mut series[e]),
            })
        })
        .collect()
}

/// Rolling subsample → estimate → minimum-variance → buy-and-hold, over
/// independent random paths.
pub fn backtest(data: &BacktestData, config: &BacktestConfig) -> Result<Vec<BacktestReport>> {
    config.validate()?;
    if config.rebalance_rows(data.periods()).is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} periods leave no rebalance date after the first {}",
            data.periods(),
            config.start.unwrap_or(config.min_history)
        )));
    }
    let per_path: Vec<Vec<PathStats>> = (0..config.paths)
        .into_par_iter()
        .map(|p| run_path(data, config, p))
        .collect::<Result<_>>()?;
    Ok(config
        .estimators
        .iter()
        .enumerate()
        .map(|(e, est)| {
            let paths: Vec<PathStats> = per_path.iter().map(|p| p[e].clone()).collect();
            let avg = |f: &dyn Fn(&PathStats) -> f64| paths.iter().map(f).sum::<f64>() / paths.len() as f64;
            let finite: Vec<f64> = paths.iter().map(|p| p.stats.sharpe).filter(|s| s.is_finite()).collect();
            BacktestReport {
                estimator: est.name(),
                mean: avg(&|p| p.stats.mean),
                sd: avg(&|p| p.stats.sd),
                sharpe: if finite.is_empty() {
                    f64::NAN
                } else {
                    finite.iter().sum::<f64>() / finite.len() as f64
                },
                infinite_sharpe_paths: paths.len() - finite.len(),
                tracking_error: avg(&|p| p.stats.tracking_error),
                market_correlation: avg(&|p| p.stats.market_correlation),
                wmin: avg(&|p| p.mean_active),
                failures: paths.iter().map(|p| p.failures).sum(),
                paths,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::testutil::{randn, randv};

    fn dates(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{}-{:02}", 2000 + i / 12, i % 12 + 1)).collect()
    }

    /// One-factor universe with staggered listing dates.
    fn factor_universe(assets: usize, periods: usize, seed: u64) -> BacktestData {
        let mkt = randv(periods, seed);
        let eps = randn(periods, assets, seed + 1);
        let starts = randv(assets, seed + 2);
        let mut values = DMatrix::zeros(periods, assets);
        for j in 0..assets {
            let beta = 0.6 + 0.8 * (j as f64 / assets as f64);
            let first = if j < assets / 4 { 0 } else { ((starts[j].abs() * 30.0) as usize).min(periods / 2) };
            for t in 0..periods {
                values[(t, j)] = if t < first {
                    f64::NAN
                } else {
                    0.008 + beta * 0.04 * mkt[t] + 0.06 * eps[(t, j)]
                };
            }
        }
        let d = dates(periods);
        let market: Vec<f64> = mkt.iter().map(|m| 0.008 + 0.04 * m).collect();
        BacktestData::new(
            DatedPanel {
                dates: d.clone(),
                labels: (0..assets).map(|j| format!("A{j}")).collect(),
                values,
            },
            (d.clone(), vec![0.003; periods]),
            (d, market),
        )
        .unwrap()
    }

    #[test]
    fn estimator_names_round_trip() {
        for name in ["eq", "min", "com", "rm", "fmin", "fcom", "frm", "pcr", "lasso", "stepwise", "fpcr", "fridge", "ffp"] {
            let e: BacktestEstimator = name.parse().unwrap();
            assert_eq!(e.name(), name);
        }
        assert!("fnope".parse::<BacktestEstimator>().is_err());
    }

    #[test]
    fn parses_dated_panel() {
        let text = "date,A,B\n2001-01,0.01,NA\n2001-02,,0.02\n";
        let p = parse_dated_panel(text.as_bytes()).unwrap();
        assert_eq!(p.dates, vec!["2001-01", "2001-02"]);
        assert_eq!(p.labels, vec!["A", "B"]);
        assert!(p.values[(0, 1)].is_nan() && p.values[(1, 0)].is_nan());
        assert_eq!(p.values[(1, 1)], 0.02);
        assert!(matches!(
            parse_dated_panel("date,A\n1,x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn mismatched_dates_rejected() {
        let d = dates(3);
        let p = DatedPanel {
            dates: d.clone(),
            labels: vec!["A".into()],
            values: DMatrix::zeros(3, 1),
        };
        assert!(BacktestData::new(p, (d[..2].to_vec(), vec![0.0; 2]), (d, vec![0.0; 3])).is_err());
    }

    #[test]
    fn single_asset_universe() {
        let d = dates(36);
        let r = randv(36, 5) * 0.05;
        let data = BacktestData::new(
            DatedPanel {
                dates: d.clone(),
                labels: vec!["A".into()],
                values: DMatrix::from_column_slice(36, 1, r.as_slice()),
            },
            (d.clone(), vec![0.0; 36]),
            (d, vec![0.0; 36]),
        )
        .unwrap();
        let config = BacktestConfig {
            estimators: vec![BacktestEstimator::Equal, BacktestEstimator::Monomvn(Method::Ridge)],
            paths: 2,
            ..BacktestConfig::default()
        };
        let reports = backtest(&data, &config).unwrap();
        let own = performance_stats(&r.as_slice()[12..], &[0.0; 24], &[0.0; 24], 12.0).unwrap();
        for rep in &reports {
            assert!((rep.mean - own.mean).abs() < 1e-14);
            assert!((rep.sd - own.sd).abs() < 1e-14);
            assert_eq!(rep.failures, 0);
        }
    }

    #[test]
    fn identical_estimators_identical_reports() {
        let data = factor_universe(30, 72, 10);
        let config = BacktestConfig {
            estimators: vec![BacktestEstimator::Monomvn(Method::Lasso), BacktestEstimator::Monomvn(Method::Lasso)],
            subsample: 15,
            paths: 3,
            ..BacktestConfig::default()
        };
        let a = backtest(&data, &config).unwrap();
        assert_eq!(a[0].paths, a[1].paths);
        let b = backtest(&data, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn factor_monomvn_beats_complete_on_factor_data() {
        let data = factor_universe(60, 120, 20);
        let config = BacktestConfig {
            estimators: vec![
                BacktestEstimator::Complete(CompleteRows::Maximal),
                BacktestEstimator::FactorMonomvn(Method::FactorParsimony),
            ],
            subsample: 40,
            paths: 20,
            seed: 3,
            ..BacktestConfig::default()
        };
        let reports = backtest(&data, &config).unwrap();
        assert!(reports[1].sd < reports[0].sd, "{} vs {}", reports[1].sd, reports[0].sd);
        assert_eq!(reports[1].failures, 0);
    }

    #[test]
    fn one_factor_covariance_formula() {
        let f = randv(50, 30);
        let e = randn(50, 2, 31);
        let x = DMatrix::from_fn(50, 2, |i, j| (j as f64 + 1.0) * f[i] + e[(i, j)]);
        let s = one_factor_covariance(&x, &f).unwrap();
        let b0 = fit_ols(&DMatrix::from_column_slice(50, 1, f.as_slice()), &x.column(0).into_owned()).unwrap();
        let b1 = fit_ols(&DMatrix::from_column_slice(50, 1, f.as_slice()), &x.column(1).into_owned()).unwrap();
        let om = crate::linalg::sample_variance(f.as_slice());
        assert!((s[(0, 1)] - b0.coefficients[0] * b1.coefficients[0] * om).abs() < 1e-12);
        assert!((s[(0, 0)] - b0.coefficients[0].powi(2) * om - b0.residual_variance).abs() < 1e-12);
    }
}
