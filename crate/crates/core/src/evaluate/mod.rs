//! Scoring estimates against known truths, the two naive comparator
//! estimators, rank summaries and zero-structure counts.

mod benchmark;

pub use benchmark::{
    compare_parsimony, run_benchmark, BenchmarkResult, BenchmarkSpec, Estimator, ParsimonyComparison,
    ParsimonySpec,
};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::spd_logdet_inverse;
use crate::monomle::MvnEstimate;
use crate::panel::{MonotoneOrder, ReturnPanel};
use crate::simulate::{sample, SampleDistribution, SimSpec};

/// Default relative threshold below which precision entries count as zero.
pub const PRECISION_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub distribution: SampleDistribution,
    pub nu: Option<f64>,
    /// Draws for Monte Carlo scoring.
    pub mc_draws: usize,
    pub seed: u64,
}

impl TruthSpec {
    pub fn mvn(mu: DVector<f64>, sigma: DMatrix<f64>) -> Self {
        Self {
            mu,
            sigma,
            distribution: SampleDistribution::Mvn,
            nu: None,
            mc_draws: 10_000,
            seed: 0,
        }
    }

    pub fn mvt(mu: DVector<f64>, sigma: DMatrix<f64>, nu: f64) -> Self {
        Self {
            distribution: SampleDistribution::Mvt,
            nu: Some(nu),
            ..Self::mvn(mu, sigma)
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

fn check_dims(q: &MvnEstimate, p: &TruthSpec) -> Result<()> {
    if q.dim() != p.dim() || q.covariance.shape() != p.sigma.shape() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has dimension {}, truth {}",
            q.dim(),
            p.dim()
        )));
    }
    Ok(())
}

/// `KL(q ‖ p) = ∫ p log(p/q)` for two normals.
pub fn kl_mvn(q: &MvnEstimate, p: &TruthSpec) -> Result<f64> {
    check_dims(q, p)?;
    let (ld_q, inv_q) = spd_logdet_inverse(&q.covariance).ok_or(Error::NonPdCovariance)?;
    let (ld_p, _) = spd_logdet_inverse(&p.sigma).ok_or(Error::NonPdCovariance)?;
    let d = &q.mean - &p.mu;
    let trace = (&inv_q * &p.sigma).trace();
    let maha = d.dot(&(&inv_q * &d));
    Ok(0.5 * (ld_q - ld_p + trace + maha - p.dim() as f64))
}

/// `∫ p log p` for `MVN(·, Σ)`.
pub fn neg_entropy(sigma: &DMatrix<f64>) -> Result<f64> {
    let (ld, _) = spd_logdet_inverse(sigma).ok_or(Error::NonPdCovariance)?;
    let m = sigma.nrows() as f64;
    Ok(-0.5 * (m * (2.0 * PI * std::f64::consts::E).ln() + ld))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllScore {
    pub value: f64,
    /// Monte Carlo standard error; absent for the closed form.
    pub std_error: Option<f64>,
}

/// Expected log-likelihood of `q` under the truth: closed form for a
/// normal truth, Monte Carlo otherwise. An estimate without a valid
/// density scores `-inf`.
pub fn ell(q: &MvnEstimate, p: &TruthSpec) -> Result<EllScore> {
    check_dims(q, p)?;
    if !q.positive_definite {
        return Ok(EllScore {
            value: f64::NEG_INFINITY,
            std_error: None,
        });
    }
    match p.distribution {
        SampleDistribution::Mvn => Ok(EllScore {
            value: neg_entropy(&p.sigma)? - kl_mvn(q, p)?,
            std_error: None,
        }),
        SampleDistribution::Mvt => ell_monte_carlo(q, p),
    }
}

/// Mean of `log q(x_t)` over `p.mc_draws` draws from the truth.
pub fn ell_monte_carlo(q: &MvnEstimate, p: &TruthSpec) -> Result<EllScore> {
    check_dims(q, p)?;
    let t = p.mc_draws;
    if t == 0 {
        return Err(Error::InvalidConfig("Monte Carlo scoring needs at least one draw".into()));
    }
    let (ld, inv) = spd_logdet_inverse(&q.covariance).ok_or(Error::NonPdCovariance)?;
    let spec = SimSpec {
        distribution: p.distribution,
        nu: p.nu,
        ..SimSpec::new(p.dim(), t, p.seed)
    };
    let x = sample(&p.mu, &p.sigma, &spec)?;
    let m = p.dim() as f64;
    let konst = -0.5 * (m * (2.0 * PI).ln() + ld);
    let logs: Vec<f64> = x
        .row_iter()
        .map(|row| {
            let d = row.transpose() - &q.mean;
            konst - 0.5 * d.dot(&(&inv * &d))
        })
        .collect();
    let mean = logs.iter().sum::<f64>() / t as f64;
    let se = if t > 1 {
        (crate::linalg::sample_variance(&logs) / t as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(EllScore {
        value: mean,
        std_error: Some(se),
    })
}

/// Sample moments of the completely observed rows.
pub fn complete_estimator(panel: &ReturnPanel, order: &MonotoneOrder) -> Result<MvnEstimate> {
    let m = panel.m();
    let n_m = *order.lengths.last().expect("m > 0");
    if n_m < 2 {
        let col = order.columns[m - 1];
        return Err(Error::DegenerateColumn {
            column: panel.labels()[col].clone(),
            observed: n_m,
        });
    }
    let cols: Vec<usize> = (0..m).collect();
    let x = panel.submatrix(n_m, &cols);
    let mean = crate::linalg::column_means(&x);
    let cov = crate::linalg::covariance(&x, (n_m - 1) as f64);
    Ok(MvnEstimate::new(panel.labels().to_vec(), mean, cov))
}

/// Each mean over its own history; each covariance over the shorter of the
/// two histories, divided by that length, around the full-history means.
pub fn observed_estimator(panel: &ReturnPanel, _order: &MonotoneOrder) -> Result<MvnEstimate> {
    let m = panel.m();
    let lengths = panel.lengths();
    for j in 0..m {
        if lengths[j] < 2 {
            return Err(Error::DegenerateColumn {
                column: panel.labels()[j].clone(),
                observed: lengths[j],
            });
        }
    }
    let cols: Vec<DVector<f64>> = (0..m).map(|j| panel.observed(j)).collect();
    let mean = DVector::from_iterator(m, cols.iter().map(|c| c.mean()));
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let n = lengths[i].min(lengths[j]);
            let s: f64 = (0..n)
                .map(|k| (cols[i][k] - mean[i]) * (cols[j][k] - mean[j]))
                .sum();
            cov[(i, j)] = s / n as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    Ok(MvnEstimate::new(panel.labels().to_vec(), mean, cov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub method: String,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    /// trials × methods; rank 1 is the highest ELL.
    pub ranks: DMatrix<f64>,
    pub summaries: Vec<RankSummary>,
}

/// Average ranks of one row, highest score first.
pub fn rank_descending(scores: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    let key = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    idx.sort_by(|&a, &b| key(scores[b]).total_cmp(&key(scores[a])));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut k = i;
        while k + 1 < idx.len() && key(scores[idx[k + 1]]) == key(scores[idx[i]]) {
            k += 1;
        }
        let avg = (i + k) as f64 / 2.0 + 1.0;
        for &id in &idx[i..=k] {
            ranks[id] = avg;
        }
        i = k + 1;
    }
    ranks
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn rank_table(scores: &DMatrix<f64>, methods: &[String]) -> Result<RankTable> {
    let (trials, k) = scores.shape();
    if trials == 0 || k != methods.len() {
        return Err(Error::DimensionMismatch(format!(
            "{trials}×{k} score matrix for {} methods",
            methods.len()
        )));
    }
    let mut ranks = DMatrix::zeros(trials, k);
    for t in 0..trials {
        let row: Vec<f64> = scores.row(t).iter().copied().collect();
        for (j, r) in rank_descending(&row).into_iter().enumerate() {
            ranks[(t, j)] = r;
        }
    }
    let summaries = methods
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col: Vec<f64> = ranks.column(j).iter().copied().collect();
            col.sort_by(f64::total_cmp);
            RankSummary {
                method: name.clone(),
                median: quantile(&col, 0.5),
                lower_quartile: quantile(&col, 0.25),
                upper_quartile: quantile(&col, 0.75),
                mean: col.iter().sum::<f64>() / trials as f64,
            }
        })
        .collect();
    Ok(RankTable { ranks, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStructure {
    /// Percentage of off-diagonal covariance entries that are exactly zero.
    pub pct_zero_cov: f64,
    pub pct_zero_precision: f64,
    /// Off-diagonal zeros in each column.
    pub cov_zeros_per_column: Vec<usize>,
    pub precision_zeros_per_column: Vec<usize>,
    /// Columns whose only nonzero covariance entry is the diagonal.
    pub diagonal_only_columns: usize,
    pub diagonal_only_precision_columns: usize,
}

fn zero_counts(nonzero: impl Fn(usize, usize) -> bool, m: usize) -> (f64, Vec<usize>, usize) {
    let per_col: Vec<usize> = (0..m)
        .map(|j| (0..m).filter(|&i| i != j && !nonzero(i, j)).count())
        .collect();
    let total: usize = per_col.iter().sum();
    let off = m * (m - 1);
    let pct = if off == 0 { 0.0 } else { 100.0 * total as f64 / off as f64 };
    let diag_only = per_col.iter().filter(|&&z| z + 1 == m).count();
    (pct, per_col, diag_only)
}

/// Zero counts of `Σ̂` (exact) and of `Σ̂⁻¹` (relative to its largest entry).
pub fn zero_structure(est: &MvnEstimate, tol: f64) -> Result<ZeroStructure> {
    let m = est.dim();
    let cov = &est.covariance;
    let (_, prec) = spd_logdet_inverse(cov).ok_or(Error::NonPdCovariance)?;
    let (pct_zero_cov, cov_zeros_per_column, diagonal_only_columns) =
        zero_counts(|i, j| cov[(i, j)] != 0.0, m);
    let cut = tol * prec.amax();
    let (pct_zero_precision, precision_zeros_per_column, diagonal_only_precision_columns) =
        zero_counts(|i, j| prec[(i, j)].abs() >= cut, m);
    Ok(ZeroStructure {
        pct_zero_cov,
        pct_zero_precision,
        cov_zeros_per_column,
        precision_zeros_per_column,
        diagonal_only_columns,
        diagonal_only_precision_columns,
    })
}
