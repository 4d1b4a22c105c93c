use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complete_estimator, ell, kl_mvn, observed_estimator, rank_table, RankTable, TruthSpec};
use crate::error::{Error, Result};
use crate::monomle::{estimate, MonomvnConfig, MvnEstimate};
use crate::panel::{validate_and_order, MonotoneOrder, ReturnPanel};
use crate::regress::{CvSpec, Method};
use crate::simulate::{simulate_trial, SampleDistribution, SimSpec};

/// Anything that turns a monotone panel into `(μ̂, Σ̂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Monomvn(Method),
    Complete,
    Observed,
}

impl Estimator {
    pub fn name(&self) -> String {
        match self {
            Estimator::Monomvn(m) => m.name().to_string(),
            Estimator::Complete => "complete".into(),
            Estimator::Observed => "observed".into(),
        }
    }

    pub fn run(
        &self,
        panel: &ReturnPanel,
        order: &MonotoneOrder,
        parsimony_p: f64,
        cv: &CvSpec,
    ) -> Result<MvnEstimate> {
        match *self {
            Estimator::Monomvn(method) => {
                let config = MonomvnConfig {
                    method,
                    parsimony_p,
                    cv: *cv,
                    ..MonomvnConfig::default()
                };
                estimate(panel, order, &config)
            }
            Estimator::Complete => complete_estimator(panel, order),
            Estimator::Observed => observed_estimator(panel, order),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "complete" => Ok(Estimator::Complete),
            "observed" => Ok(Estimator::Observed),
            other => other.parse().map(Estimator::Monomvn),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub trials: usize,
    pub m: usize,
    pub n: usize,
    pub distribution: SampleDistribution,
    pub estimators: Vec<Estimator>,
    pub parsimony_p: f64,
    pub cv: CvSpec,
    pub seed: u64,
    /// Monte Carlo draws when the truth is MVt.
    pub mc_draws: usize,
}

impl BenchmarkSpec {
    pub fn new(trials: usize, m: usize, n: usize, estimators: Vec<Estimator>, seed: u64) -> Self {
        Self {
            trials,
            m,
            n,
            distribution: SampleDistribution::Mvn,
            estimators,
            parsimony_p: 1.0,
            cv: CvSpec::tenfold(seed),
            seed,
            mc_draws: 10_000,
        }
    }

    pub fn trial_seed(&self, t: usize) -> u64 {
        self.seed.wrapping_add(t as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub names: Vec<String>,
    /// trials × estimators ELL; `-inf` for failed or non-PD estimates.
    pub ell: DMatrix<f64>,
    /// Monte Carlo standard errors (NaN for closed-form scores).
    pub ell_se: DMatrix<f64>,
    /// KL divergence for MVN truths (NaN otherwise or when undefined).
    pub kl: DMatrix<f64>,
    pub positive_definite: DMatrix<bool>,
    pub failures: Vec<usize>,
    pub ranks: RankTable,
}

struct TrialRow {
    ell: Vec<f64>,
    se: Vec<f64>,
    kl: Vec<f64>,
    pd: Vec<bool>,
    failed: Vec<bool>,
}

fn truth_for(spec: &SimSpec, mu: nalgebra::DVector<f64>, sigma: DMatrix<f64>, nu: Option<f64>, draws: usize) -> TruthSpec {
    TruthSpec {
        mu,
        sigma,
        distribution: spec.distribution,
        nu,
        mc_draws: draws,
        // out-of-sample draws independent of the training panel
        seed: spec.seed ^ 0x5dee_ce66_d1ce_5eed,
    }
}

fn score_trial(spec: &BenchmarkSpec, t: usize) -> Result<TrialRow> {
    let seed = spec.trial_seed(t);
    let mut sim = SimSpec::new(spec.m, spec.n, seed);
    if spec.distribution == SampleDistribution::Mvt {
        sim = sim.mvt(None);
    }
    let trial = simulate_trial(&sim)?;
    let (panel, order) = validate_and_order(&trial.panel)?;
    let truth = truth_for(&sim, trial.mu, trial.sigma, trial.nu, spec.mc_draws);
    let cv = CvSpec { seed, ..spec.cv };
    let k = spec.estimators.len();
    let mut row = TrialRow {
        ell: vec![f64::NEG_INFINITY; k],
        se: vec![f64::NAN; k],
        kl: vec![f64::NAN; k],
        pd: vec![false; k],
        failed: vec![false; k],
    };
    for (j, est) in spec.estimators.iter().enumerate() {
        match est.run(&panel, &order, spec.parsimony_p, &cv) {
            Ok(q) => {
                row.pd[j] = q.positive_definite;
                let score = ell(&q, &truth)?;
                row.ell[j] = score.value;
                row.se[j] = score.std_error.unwrap_or(f64::NAN);
                if truth.distribution == SampleDistribution::Mvn && q.positive_definite {
                    row.kl[j] = kl_mvn(&q, &truth)?;
                }
            }
            Err(_) => row.failed[j] = true,
        }
    }
    Ok(row)
}

/// Repeat simulate → estimate → score over independent trials.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchmarkResult> {
    if spec.trials == 0 || spec.estimators.is_empty() {
        return Err(Error::InvalidConfig("benchmark needs trials and estimators".into()));
    }
    let rows: Vec<TrialRow> = (0..spec.trials)
        .into_par_iter()
        .map(|t| score_trial(spec, t))
        .collect::<Result<_>>()?;
    let (t, k) = (spec.trials, spec.estimators.len());
    let ell = DMatrix::from_fn(t, k, |i, j| rows[i].ell[j]);
    let names: Vec<String> = spec.estimators.iter().map(Estimator::name).collect();
    let ranks = rank_table(&ell, &names)?;
    Ok(BenchmarkResult {
        ell_se: DMatrix::from_fn(t, k, |i, j| rows[i].se[j]),
        kl: DMatrix::from_fn(t, k, |i, j| rows[i].kl[j]),
        positive_definite: DMatrix::from_fn(t, k, |i, j| rows[i].pd[j]),
        failures: (0..k).map(|j| rows.iter().filter(|r| r.failed[j]).count()).collect(),
        names,
        ell,
        ranks,
    })
}

/// Random-dimension trials comparing two parsimonious proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsimonySpec {
    pub trials: usize,
    pub m_min: usize,
    pub m_max: usize,
    /// `n | m` is uniform on `max(10, ⌊m/2⌋) ..= n_multiplier · m`.
    pub n_multiplier: usize,
    pub method: Method,
    pub p_a: f64,
    pub p_b: f64,
    pub cv: CvSpec,
    pub seed: u64,
}

impl ParsimonySpec {
    pub fn new(trials: usize, method: Method, seed: u64) -> Self {
        Self {
            trials,
            m_min: 5,
            m_max: 40,
            n_multiplier: 2,
            method,
            p_a: 0.25,
            p_b: 0.0,
            cv: CvSpec::loo(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsimonyComparison {
    pub dims: Vec<(usize, usize)>,
    pub ell_a: Vec<f64>,
    pub ell_b: Vec<f64>,
    /// Trials where `p_a` scored strictly higher than `p_b`.
    pub wins: usize,
    pub fraction: f64,
}

pub fn compare_parsimony(spec: &ParsimonySpec) -> Result<ParsimonyComparison> {
    if spec.m_min < 2 || spec.m_max < spec.m_min || spec.trials == 0 {
        return Err(Error::InvalidConfig("bad dimension range or trial count".into()));
    }
    let rows: Vec<((usize, usize), f64, f64)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| {
            let seed = spec.seed.wrapping_add(t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(spec.m_min..=spec.m_max);
            let lo = (m / 2).max(10);
            let n = rng.random_range(lo..=(spec.n_multiplier * m).max(lo));
            let sim = SimSpec::new(m, n, seed);
            let trial = simulate_trial(&sim)?;
            let (panel, order) = validate_and_order(&trial.panel)?;
            let truth = TruthSpec::mvn(trial.mu, trial.sigma);
            let cv = CvSpec { seed, ..spec.cv };
            let score = |p: f64| -> Result<f64> {
                let q = Estimator::Monomvn(spec.method).run(&panel, &order, p, &cv)?;
                Ok(ell(&q, &truth)?.value)
            };
            Ok(((m, n), score(spec.p_a)?, score(spec.p_b)?))
        })
        .collect::<Result<_>>()?;
    let wins = rows.iter().filter(|(_, a, b)| a > b).count();
    Ok(ParsimonyComparison {
        dims: rows.iter().map(|r| r.0).collect(),
        ell_a: rows.iter().map(|r| r.1).collect(),
        ell_b: rows.iter().map(|r| r.2).collect(),
        wins,
        fraction: wins as f64 / spec.trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_names_round_trip() {
        for e in [
            Estimator::Complete,
            Estimator::Observed,
            Estimator::Monomvn(Method::Pcr),
            Estimator::Monomvn(Method::Stepwise),
        ] {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("nonsense".parse::<Estimator>().is_err());
    }

    #[test]
    fn small_benchmark_is_deterministic() {
        let spec = BenchmarkSpec::new(
            3,
            5,
            30,
            vec![Estimator::Monomvn(Method::Ridge), Estimator::Complete, Estimator::Observed],
            42,
        );
        let a = run_benchmark(&spec).unwrap();
        let b = run_benchmark(&spec).unwrap();
        assert_eq!(a.ell, b.ell);
        assert_eq!(a.ranks.ranks.nrows(), 3);
        // ELL order is the reverse of KL order wherever both exist
        for t in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let (ki, kj) = (a.kl[(t, i)], a.kl[(t, j)]);
                    if ki.is_finite() && kj.is_finite() {
                        assert_eq!(a.ell[(t, i)] > a.ell[(t, j)], ki < kj);
                    }
                }
            }
        }
    }

    #[test]
    fn mvt_benchmark_reports_standard_errors() {
        let mut spec = BenchmarkSpec::new(2, 4, 40, vec![Estimator::Monomvn(Method::Pcr)], 7);
        spec.distribution = SampleDistribution::Mvt;
        spec.mc_draws = 2000;
        let r = run_benchmark(&spec).unwrap();
        assert!(r.ell_se.iter().all(|s| s.is_finite() && *s > 0.0));
        assert!(r.kl.iter().all(|k| k.is_nan()));
    }

    #[test]
    fn parsimony_comparison_runs() {
        let mut spec = ParsimonySpec::new(2, Method::Ridge, 3);
        spec.m_max = 8;
        spec.cv = CvSpec::tenfold(0);
        let c = compare_parsimony(&spec).unwrap();
        assert_eq!(c.dims.len(), 2);
        assert!(c.dims.iter().all(|&(m, n)| (5..=8).contains(&m) && n >= 10));
    }
}
