use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use monomvn::evaluate::{ell, kl_mvn, run_benchmark, BenchmarkSpec, Estimator, TruthSpec};
use monomvn::io::{format_g17, read_matrix, read_vector, write_matrix, write_vector};
use monomvn::monomle::{attach_factors, estimate, extract_asset_block, MonomvnConfig, MvnEstimate};
use monomvn::panel::{read_panel, validate_and_order, write_panel, Grid};
use monomvn::portfolio::{
    backtest, min_variance, read_dated_panel, read_dated_series, BacktestConfig, BacktestData,
};
use monomvn::regress::{Hyperparameter, Method};
use monomvn::simulate::{simulate_trial, SampleDistribution, SimSpec};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::{CliError, Stage};
use crate::manifest::RunManifest;

/// Missing or undefined numbers in output tables.
const NA: &str = "NA";

fn num(x: f64) -> String {
    if x.is_nan() {
        NA.into()
    } else {
        format_g17(x)
    }
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).stage(format!("creating {}", dir.display()))
}

fn create(dir: &Path, name: &str, man: &mut RunManifest) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    man.output(name);
    Ok(BufWriter::new(File::create(&path).stage(format!("writing {}", path.display()))?))
}

fn write_lines(dir: &Path, name: &str, lines: &[String], man: &mut RunManifest) -> Result<(), CliError> {
    let mut w = create(dir, name, man)?;
    for l in lines {
        writeln!(w, "{l}").stage(format!("writing {name}"))?;
    }
    w.flush().stage(format!("writing {name}"))
}

fn read_grid(path: &Path, oldest_first: bool, role: &str) -> Result<Grid, CliError> {
    let g = read_panel(path).stage(format!("reading {role} {}", path.display()))?;
    Ok(if oldest_first { g.reversed_rows() } else { g })
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse().map_err(|e: monomvn::Error| CliError::usage(e.to_string()))
}

fn parse_list<T: std::str::FromStr<Err = monomvn::Error>>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e: monomvn::Error| CliError::usage(e.to_string())))
        .collect()
}

fn write_estimate(dir: &Path, prefix: &str, est: &MvnEstimate, man: &mut RunManifest) -> Result<(), CliError> {
    let mu = format!("{prefix}mu.csv");
    let sigma = format!("{prefix}sigma.csv");
    write_vector(&est.labels, "mean", &est.mean, create(dir, &mu, man)?).stage(format!("writing {mu}"))?;
    write_matrix(&est.labels, &est.covariance, create(dir, &sigma, man)?).stage(format!("writing {sigma}"))
}

fn hyperparameter_cells(h: Option<Hyperparameter>) -> (String, String) {
    match h {
        None => (NA.into(), NA.into()),
        Some(Hyperparameter::Lambda(l)) => ("lambda".into(), format_g17(l)),
        Some(Hyperparameter::Components(k)) => ("components".into(), k.to_string()),
        Some(Hyperparameter::Fraction { fraction, .. }) => ("fraction".into(), format_g17(fraction)),
        Some(Hyperparameter::Steps(s)) => ("steps".into(), s.to_string()),
    }
}

pub fn cmd_estimate(a: &EstimateArgs, mut man: RunManifest) -> Result<(), CliError> {
    let method = parse_method(&a.method)?;
    let grid = read_grid(&a.input, a.oldest_first, "panel")?;
    man.input("panel", &a.input)?;
    let (grid, k) = match &a.factors {
        Some(f) => {
            let factors = read_grid(f, a.oldest_first, "factors")?;
            man.input("factors", f)?;
            attach_factors(&grid, &factors).stage("attaching factors")?
        }
        None => (grid, 0),
    };
    let (panel, order) = validate_and_order(&grid).stage("validating panel")?;
    let config = MonomvnConfig {
        method,
        parsimony_p: a.p,
        cv: a.cv.spec(a.seed),
        factor_count: k,
        mle_denominator: a.mle_denominator,
    };
    man.seed("cv", a.seed);
    let est = estimate(&panel, &order, &config).stage("estimation")?;

    out_dir(&a.out_dir)?;
    if k > 0 {
        let split = extract_asset_block(&est, k).stage("extracting asset block")?;
        write_estimate(&a.out_dir, "", &split.assets, &mut man)?;
        let flabels = est.labels[..k].to_vec();
        write_vector(&flabels, "mean", &split.factor_mean, create(&a.out_dir, "factor_mu.csv", &mut man)?)
            .stage("writing factor_mu.csv")?;
        write_matrix(&flabels, &split.factor_covariance, create(&a.out_dir, "factor_sigma.csv", &mut man)?)
            .stage("writing factor_sigma.csv")?;
    } else {
        write_estimate(&a.out_dir, "", &est, &mut man)?;
    }

    let mut lines = vec!["position,label,column,observed,method,hyperparameter,value,cv_score".to_string()];
    for r in &est.method_log {
        let (h, v) = hyperparameter_cells(r.selection.map(|s| s.hyperparameter));
        lines.push(format!(
            "{},{},{},{},{},{h},{v},{}",
            r.position,
            r.label,
            r.column + 1,
            r.observed,
            r.method.map_or("mean", Method::name),
            r.selection.map_or(NA.into(), |s| num(s.cv_score)),
        ));
    }
    write_lines(&a.out_dir, "method_log.csv", &lines, &mut man)?;
    if !est.positive_definite {
        eprintln!("monomvn: warning: estimated covariance is not positive definite");
    }
    man.write(&a.out_dir)
}

/// Parameters of a simulated panel, kept for later scoring.
#[derive(Debug, Serialize, Deserialize)]
pub struct Truth {
    pub labels: Vec<String>,
    pub distribution: SampleDistribution,
    pub nu: Option<f64>,
    pub seed: u64,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub lengths: Vec<usize>,
    pub spec: SimSpec,
}

pub fn cmd_simulate(a: &SimulateArgs, mut man: RunManifest) -> Result<(), CliError> {
    let mut spec = SimSpec::new(a.m, a.n, a.seed);
    if a.dist == Dist::Mvt {
        spec = spec.mvt(a.nu);
    } else if a.nu.is_some() {
        return Err(CliError::usage("--nu requires --dist mvt"));
    }
    spec.validate().stage("validating simulation spec")?;
    man.seed("simulation", a.seed);
    let trial = simulate_trial(&spec).stage("simulation")?;
    let labels = trial.panel.labels().to_vec();
    let lengths = (0..trial.panel.n_cols())
        .map(|j| trial.panel.column(j).iter().filter(|c| c.is_some()).count())
        .collect();
    let truth = Truth {
        labels,
        distribution: spec.distribution,
        nu: trial.nu,
        seed: a.seed,
        mu: trial.mu.iter().copied().collect(),
        sigma: trial.sigma.row_iter().map(|r| r.iter().copied().collect()).collect(),
        lengths,
        spec,
    };
    out_dir(&a.out_dir)?;
    write_panel(&trial.panel, a.out_dir.join("panel.csv")).stage("writing panel.csv")?;
    man.output("panel.csv");
    let text = serde_json::to_string_pretty(&truth).expect("truth serializes");
    std::fs::write(a.out_dir.join("truth.json"), text + "\n").stage("writing truth.json")?;
    man.output("truth.json");
    man.write(&a.out_dir)
}

fn read_truth(path: &Path) -> Result<Truth, CliError> {
    let text = std::fs::read_to_string(path).stage(format!("reading truth {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Core {
        stage: format!("reading truth {}", path.display()),
        source: monomvn::Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
    })
}

fn mismatch(msg: String) -> CliError {
    CliError::Core {
        stage: "matching estimate to truth".into(),
        source: monomvn::Error::DimensionMismatch(msg),
    }
}

/// Reorder an estimate to the truth's label order.
fn align(labels: &[String], mu: &DVector<f64>, sigma: &DMatrix<f64>, target: &[String]) -> Result<(DVector<f64>, DMatrix<f64>), CliError> {
    if labels.len() != target.len() {
        return Err(mismatch(format!("estimate has {} columns, truth has {}", labels.len(), target.len())));
    }
    let idx: Vec<usize> = target
        .iter()
        .map(|t| labels.iter().position(|l| l == t).ok_or_else(|| mismatch(format!("label {t:?} missing from estimate"))))
        .collect::<Result<_, _>>()?;
    let m = idx.len();
    Ok((
        DVector::from_fn(m, |i, _| mu[idx[i]]),
        DMatrix::from_fn(m, m, |i, j| sigma[(idx[i], idx[j])]),
    ))
}

#[derive(Debug, Serialize)]
struct EvaluationRecord {
    method: String,
    kl: Option<f64>,
    /// `None` when the estimate has no density (non-PD covariance).
    ell: Option<f64>,
    ell_se: Option<f64>,
    positive_definite: bool,
}

pub fn cmd_evaluate(a: &EvaluateArgs, mut man: RunManifest) -> Result<(), CliError> {
    let (mu_labels, mu) = read_vector(&a.mu).stage(format!("reading {}", a.mu.display()))?;
    let (sigma_labels, sigma) = read_matrix(&a.sigma).stage(format!("reading {}", a.sigma.display()))?;
    let truth = read_truth(&a.truth)?;
    for (role, p) in [("mu", &a.mu), ("sigma", &a.sigma), ("truth", &a.truth)] {
        man.input(role, p)?;
    }
    if mu_labels != sigma_labels {
        return Err(mismatch("mean and covariance labels differ".into()));
    }
    let (mu, sigma) = align(&sigma_labels, &mu, &sigma, &truth.labels)?;
    let q = MvnEstimate::new(truth.labels.clone(), mu, sigma);
    let m = truth.mu.len();
    let seed = a.seed.unwrap_or(truth.seed);
    man.seed("monte_carlo", seed);
    let spec = TruthSpec {
        mu: DVector::from_vec(truth.mu.clone()),
        sigma: DMatrix::from_fn(m, m, |i, j| truth.sigma[i][j]),
        distribution: truth.distribution,
        nu: truth.nu,
        mc_draws: a.mc_draws,
        seed,
    };
    let score = ell(&q, &spec).stage("scoring")?;
    let kl = if spec.distribution == SampleDistribution::Mvn && q.positive_definite {
        Some(kl_mvn(&q, &spec).stage("scoring")?)
    } else {
        None
    };
    let record = EvaluationRecord {
        method: a.method.clone(),
        kl,
        ell: score.value.is_finite().then_some(score.value),
        ell_se: score.std_error,
        positive_definite: q.positive_definite,
    };
    let line = serde_json::to_string(&record).expect("record serializes");
    println!("{line}");
    if let Some(dir) = &a.out_dir {
        out_dir(dir)?;
        write_lines(dir, "evaluation.json", &[line], &mut man)?;
        man.write(dir)?;
    }
    Ok(())
}

pub fn cmd_benchmark(a: &BenchmarkArgs, mut man: RunManifest) -> Result<(), CliError> {
    let estimators: Vec<Estimator> = parse_list(&a.estimators)?;
    let mut spec = BenchmarkSpec::new(a.trials, a.m, a.n, estimators, a.seed);
    if a.dist == Dist::Mvt {
        spec.distribution = SampleDistribution::Mvt;
    }
    spec.parsimony_p = a.p;
    spec.cv = a.cv.spec(a.seed);
    spec.mc_draws = a.mc_draws;
    man.seed("base", a.seed);
    let res = run_benchmark(&spec).stage("benchmark")?;

    out_dir(&a.out_dir)?;
    let mut ranks = vec!["method,median,lower_quartile,upper_quartile,mean,failures".to_string()];
    for (s, f) in res.ranks.summaries.iter().zip(&res.failures) {
        ranks.push(format!(
            "{},{},{},{},{},{f}",
            s.method,
            num(s.median),
            num(s.lower_quartile),
            num(s.upper_quartile),
            num(s.mean)
        ));
    }
    write_lines(&a.out_dir, "ranks.csv", &ranks, &mut man)?;

    let mut long = vec!["trial,seed,method,ell,ell_se,kl,rank,positive_definite".to_string()];
    for t in 0..a.trials {
        for (j, name) in res.names.iter().enumerate() {
            long.push(format!(
                "{},{},{name},{},{},{},{},{}",
                t + 1,
                spec.trial_seed(t),
                num(res.ell[(t, j)]),
                num(res.ell_se[(t, j)]),
                num(res.kl[(t, j)]),
                num(res.ranks.ranks[(t, j)]),
                res.positive_definite[(t, j)]
            ));
        }
    }
    write_lines(&a.out_dir, "ell_long.csv", &long, &mut man)?;
    man.write(&a.out_dir)
}

pub fn cmd_portfolio(a: &PortfolioArgs, mut man: RunManifest) -> Result<(), CliError> {
    let (labels, sigma) = read_matrix(&a.sigma).stage(format!("reading {}", a.sigma.display()))?;
    man.input("sigma", &a.sigma)?;
    let w = min_variance(&sigma, !a.allow_short).stage("portfolio optimization")?;
    out_dir(&a.out_dir)?;
    let mut lines = vec!["label,weight".to_string()];
    lines.extend(labels.iter().zip(&w.weights).map(|(l, x)| format!("{l},{}", format_g17(*x))));
    write_lines(&a.out_dir, "weights.csv", &lines, &mut man)?;
    man.write(&a.out_dir)
}

pub fn cmd_backtest(a: &BacktestArgs, mut man: RunManifest) -> Result<(), CliError> {
    let estimators = parse_list(&a.estimators)?;
    let returns = read_dated_panel(&a.returns).stage(format!("reading returns {}", a.returns.display()))?;
    let rf = read_dated_series(&a.riskfree).stage(format!("reading riskfree {}", a.riskfree.display()))?;
    let mkt = read_dated_series(&a.market).stage(format!("reading market {}", a.market.display()))?;
    let inputs: [(&str, &PathBuf); 3] = [("returns", &a.returns), ("riskfree", &a.riskfree), ("market", &a.market)];
    for (role, p) in inputs {
        man.input(role, p)?;
    }
    let data = BacktestData::new(returns, rf, mkt).stage("aligning inputs")?;
    let config = BacktestConfig {
        estimators,
        parsimony_p: a.p,
        factor_parsimony_p: a.factor_p,
        cv: a.cv.spec(a.seed),
        subsample: a.subsample,
        window: a.window,
        min_history: a.min_history,
        hold: a.hold,
        paths: a.paths,
        seed: a.seed,
        periods_per_year: a.periods_per_year,
        rebalance_each_period: a.rebalance_each_period,
        start: a.start,
    };
    man.seed("paths", a.seed);
    let reports = backtest(&data, &config).stage("backtest")?;

    out_dir(&a.out_dir)?;
    let mut table = vec!["method,mean,sd,sharpe,te,cm,wmin".to_string()];
    let mut paths = vec!["method,path,mean,sd,sharpe,te,cm,active,failures".to_string()];
    for r in &reports {
        table.push(format!(
            "{},{},{},{},{},{},{}",
            r.estimator,
            num(r.mean),
            num(r.sd),
            num(r.sharpe),
            num(r.tracking_error),
            num(r.market_correlation),
            num(r.wmin)
        ));
        for p in &r.paths {
            let s = &p.stats;
            paths.push(format!(
                "{},{},{},{},{},{},{},{},{}",
                r.estimator,
                p.path + 1,
                num(s.mean),
                num(s.sd),
                num(s.sharpe),
                num(s.tracking_error),
                num(s.market_correlation),
                num(p.mean_active),
                p.failures
            ));
        }
    }
    write_lines(&a.out_dir, "table.csv", &table, &mut man)?;
    write_lines(&a.out_dir, "paths.csv", &paths, &mut man)?;
    man.write(&a.out_dir)
}
