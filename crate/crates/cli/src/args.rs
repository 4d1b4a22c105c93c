use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use monomvn::regress::{CvRule, CvScheme, CvSpec};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "monomvn", version, about = "Monotone missing-data MVN estimation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw random parameters and a monotone panel.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Estimate the mean and covariance of a monotone panel.
    #[command(args_override_self = true)]
    Estimate(EstimateArgs),
    /// Score an estimate against a simulated truth.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
    /// Repeat simulate, estimate and score; write rank tables.
    #[command(args_override_self = true)]
    Benchmark(BenchmarkArgs),
    /// Minimum-variance weights for a covariance matrix.
    #[command(args_override_self = true)]
    Portfolio(PortfolioArgs),
    /// Randomized subsample backtest of min-variance portfolios.
    #[command(args_override_self = true)]
    Backtest(BacktestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Estimate(_) => "estimate",
            Command::Evaluate(_) => "evaluate",
            Command::Benchmark(_) => "benchmark",
            Command::Portfolio(_) => "portfolio",
            Command::Backtest(_) => "backtest",
        }
    }
}

/// Accepted by every subcommand; expanded before parsing.
#[derive(Debug, Args, Clone, Serialize)]
pub struct ConfigArg {
    /// File of key=value lines; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CvKind {
    Tenfold,
    Loo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Minimum cross-validated error.
    Min,
    /// One-standard-error rule.
    #[value(name = "1se", alias = "one-se")]
    OneSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Mvn,
    Mvt,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct CvArgs {
    #[arg(long, value_enum, default_value = "tenfold")]
    pub cv: CvKind,
    /// Number of folds for `--cv tenfold`.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Selection rule; defaults to one-SE for lasso/lar/stepwise and min otherwise.
    #[arg(long, value_enum)]
    pub cv_rule: Option<RuleKind>,
}

impl CvArgs {
    pub fn spec(&self, seed: u64) -> CvSpec {
        let scheme = match self.cv {
            CvKind::Tenfold => CvScheme::KFold { folds: self.folds },
            CvKind::Loo => CvScheme::LeaveOneOut,
        };
        CvSpec {
            scheme,
            seed,
            rule: self.cv_rule.map(|r| match r {
                RuleKind::Min => CvRule::MinimumScore,
                RuleKind::OneSe => CvRule::OneStandardError,
            }),
        }
    }
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "mvn")]
    pub dist: Dist,
    /// Fixed degrees of freedom for MVt; drawn from the prior when absent.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct EstimateArgs {
    /// Panel CSV, most recent row first.
    pub input: PathBuf,
    #[arg(long, default_value = "pcr")]
    pub method: String,
    /// Parsimonious proportion in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub cv: CvArgs,
    /// Seed for CV fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Factor CSV with the same rows as the panel; the asset block is written.
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// Divide by n instead of n-1.
    #[arg(long)]
    pub mle_denominator: bool,
    /// Input rows are oldest first.
    #[arg(long)]
    pub oldest_first: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    /// truth.json written by `simulate`.
    #[arg(long)]
    pub truth: PathBuf,
    /// Name reported in the output record.
    #[arg(long, default_value = "estimate")]
    pub method: String,
    #[arg(long, default_value_t = 10_000)]
    pub mc_draws: usize,
    /// Seed for Monte Carlo scoring; defaults to the truth's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write evaluation.json and a manifest here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct BenchmarkArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "mvn")]
    pub dist: Dist,
    /// Comma-separated estimators, e.g. `pcr,plsr,ridge,lasso,complete,observed`.
    #[arg(long, default_value = "pcr,plsr,ridge,lasso,complete,observed")]
    pub estimators: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub cv: CvArgs,
    #[arg(long, default_value_t = 10_000)]
    pub mc_draws: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct PortfolioArgs {
    /// Labelled covariance CSV.
    #[arg(long)]
    pub sigma: PathBuf,
    /// Drop the no-short-selling constraint.
    #[arg(long)]
    pub allow_short: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct BacktestArgs {
    /// Dated returns CSV, oldest row first.
    #[arg(long)]
    pub returns: PathBuf,
    #[arg(long)]
    pub riskfree: PathBuf,
    #[arg(long)]
    pub market: PathBuf,
    #[arg(long, default_value = "eq,min,com,rm,fmin,fcom,frm,pcr,lasso,ridge,fpcr,flasso,ffp")]
    pub estimators: String,
    #[arg(long, default_value_t = 0.25)]
    pub p: f64,
    /// Parsimonious proportion for factor-augmented estimators.
    #[arg(long, default_value_t = 0.0)]
    pub factor_p: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub cv: CvArgs,
    #[arg(long, default_value_t = 250)]
    pub subsample: usize,
    #[arg(long, default_value_t = 60)]
    pub window: usize,
    #[arg(long, default_value_t = 12)]
    pub min_history: usize,
    #[arg(long, default_value_t = 12)]
    pub hold: usize,
    #[arg(long, default_value_t = 50)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12.0)]
    pub periods_per_year: f64,
    /// Reset to target weights every period.
    #[arg(long)]
    pub rebalance_each_period: bool,
    /// First rebalance row (0-based); defaults to min-history.
    #[arg(long)]
    pub start: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub config: ConfigArg,
}
