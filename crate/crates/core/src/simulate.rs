//! Synthetic monotone panels: random normal parameters, MVN or MVt draws,
//! and a uniform monotone mask.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleDistribution {
    Mvn,
    Mvt,
}

/// Smallest history length `rmono` produces.
pub const MIN_OBSERVED: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub m: usize,
    pub n: usize,
    pub distribution: SampleDistribution,
    /// Degrees of freedom for MVt; drawn with [`nu_draw`] when absent.
    pub nu: Option<f64>,
    pub seed: u64,
    pub wishart_df: f64,
    pub wishart_scale: f64,
    /// Rate of the exponential part of the ν prior.
    pub nu_rate: f64,
}

impl SimSpec {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            distribution: SampleDistribution::Mvn,
            nu: None,
            seed,
            wishart_df: (m + 3) as f64,
            wishart_scale: 1.0,
            nu_rate: 0.5,
        }
    }

    pub fn mvt(mut self, nu: Option<f64>) -> Self {
        self.distribution = SampleDistribution::Mvt;
        self.nu = nu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidConfig("m and n must be at least 1".into()));
        }
        if self.wishart_df < (self.m + 2) as f64 {
            return Err(Error::InvalidConfig(format!(
                "Wishart degrees of freedom {} below m + 2 = {}",
                self.wishart_df,
                self.m + 2
            )));
        }
        if !(self.wishart_scale > 0.0) {
            return Err(Error::InvalidConfig("Wishart scale must be positive".into()));
        }
        if let Some(nu) = self.nu {
            if !(nu > 1.0) {
                return Err(Error::InvalidConfig(format!("degrees of freedom {nu} must exceed 1")));
            }
        }
        if !(self.nu_rate > 0.0) {
            return Err(Error::InvalidConfig("nu rate must be positive".into()));
        }
        Ok(())
    }
}

// independent streams from one seed
const STREAM_PARAMS: u64 = 1;
const STREAM_SAMPLE: u64 = 2;
const STREAM_MASK: u64 = 3;
const STREAM_NU: u64 = 4;

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw `μ ~ N(0, I)` and `Σ ~ Inverse-Wishart(df, s·I)`.
pub fn rand_mvn_params(spec: &SimSpec) -> Result<(DVector<f64>, DMatrix<f64>)> {
    spec.validate()?;
    let mut rng = stream(spec.seed, STREAM_PARAMS);
    let m = spec.m;
    let mu = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
    // Bartlett factor of Wishart(df, I/s), then invert
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        let chi = ChiSquared::new(spec.wishart_df - i as f64).expect("df > m");
        a[(i, i)] = chi.sample(&mut rng).sqrt();
        for j in 0..i {
            a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let w = &a * a.transpose() / spec.wishart_scale;
    let mut sigma = w.cholesky().expect("Wishart draw is PD").inverse();
    crate::linalg::symmetrize(&mut sigma);
    Ok((mu, sigma))
}

/// `ν = Exp(rate) + 1`.
pub fn nu_draw(seed: u64, rate: f64) -> f64 {
    let mut rng = stream(seed, STREAM_NU);
    Exp::new(rate).expect("positive rate").sample(&mut rng) + 1.0
}

/// The degrees of freedom a spec samples with, if any.
pub fn effective_nu(spec: &SimSpec) -> Option<f64> {
    match spec.distribution {
        SampleDistribution::Mvn => None,
        SampleDistribution::Mvt => Some(spec.nu.unwrap_or_else(|| nu_draw(spec.seed, spec.nu_rate))),
    }
}

/// Draw `spec.n` i.i.d. rows from MVN or MVt with location `μ` and scale `Σ`.
pub fn sample(mu: &DVector<f64>, sigma: &DMatrix<f64>, spec: &SimSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let m = mu.len();
    if sigma.shape() != (m, m) {
        return Err(Error::DimensionMismatch(format!(
            "mean has {m} entries, covariance is {:?}",
            sigma.shape()
        )));
    }
    let l = sigma.clone().cholesky().ok_or(Error::NonPdCovariance)?.unpack();
    let nu = effective_nu(spec);
    let chi = nu.map(|v| ChiSquared::new(v).expect("nu > 1"));
    let mut rng = stream(spec.seed, STREAM_SAMPLE);
    let mut out = DMatrix::zeros(spec.n, m);
    for i in 0..spec.n {
        let z = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut row = &l * z;
        if let (Some(nu), Some(chi)) = (nu, &chi) {
            row *= (nu / chi.sample(&mut rng)).sqrt();
        }
        row += mu;
        out.set_row(i, &row.transpose());
    }
    Ok(out)
}

/// History lengths for a uniform monotone mask: the first column is full,
/// and each later length is uniform on `MIN_OBSERVED..=previous`.
pub fn rmono_lengths(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream(seed, STREAM_MASK);
    let mut lengths = Vec::with_capacity(m);
    let mut prev = n;
    for j in 0..m {
        if j > 0 && prev >= MIN_OBSERVED {
            prev = rng.random_range(MIN_OBSERVED..=prev);
        }
        lengths.push(prev);
    }
    lengths
}

/// Mask trailing (oldest) rows of `full` with a uniform monotone pattern.
pub fn rmono(full: &DMatrix<f64>, seed: u64) -> Grid {
    let (n, m) = full.shape();
    let lengths = rmono_lengths(n, m, seed);
    mask(full, &lengths)
}

/// Keep the first `lengths[j]` rows of column `j`.
pub fn mask(full: &DMatrix<f64>, lengths: &[usize]) -> Grid {
    let (n, m) = full.shape();
    let rows = (0..n)
        .map(|i| (0..m).map(|j| (i < lengths[j]).then(|| full[(i, j)])).collect())
        .collect();
    Grid::from_rows(rows).expect("rectangular")
}

/// Everything one simulated trial produced.
#[derive(Debug, Clone)]
pub struct Trial {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub nu: Option<f64>,
    pub full: DMatrix<f64>,
    pub panel: Grid,
}

pub fn simulate_trial(spec: &SimSpec) -> Result<Trial> {
    let (mu, sigma) = rand_mvn_params(spec)?;
    let full = sample(&mu, &sigma, spec)?;
    let panel = rmono(&full, spec.seed);
    Ok(Trial {
        nu: effective_nu(spec),
        mu,
        sigma,
        full,
        panel,
    })
}
