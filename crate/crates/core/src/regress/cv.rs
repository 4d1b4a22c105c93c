use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvScheme {
    /// K-fold; K is clamped to the number of rows.
    KFold { folds: usize },
    LeaveOneOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CvRule {
    MinimumScore,
    /// Most parsimonious setting within one standard error of the minimum.
    OneStandardError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvSpec {
    pub scheme: CvScheme,
    pub seed: u64,
    /// `None` uses the method's default rule.
    pub rule: Option<CvRule>,
}

impl CvSpec {
    pub fn tenfold(seed: u64) -> Self {
        Self {
            scheme: CvScheme::KFold { folds: 10 },
            seed,
            rule: None,
        }
    }

    pub fn loo() -> Self {
        Self {
            scheme: CvScheme::LeaveOneOut,
            seed: 0,
            rule: None,
        }
    }

    pub fn with_rule(mut self, rule: CvRule) -> Self {
        self.rule = Some(rule);
        self
    }
}

impl Default for CvSpec {
    fn default() -> Self {
        Self::tenfold(0)
    }
}

/// A model family indexed by a hyperparameter grid, ordered from the most
/// to the least parsimonious setting.
pub trait PathModel: Sync {
    fn grid_len(&self) -> usize;

    /// Fit on the training rows and predict the test rows at every grid
    /// position (`n_test × grid_len`).
    fn predict_path(
        &self,
        x_train: &DMatrix<f64>,
        y_train: &DVector<f64>,
        x_test: &DMatrix<f64>,
    ) -> DMatrix<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    /// Index into the model grid.
    pub chosen: usize,
    /// Mean held-out squared error per grid position.
    pub curve: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Held-out row indices for each fold. Deterministic in the seed; leave-one-out
/// ignores it.
pub fn cv_folds(n: usize, cv: &CvSpec) -> Vec<Vec<usize>> {
    match cv.scheme {
        CvScheme::LeaveOneOut => (0..n).map(|i| vec![i]).collect(),
        CvScheme::KFold { folds } => {
            let k = folds.clamp(1, n.max(1));
            let mut idx: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cv.seed);
            idx.shuffle(&mut rng);
            let mut out = vec![Vec::new(); k];
            for (pos, i) in idx.into_iter().enumerate() {
                out[pos % k].push(i);
            }
            for f in &mut out {
                f.sort_unstable();
            }
            out
        }
    }
}

fn rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), x.ncols(), |i, j| x[(idx[i], j)])
}

/// Score every grid position by K-fold (or leave-one-out) mean squared
/// prediction error and pick one by `rule`.
pub fn cross_validate(
    model: &dyn PathModel,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cv: &CvSpec,
    rule: CvRule,
) -> CvOutcome {
    let n = y.len();
    let g = model.grid_len();
    let folds = cv_folds(n, cv);
    if folds.len() < 2 || g == 0 {
        return CvOutcome {
            chosen: 0,
            curve: vec![f64::NAN; g],
            std_errors: vec![f64::NAN; g],
        };
    }
    let fold_mse: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|test| {
            let mut in_test = vec![false; n];
            for &i in test {
                in_test[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let x_train = rows(x, &train);
            let y_train = DVector::from_iterator(train.len(), train.iter().map(|&i| y[i]));
            let x_test = rows(x, test);
            let pred = model.predict_path(&x_train, &y_train, &x_test);
            (0..g)
                .map(|k| {
                    test.iter()
                        .enumerate()
                        .map(|(r, &i)| (y[i] - pred[(r, k)]).powi(2))
                        .sum::<f64>()
                        / test.len() as f64
                })
                .collect()
        })
        .collect();

    let kf = fold_mse.len() as f64;
    let mut curve = vec![0.0; g];
    let mut std_errors = vec![0.0; g];
    for k in 0..g {
        let mean = fold_mse.iter().map(|f| f[k]).sum::<f64>() / kf;
        let var = fold_mse.iter().map(|f| (f[k] - mean).powi(2)).sum::<f64>() / (kf - 1.0);
        curve[k] = mean;
        std_errors[k] = (var / kf).sqrt();
    }
    let best = curve
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(k, _)| k);
    let chosen = match rule {
        CvRule::MinimumScore => best,
        CvRule::OneStandardError => {
            let bound = curve[best] + std_errors[best];
            (0..=best).find(|&k| curve[k] <= bound).unwrap_or(best)
        }
    };
    CvOutcome {
        chosen,
        curve,
        std_errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct MeanOnly;

    impl PathModel for MeanOnly {
        fn grid_len(&self) -> usize {
            2
        }

        fn predict_path(
            &self,
            _x: &DMatrix<f64>,
            y: &DVector<f64>,
            x_test: &DMatrix<f64>,
        ) -> DMatrix<f64> {
            let mut out = DMatrix::zeros(x_test.nrows(), 2);
            out.column_mut(1).fill(y.mean());
            out.column_mut(0).fill(100.0);
            out
        }
    }

    #[test]
    fn loo_has_singleton_folds() {
        let folds = cv_folds(3, &CvSpec::loo());
        assert_eq!(folds, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn folds_partition_and_are_seeded() {
        let cv = CvSpec::tenfold(7);
        let a = cv_folds(23, &cv);
        assert_eq!(a, cv_folds(23, &cv));
        assert_eq!(a.len(), 10);
        let mut all: Vec<usize> = a.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(a.iter().all(|f| f.len() == 2 || f.len() == 3));
        assert_ne!(a, cv_folds(23, &CvSpec::tenfold(8)));
    }

    #[test]
    fn folds_clamp_to_rows() {
        assert_eq!(cv_folds(3, &CvSpec::tenfold(1)).len(), 3);
    }

    #[test]
    fn picks_minimum() {
        let x = DMatrix::zeros(6, 1);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let out = cross_validate(&MeanOnly, &x, &y, &CvSpec::loo(), CvRule::MinimumScore);
        assert_eq!(out.chosen, 1);
        assert!(out.curve[0] > out.curve[1]);
    }
}
