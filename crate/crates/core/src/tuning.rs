//! Repeated K-fold cross-validation grid search for the PLS component count
//! and the Lasso shrinkage weight. RVM has no tunable parameter and is not
//! accepted here.

use crate::data::Scaler;
use crate::learners::{lasso_fit_warm, pls_fit, FitError};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("window of {rows} rows is smaller than {folds} folds")]
    WindowTooSmall { rows: usize, folds: usize },
    #[error("training fold of {fold_rows} rows cannot fit {components} components")]
    FoldTooSmall {
        fold_rows: usize,
        components: usize,
    },
    #[error("fit failure during cross-validation: {0}")]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunedLearner {
    Pls,
    Lasso,
}

/// Ordered grid of candidate parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamGrid<T> {
    Components(Vec<usize>),
    Shrinkage(Vec<T>),
}

impl<T: Real> ParamGrid<T> {
    pub fn len(&self) -> usize {
        match self {
            ParamGrid::Components(g) => g.len(),
            ParamGrid::Shrinkage(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Default PLS grid: 1..=min(25, d).
    pub fn default_components(d: usize) -> Self {
        ParamGrid::Components((1..=d.min(25).max(1)).collect())
    }

    /// Default Lasso grid: 30 logarithmically spaced points over [1e-6, 1].
    pub fn default_shrinkage() -> Self {
        let pts = 30;
        let grid = (0..pts)
            .map(|i| {
                let frac = i as f64 / (pts - 1) as f64;
                T::of(10f64.powf(-6.0 * (1.0 - frac)))
            })
            .collect();
        ParamGrid::Shrinkage(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamValue<T> {
    Components(usize),
    Shrinkage(T),
}

impl<T: Real> std::fmt::Display for ParamValue<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Components(l) => write!(f, "L={l}"),
            ParamValue::Shrinkage(v) => write!(f, "lambda={v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TuningSpec<T: Real> {
    pub learner: TunedLearner,
    pub grid: ParamGrid<T>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl<T: Real> TuningSpec<T> {
    /// Offline defaults: 10 folds, 20 repeats.
    pub fn offline(learner: TunedLearner, grid: ParamGrid<T>, seed: u64) -> Self {
        Self {
            learner,
            grid,
            folds: 10,
            repeats: 20,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TuningResult<T: Real> {
    pub best: ParamValue<T>,
    /// Mean CV-RMSE per grid point, in grid order.
    pub cv_curve: Vec<T>,
    /// Raw fold RMSEs per grid point (folds x repeats entries each).
    pub per_fold: Vec<Vec<T>>,
    pub repeats_used: usize,
    /// Set when a per-window call coerced the repeat count down to one.
    pub coerced_repeats: bool,
}

fn identity_scaler<T: Real>(p: usize) -> Scaler<T> {
    Scaler {
        means: DVector::zeros(p),
        stds: DVector::from_element(p, T::one()),
        y_mean: T::zero(),
        y_std: T::one(),
        retained: vec![true; p],
    }
}

/// Repeated K-fold cross-validation over the grid. Folds are assigned by a
/// seeded uniform random permutation per repeat; given the seed the result is
/// deterministic, with a fixed reduction order over folds and repeats.
pub fn cv_tune<T: Real>(
    xs: &DMatrix<T>,
    ys: &DVector<T>,
    spec: &TuningSpec<T>,
) -> Result<TuningResult<T>, TuneError> {
    cv_tune_inner(xs, ys, spec, false)
}

/// Single-repeat variant used inside moving windows; a larger configured
/// repeat count is coerced to one and flagged in the result.
pub fn per_window_tune<T: Real>(
    xs: &DMatrix<T>,
    ys: &DVector<T>,
    spec: &TuningSpec<T>,
) -> Result<TuningResult<T>, TuneError> {
    let coerced = spec.repeats != 1;
    let spec = TuningSpec {
        repeats: 1,
        ..spec.clone()
    };
    cv_tune_inner(xs, ys, &spec, coerced)
}

fn cv_tune_inner<T: Real>(
    xs: &DMatrix<T>,
    ys: &DVector<T>,
    spec: &TuningSpec<T>,
    coerced: bool,
) -> Result<TuningResult<T>, TuneError> {
    if spec.grid.is_empty() {
        return Err(TuneError::EmptyGrid);
    }
    if spec.folds < 2 {
        return Err(TuneError::TooFewFolds(spec.folds));
    }
    let n = xs.nrows();
    if n < spec.folds {
        return Err(TuneError::WindowTooSmall {
            rows: n,
            folds: spec.folds,
        });
    }
    let min_train = n - n.div_ceil(spec.folds);
    if let ParamGrid::Components(grid) = &spec.grid {
        let max_l = grid.iter().copied().max().unwrap_or(1);
        if min_train < max_l + 1 {
            return Err(TuneError::FoldTooSmall {
                fold_rows: min_train,
                components: max_l,
            });
        }
    }

    let grid_len = spec.grid.len();
    let mut per_fold: Vec<Vec<T>> = vec![Vec::with_capacity(spec.folds * spec.repeats); grid_len];

    for rep in 0..spec.repeats {
        let rep_seed = spec
            .seed
            .wrapping_add((rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);

        // fold f takes every folds-th element of the permutation
        for fold in 0..spec.folds {
            let valid: Vec<usize> = order
                .iter()
                .copied()
                .skip(fold)
                .step_by(spec.folds)
                .collect();
            let train: Vec<usize> = order
                .iter()
                .copied()
                .filter(|i| !valid.contains(i))
                .collect();
            let x_train = select_rows(xs, &train);
            let y_train = select_vec(ys, &train);
            let x_valid = select_rows(xs, &valid);
            let y_valid = select_vec(ys, &valid);
            let p = xs.ncols();

            // visit shrinkage candidates from strongest to weakest and warm
            // start each solve from the previous solution (solution path);
            // the visiting order is fixed, so results stay independent of
            // the grid's order
            let visit: Vec<usize> = match &spec.grid {
                ParamGrid::Shrinkage(grid) => {
                    let mut idx: Vec<usize> = (0..grid_len).collect();
                    idx.sort_by(|&a, &b| {
                        grid[b].partial_cmp(&grid[a]).expect("finite grid")
                    });
                    idx
                }
                ParamGrid::Components(_) => (0..grid_len).collect(),
            };
            let mut warm: Option<_> = None;
            for g in visit {
                let beta = match (&spec.grid, spec.learner) {
                    (ParamGrid::Components(grid), TunedLearner::Pls) => {
                        let model =
                            pls_fit(&x_train, &y_train, grid[g], identity_scaler(p))?;
                        model.beta
                    }
                    (ParamGrid::Shrinkage(grid), TunedLearner::Lasso) => {
                        let model = lasso_fit_warm(
                            &x_train,
                            &y_train,
                            grid[g],
                            identity_scaler(p),
                            warm.as_ref(),
                        )?;
                        warm = Some(model.beta.clone());
                        model.beta
                    }
                    _ => return Err(TuneError::EmptyGrid),
                };
                let residual = &y_valid - &x_valid * beta;
                let rmse =
                    (residual.dot(&residual) / T::from_count(valid.len())).sqrt();
                per_fold[g].push(rmse);
            }
        }
    }

    let cv_curve: Vec<T> = per_fold
        .iter()
        .map(|errs| errs.iter().copied().sum::<T>() / T::from_count(errs.len()))
        .collect();

    // ties within 1e-12 resolve to the most parsimonious model:
    // smallest L, largest lambda
    let min = cv_curve
        .iter()
        .copied()
        .fold(T::infinity(), |a, b| a.min(b));
    let tie_tol = T::of(1e-12);
    let best = match &spec.grid {
        ParamGrid::Components(grid) => {
            let mut best_idx = 0;
            let mut best_l = usize::MAX;
            for (g, &l) in grid.iter().enumerate() {
                if cv_curve[g] <= min + tie_tol && l < best_l {
                    best_l = l;
                    best_idx = g;
                }
            }
            ParamValue::Components(grid[best_idx])
        }
        ParamGrid::Shrinkage(grid) => {
            let mut best_idx = 0;
            let mut best_lambda = -T::infinity();
            for (g, &lambda) in grid.iter().enumerate() {
                if cv_curve[g] <= min + tie_tol && lambda > best_lambda {
                    best_lambda = lambda;
                    best_idx = g;
                }
            }
            ParamValue::Shrinkage(grid[best_idx])
        }
    };

    Ok(TuningResult {
        best,
        cv_curve,
        per_fold,
        repeats_used: spec.repeats,
        coerced_repeats: coerced,
    })
}

fn select_rows<T: Real>(x: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    let mut out = DMatrix::zeros(idx.len(), x.ncols());
    for (row, &i) in idx.iter().enumerate() {
        out.set_row(row, &x.row(i));
    }
    out
}

fn select_vec<T: Real>(y: &DVector<T>, idx: &[usize]) -> DVector<T> {
    DVector::from_fn(idx.len(), |row, _| y[idx[row]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn problem(n: usize, p: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = StdRng::seed_from_u64(seed);
        let xs = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0f64..1.0));
        let beta = DVector::from_fn(p, |j, _| if j < 2 { 1.0 } else { 0.0 });
        let ys = &xs * beta
            + DVector::from_fn(n, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.2 * z
            });
        (xs, ys)
    }

    #[test]
    fn single_value_grid_is_returned() {
        let (xs, ys) = problem(40, 3, 1);
        let spec = TuningSpec {
            learner: TunedLearner::Pls,
            grid: ParamGrid::Components(vec![2]),
            folds: 5,
            repeats: 2,
            seed: 7,
        };
        let result = cv_tune(&xs, &ys, &spec).unwrap();
        assert_eq!(result.best, ParamValue::Components(2));
        assert_eq!(result.cv_curve.len(), 1);
    }

    #[test]
    fn same_seed_is_deterministic() {
        let (xs, ys) = problem(50, 4, 2);
        let spec = TuningSpec {
            learner: TunedLearner::Lasso,
            grid: ParamGrid::Shrinkage(vec![0.01, 0.1, 1.0]),
            folds: 5,
            repeats: 3,
            seed: 99,
        };
        let a = cv_tune(&xs, &ys, &spec).unwrap();
        let b = cv_tune(&xs, &ys, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cv_curve_invariant_to_grid_order() {
        let (xs, ys) = problem(45, 4, 3);
        let forward = TuningSpec {
            learner: TunedLearner::Lasso,
            grid: ParamGrid::Shrinkage(vec![0.01, 0.1, 1.0]),
            folds: 5,
            repeats: 2,
            seed: 5,
        };
        let backward = TuningSpec {
            grid: ParamGrid::Shrinkage(vec![1.0, 0.1, 0.01]),
            ..forward.clone()
        };
        let f = cv_tune(&xs, &ys, &forward).unwrap();
        let b = cv_tune(&xs, &ys, &backward).unwrap();
        assert_eq!(f.cv_curve[0], b.cv_curve[2]);
        assert_eq!(f.cv_curve[2], b.cv_curve[0]);
        assert_eq!(f.best, b.best);
    }

    #[test]
    fn duplicate_grid_values_keep_best_param() {
        let (xs, ys) = problem(45, 4, 8);
        let spec = TuningSpec {
            learner: TunedLearner::Pls,
            grid: ParamGrid::Components(vec![1, 2, 3, 4]),
            folds: 5,
            repeats: 2,
            seed: 13,
        };
        let base = cv_tune(&xs, &ys, &spec).unwrap();
        let dup = TuningSpec {
            grid: ParamGrid::Components(vec![1, 2, 3, 4, 1, 2, 3, 4]),
            ..spec
        };
        let dup_result = cv_tune(&xs, &ys, &dup).unwrap();
        assert_eq!(base.best, dup_result.best);
    }

    #[test]
    fn folds_partition_index_set() {
        // mirror the internal fold assignment and check the partition property
        let n = 23;
        let folds = 5;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut seen = vec![false; n];
        for fold in 0..folds {
            for i in order.iter().copied().skip(fold).step_by(folds) {
                assert!(!seen[i], "index {i} assigned twice");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn per_window_coerces_repeats() {
        let (xs, ys) = problem(30, 3, 4);
        let spec = TuningSpec {
            learner: TunedLearner::Pls,
            grid: ParamGrid::Components(vec![1, 2]),
            folds: 5,
            repeats: 20,
            seed: 3,
        };
        let result = per_window_tune(&xs, &ys, &spec).unwrap();
        assert_eq!(result.repeats_used, 1);
        assert!(result.coerced_repeats);
    }

    #[test]
    fn loo_on_ten_samples_is_valid() {
        let (xs, ys) = problem(10, 2, 6);
        let spec = TuningSpec {
            learner: TunedLearner::Pls,
            grid: ParamGrid::Components(vec![1, 2]),
            folds: 10,
            repeats: 1,
            seed: 1,
        };
        assert!(cv_tune(&xs, &ys, &spec).is_ok());
    }

    #[test]
    fn window_smaller_than_folds_errors() {
        let (xs, ys) = problem(8, 2, 6);
        let spec = TuningSpec {
            learner: TunedLearner::Pls,
            grid: ParamGrid::Components(vec![1]),
            folds: 10,
            repeats: 1,
            seed: 1,
        };
        match cv_tune(&xs, &ys, &spec) {
            Err(TuneError::WindowTooSmall { rows, folds }) => {
                assert_eq!(rows, 8);
                assert_eq!(folds, 10);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn pls_recovers_low_dimensional_structure() {
        // y depends on 2 latent directions + noise: best L in {1,2,3} for
        // most seeds
        let mut hits = 0;
        let total = 20;
        for seed in 0..total {
            let mut rng = StdRng::seed_from_u64(500 + seed);
            let n = 60;
            let p = 8;
            let latent = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-1.0f64..1.0));
            let mix = DMatrix::from_fn(2, p, |_, _| rng.gen_range(-1.0f64..1.0));
            let xs = &latent * &mix
                + DMatrix::from_fn(n, p, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    0.05 * z
                });
            let ys = latent.column(0) * 1.0 + latent.column(1) * 0.5
                + DVector::from_fn(n, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    0.1 * z
                });
            let spec = TuningSpec {
                learner: TunedLearner::Pls,
                grid: ParamGrid::Components((1..=6).collect()),
                folds: 5,
                repeats: 2,
                seed: seed as u64,
            };
            let result = cv_tune(&xs, &ys, &spec).unwrap();
            if let ParamValue::Components(l) = result.best {
                if (1..=3).contains(&l) {
                    hits += 1;
                }
            }
        }
        assert!(hits * 10 >= total * 9, "structure recovered {hits}/{total}");
    }
}
