//! One-step-ahead online prediction streams over a lagged design matrix:
//! fixed moving window, distance-adaptive moving window, and just-in-time
//! local modelling. Each query is predicted from labeled history only, then
//! its label joins the history.

use crate::data::{DesignMatrix, Scaler};
use crate::learners::{lasso_fit_warm, pls_fit, rvm_fit, FitError, FittedModel};
use crate::scalar::Real;
use crate::special::f_quantile_upper;
use crate::tuning::{
    per_window_tune, ParamGrid, ParamValue, TuneError, TunedLearner, TuningSpec,
};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ridge fraction added to the window covariance diagonal before inversion.
const COV_RIDGE: f64 = 1e-6;
const RVM_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum OnlineError {
    #[error("window size {0} below minimum of 2")]
    WindowTooSmall(usize),
    #[error("neighborhood size {0} below minimum of 2")]
    NeighborhoodTooSmall(usize),
    #[error("initial training set of {ts} rows cannot cover {needed} required rows")]
    InitialSetTooSmall { ts: usize, needed: usize },
    #[error("no test rows remain after the initial training set")]
    EmptyTestRegion,
    #[error("upper bound undefined for window {w} <= dimension {p}")]
    BoundUndefined { p: usize, w: usize },
    #[error("fit failure with no previous model to fall back on: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error("scaling failure: {0}")]
    Data(#[from] crate::data::DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Fixed moving window of the W most recent labeled points.
    Mw,
    /// Moving window grown while the query is a distance outlier.
    MwAdaptive,
    /// Local model on the nearest labeled neighbors, discarded per query.
    Jitl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Pls,
    Lasso,
    Rvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningMode {
    /// Tune once on the initial training set, reuse throughout.
    Ts,
    /// Re-tune inside every window or neighborhood.
    W,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OnlineConfig<T: Real> {
    pub scheme: Scheme,
    pub learner: LearnerKind,
    /// Window size for the moving-window schemes.
    pub window: usize,
    /// Neighborhood size for the just-in-time scheme.
    pub nn_count: usize,
    pub tuning_mode: TuningMode,
    /// Rows of the design matrix reserved as initial labeled history.
    pub initial_ts_size: usize,
    /// Significance level for the distance upper bound.
    pub alpha_md: T,
    /// Fractional window growth per escalation step.
    pub growth_factor: T,
    pub seed: u64,
    /// Component grid override; defaults to 1..=min(25, p).
    pub pls_grid: Option<Vec<usize>>,
    /// Shrinkage grid override; defaults to 30 log points over [1e-6, 1].
    pub lasso_grid: Option<Vec<T>>,
    pub cv_folds: usize,
    pub cv_repeats: usize,
}

impl<T: Real> OnlineConfig<T> {
    pub fn new(scheme: Scheme, learner: LearnerKind, initial_ts_size: usize) -> Self {
        Self {
            scheme,
            learner,
            window: 50,
            nn_count: 50,
            tuning_mode: TuningMode::Ts,
            initial_ts_size,
            alpha_md: T::of(0.01),
            growth_factor: T::of(0.2),
            seed: 0,
            pls_grid: None,
            lasso_grid: None,
            cv_folds: 10,
            cv_repeats: 20,
        }
    }

    fn validate(&self, total_rows: usize) -> Result<(), OnlineError> {
        let needed = match self.scheme {
            Scheme::Mw | Scheme::MwAdaptive => {
                if self.window < 2 {
                    return Err(OnlineError::WindowTooSmall(self.window));
                }
                self.window
            }
            Scheme::Jitl => {
                if self.nn_count < 2 {
                    return Err(OnlineError::NeighborhoodTooSmall(self.nn_count));
                }
                self.nn_count
            }
        };
        if self.initial_ts_size < needed {
            return Err(OnlineError::InitialSetTooSmall {
                ts: self.initial_ts_size,
                needed,
            });
        }
        if self.initial_ts_size >= total_rows {
            return Err(OnlineError::EmptyTestRegion);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TraceRecord<T: Real> {
    /// Design-matrix row index of the query.
    pub index: usize,
    pub truth: T,
    pub prediction: T,
    pub variance: Option<T>,
    /// Rows actually used to fit the model for this query.
    pub window_size: usize,
    pub d2: Option<T>,
    pub ub: Option<T>,
    pub grew_window: bool,
    pub param: Option<ParamValue<T>>,
    /// Set when a fit failure was bridged by the previous model.
    pub fallback: bool,
    pub train_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PredictionTrace<T: Real> {
    pub config: OnlineConfig<T>,
    pub records: Vec<TraceRecord<T>>,
}

impl<T: Real> PredictionTrace<T> {
    pub fn rmse(&self) -> T {
        let n = T::from_count(self.records.len());
        let sq: T = self
            .records
            .iter()
            .map(|r| (r.truth - r.prediction) * (r.truth - r.prediction))
            .sum();
        (sq / n).sqrt()
    }

    /// True when no query's own label was available to its model.
    pub fn audit_no_leakage(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.train_indices.iter().all(|&i| i < r.index))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "index,truth,prediction,variance,window_size,d2,ub,grew_window,param,fallback\n",
        );
        for r in &self.records {
            let opt = |v: &Option<T>| v.map(|x| x.to_string()).unwrap_or_default();
            let param = r.param.map(|p| p.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.index,
                r.truth,
                r.prediction,
                opt(&r.variance),
                r.window_size,
                opt(&r.d2),
                opt(&r.ub),
                r.grew_window,
                param,
                r.fallback,
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serialization")
    }
}

/// Squared Mahalanobis distance of `x` from the rows of `window`, with a
/// relative ridge on the covariance diagonal to survive singular windows.
pub fn mahalanobis_d2<T: Real>(x: &DVector<T>, window: &DMatrix<T>) -> T {
    let w = window.nrows();
    let p = window.ncols();
    let mean = DVector::from_fn(p, |j, _| {
        window.column(j).iter().copied().sum::<T>() / T::from_count(w)
    });
    let mut cov = DMatrix::zeros(p, p);
    for i in 0..w {
        let d = window.row(i).transpose() - &mean;
        cov += &d * d.transpose();
    }
    cov /= T::from_count(w.max(2) - 1);
    let trace: T = (0..p).map(|j| cov[(j, j)]).sum();
    let ridge = T::of(COV_RIDGE) * trace / T::from_count(p);
    // keep the matrix invertible even when the window variance vanishes
    let floor = T::of(1e-300);
    for j in 0..p {
        cov[(j, j)] += ridge.max(floor);
    }
    let diff = x - mean;
    let solved = cov
        .clone()
        .lu()
        .solve(&diff)
        .unwrap_or_else(|| DVector::zeros(p));
    diff.dot(&solved).max(T::zero())
}

/// Upper bound on the squared Mahalanobis distance of a new point from a
/// window of size `w` in `p` dimensions at significance `alpha`.
pub fn mahalanobis_ub<T: Real>(p: usize, w: usize, alpha: T) -> Result<T, OnlineError> {
    if w <= p {
        return Err(OnlineError::BoundUndefined { p, w });
    }
    let pf = T::from_count(p);
    let wf = T::from_count(w);
    let coeff = pf * (wf - T::one()) * (wf + T::one()) / (wf * (wf - pf));
    Ok(coeff * f_quantile_upper(pf, T::from_count(w - p), alpha))
}

pub fn run_mw<T: Real>(
    design: &DesignMatrix<T>,
    cfg: &OnlineConfig<T>,
) -> Result<PredictionTrace<T>, OnlineError> {
    assert!(cfg.scheme == Scheme::Mw);
    run_stream(design, cfg)
}

pub fn run_mw_adaptive<T: Real>(
    design: &DesignMatrix<T>,
    cfg: &OnlineConfig<T>,
) -> Result<PredictionTrace<T>, OnlineError> {
    assert!(cfg.scheme == Scheme::MwAdaptive);
    run_stream(design, cfg)
}

pub fn run_jitl<T: Real>(
    design: &DesignMatrix<T>,
    cfg: &OnlineConfig<T>,
) -> Result<PredictionTrace<T>, OnlineError> {
    assert!(cfg.scheme == Scheme::Jitl);
    run_stream(design, cfg)
}

/// Dispatch on the configured scheme.
pub fn run_stream<T: Real>(
    design: &DesignMatrix<T>,
    cfg: &OnlineConfig<T>,
) -> Result<PredictionTrace<T>, OnlineError> {
    let n = design.x.nrows();
    cfg.validate(n)?;
    let p = design.x.ncols();

    // parameter fixed on the initial training set unless re-tuned per window
    let ts_param = match cfg.tuning_mode {
        TuningMode::Ts => tune_on(design, 0, cfg.initial_ts_size, cfg, cfg.cv_repeats)?,
        TuningMode::W => None,
    };

    let mut records = Vec::with_capacity(n - cfg.initial_ts_size);
    let mut prev_model: Option<FittedModel<T>> = None;

    for k in cfg.initial_ts_size..n {
        let mut d2 = None;
        let mut ub = None;
        let mut grew = false;

        let train: Vec<usize> = match cfg.scheme {
            Scheme::Mw => (k - cfg.window..k).collect(),
            Scheme::MwAdaptive => {
                let mut size = cfg.window;
                loop {
                    let start = k - size;
                    // the bound needs more rows than dimensions; smaller
                    // windows skip the test and keep their size
                    if size > p {
                        let window = design.x.rows(start, size).into_owned();
                        let scaler = Scaler::fit(
                            &window,
                            &design.y.rows(start, size).into_owned(),
                        )?;
                        let (ws, _) = scaler.apply(
                            &window,
                            &design.y.rows(start, size).into_owned(),
                        );
                        let q = scaler.apply_row(&design.x.row(k).transpose());
                        let dist = mahalanobis_d2(&q, &ws);
                        let bound = mahalanobis_ub(p, size, cfg.alpha_md)?;
                        d2 = Some(dist);
                        ub = Some(bound);
                        if dist > bound && size < k {
                            let grown = (T::from_count(size)
                                * (T::one() + cfg.growth_factor))
                            .ceil()
                            .to_f64() as usize;
                            size = grown.min(k);
                            grew = true;
                            continue;
                        }
                    }
                    break;
                }
                (k - size..k).collect()
            }
            Scheme::Jitl => nearest_history(design, k, cfg.nn_count)?,
        };

        let warm = match &prev_model {
            // the previous window overlaps this one, so its coefficients are
            // an excellent starting point for the coordinate descent
            Some(FittedModel::Lasso(m)) => Some(m.beta.clone()),
            _ => None,
        };
        let (model, param, fallback) =
            match fit_on(design, &train, cfg, ts_param, warm.as_ref()) {
                Ok((m, prm)) => (m, prm, false),
                Err(err) => match prev_model.clone() {
                    // bridge numerically unstable windows with the last model
                    Some(m) => (m, ts_param, true),
                    None => return Err(err),
                },
            };

        let pred = model.predict(&design.x.row(k).transpose())?;
        records.push(TraceRecord {
            index: k,
            truth: design.y[k],
            prediction: pred.mean,
            variance: pred.variance,
            window_size: train.len(),
            d2,
            ub,
            grew_window: grew,
            param,
            fallback,
            train_indices: train,
        });
        prev_model = Some(model);
    }

    Ok(PredictionTrace {
        config: cfg.clone(),
        records,
    })
}

/// Indices of the `nn` nearest labeled rows to query `k` by squared Euclidean
/// distance in standardized coordinates; ties break toward recency, then
/// index. Returned in time order.
fn nearest_history<T: Real>(
    design: &DesignMatrix<T>,
    k: usize,
    nn: usize,
) -> Result<Vec<usize>, OnlineError> {
    let hist_x = design.x.rows(0, k).into_owned();
    let hist_y = design.y.rows(0, k).into_owned();
    let scaler = Scaler::fit(&hist_x, &hist_y)?;
    let (hs, _) = scaler.apply(&hist_x, &hist_y);
    let q = scaler.apply_row(&design.x.row(k).transpose());
    let mut dist: Vec<(T, usize)> = (0..k)
        .map(|i| {
            let d = hs.row(i).transpose() - &q;
            (d.dot(&d), i)
        })
        .collect();
    dist.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.1.cmp(&a.1))
    });
    let mut idx: Vec<usize> = dist.into_iter().take(nn.min(k)).map(|(_, i)| i).collect();
    idx.sort_unstable();
    Ok(idx)
}

/// Tune the configured learner on a contiguous row range; `None` for RVM.
fn tune_on<T: Real>(
    design: &DesignMatrix<T>,
    start: usize,
    len: usize,
    cfg: &OnlineConfig<T>,
    repeats: usize,
) -> Result<Option<ParamValue<T>>, OnlineError> {
    let learner = match cfg.learner {
        LearnerKind::Pls => TunedLearner::Pls,
        LearnerKind::Lasso => TunedLearner::Lasso,
        LearnerKind::Rvm => return Ok(None),
    };
    let x = design.x.rows(start, len).into_owned();
    let y = design.y.rows(start, len).into_owned();
    let scaler = Scaler::fit(&x, &y)?;
    let (xs, ys) = scaler.apply(&x, &y);
    let folds = cfg.cv_folds.min(len).max(2);
    // the largest usable component count is capped by the training folds
    let min_train = len - len.div_ceil(folds);
    let grid = match (cfg.learner, &cfg.pls_grid, &cfg.lasso_grid) {
        (LearnerKind::Pls, Some(g), _) => ParamGrid::Components(
            g.iter()
                .copied()
                .filter(|&l| l + 1 <= min_train && l <= xs.ncols())
                .collect(),
        ),
        (LearnerKind::Pls, None, _) => {
            let cap = xs.ncols().min(25).min(min_train.saturating_sub(1)).max(1);
            ParamGrid::Components((1..=cap).collect())
        }
        (LearnerKind::Lasso, _, Some(g)) => ParamGrid::Shrinkage(g.clone()),
        (LearnerKind::Lasso, _, None) => ParamGrid::default_shrinkage(),
        _ => unreachable!(),
    };
    let spec = TuningSpec {
        learner,
        grid,
        folds,
        repeats,
        seed: cfg.seed,
    };
    let result = if repeats == 1 {
        per_window_tune(&xs, &ys, &spec)?
    } else {
        crate::tuning::cv_tune(&xs, &ys, &spec)?
    };
    Ok(Some(result.best))
}

fn fit_on<T: Real>(
    design: &DesignMatrix<T>,
    train: &[usize],
    cfg: &OnlineConfig<T>,
    ts_param: Option<ParamValue<T>>,
    warm_beta: Option<&DVector<T>>,
) -> Result<(FittedModel<T>, Option<ParamValue<T>>), OnlineError> {
    let x = DMatrix::from_fn(train.len(), design.x.ncols(), |i, j| design.x[(train[i], j)]);
    let y = DVector::from_fn(train.len(), |i, _| design.y[train[i]]);
    let scaler = Scaler::fit(&x, &y)?;
    let (xs, ys) = scaler.apply(&x, &y);

    let param = match (cfg.tuning_mode, cfg.learner) {
        (_, LearnerKind::Rvm) => None,
        (TuningMode::Ts, _) => ts_param,
        (TuningMode::W, _) => {
            // windows are contiguous except under JITL; re-standardization
            // inside tuning is not needed, the window scaler already applied
            let spec_learner = match cfg.learner {
                LearnerKind::Pls => TunedLearner::Pls,
                LearnerKind::Lasso => TunedLearner::Lasso,
                LearnerKind::Rvm => unreachable!(),
            };
            let len = train.len();
            let folds = cfg.cv_folds.min(len).max(2);
            let min_train = len - len.div_ceil(folds);
            let grid = match (cfg.learner, &cfg.pls_grid, &cfg.lasso_grid) {
                (LearnerKind::Pls, Some(g), _) => ParamGrid::Components(
                    g.iter()
                        .copied()
                        .filter(|&l| l + 1 <= min_train && l <= xs.ncols())
                        .collect(),
                ),
                (LearnerKind::Pls, None, _) => {
                    let cap = xs
                        .ncols()
                        .min(25)
                        .min(min_train.saturating_sub(1))
                        .max(1);
                    ParamGrid::Components((1..=cap).collect())
                }
                (LearnerKind::Lasso, _, Some(g)) => ParamGrid::Shrinkage(g.clone()),
                (LearnerKind::Lasso, _, None) => ParamGrid::default_shrinkage(),
                _ => unreachable!(),
            };
            let spec = TuningSpec {
                learner: spec_learner,
                grid,
                folds,
                repeats: 1,
                seed: cfg.seed,
            };
            Some(per_window_tune(&xs, &ys, &spec)?.best)
        }
    };

    let model = match (cfg.learner, param) {
        (LearnerKind::Pls, Some(ParamValue::Components(l))) => {
            FittedModel::Pls(pls_fit(&xs, &ys, l, scaler)?)
        }
        (LearnerKind::Pls, _) => {
            let l = xs.ncols().min(xs.nrows().saturating_sub(1)).max(1).min(2);
            FittedModel::Pls(pls_fit(&xs, &ys, l, scaler)?)
        }
        (LearnerKind::Lasso, Some(ParamValue::Shrinkage(lambda))) => {
            FittedModel::Lasso(lasso_fit_warm(&xs, &ys, lambda, scaler, warm_beta)?)
        }
        (LearnerKind::Lasso, _) => {
            FittedModel::Lasso(lasso_fit_warm(&xs, &ys, T::of(1e-3), scaler, warm_beta)?)
        }
        (LearnerKind::Rvm, _) => FittedModel::Rvm(rvm_fit(&xs, &ys, T::of(RVM_TOL), scaler)?),
    };
    Ok((model, param))
}
