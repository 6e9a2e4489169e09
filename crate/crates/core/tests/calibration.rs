//! Exploratory harness for the drift-experiment orderings; ignored by
//! default, run explicitly (in release mode) while calibrating simulator
//! constants.

use nalgebra::{DMatrix, DVector};
use softsense_core::data::{build_fir_matrix, Scaler};
use softsense_core::learners::{lasso_fit, pls_fit, rvm_fit, FittedModel};
use softsense_core::online::{run_stream, LearnerKind, OnlineConfig, Scheme, TuningMode};
use softsense_core::sim::{simulate, DriftScenario, TRAIN_ROWS};
use softsense_core::tuning::{cv_tune, ParamGrid, ParamValue, TunedLearner, TuningSpec};

fn tune_once(
    xs: &DMatrix<f64>,
    ys: &DVector<f64>,
    learner: LearnerKind,
    seed: u64,
) -> Option<ParamValue<f64>> {
    let tuned = match learner {
        LearnerKind::Pls => TunedLearner::Pls,
        LearnerKind::Lasso => TunedLearner::Lasso,
        LearnerKind::Rvm => return None,
    };
    let grid = match learner {
        LearnerKind::Pls => ParamGrid::Components((1..=25.min(xs.ncols())).collect()),
        LearnerKind::Lasso => ParamGrid::default_shrinkage(),
        LearnerKind::Rvm => unreachable!(),
    };
    let spec = TuningSpec {
        learner: tuned,
        grid,
        folds: 10,
        repeats: 2,
        seed,
    };
    Some(cv_tune(xs, ys, &spec).unwrap().best)
}

fn fit_static(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    learner: LearnerKind,
    param: Option<ParamValue<f64>>,
) -> FittedModel<f64> {
    let scaler = Scaler::fit(x, y).unwrap();
    let (xs, ys) = scaler.apply(x, y);
    match (learner, param) {
        (LearnerKind::Pls, Some(ParamValue::Components(l))) => {
            FittedModel::Pls(pls_fit(&xs, &ys, l, scaler).unwrap())
        }
        (LearnerKind::Lasso, Some(ParamValue::Shrinkage(lambda))) => {
            FittedModel::Lasso(lasso_fit(&xs, &ys, lambda, scaler).unwrap())
        }
        (LearnerKind::Rvm, _) => FittedModel::Rvm(rvm_fit(&xs, &ys, 1e-3, scaler).unwrap()),
        _ => unreachable!(),
    }
}

#[test]
#[ignore]
fn drift_orderings() {
    let lag = 2usize;
    let reps = 3u64;
    let learners = [LearnerKind::Pls, LearnerKind::Lasso, LearnerKind::Rvm];

    for scenario in DriftScenario::DRIFTING {
        print!("{:36}", format!("{scenario:?}"));
        for learner in learners {
            let mut static_sum = 0.0;
            let mut mw_sum = 0.0;
            for rep in 0..reps {
                let out = simulate::<f64>(scenario, 1000 + rep).unwrap();
                let design = build_fir_matrix(&out.dataset, 0, lag).unwrap();
                let initial_ts = TRAIN_ROWS - lag;

                let x_tr = design.x.rows(0, initial_ts).into_owned();
                let y_tr = design.y.rows(0, initial_ts).into_owned();
                let scaler = Scaler::fit(&x_tr, &y_tr).unwrap();
                let (xs_tr, ys_tr) = scaler.apply(&x_tr, &y_tr);
                let param = tune_once(&xs_tr, &ys_tr, learner, 7 + rep);
                let model = fit_static(&x_tr, &y_tr, learner, param);
                let mut sq = 0.0;
                let n_test = design.x.nrows() - initial_ts;
                for k in initial_ts..design.x.nrows() {
                    let pred = model.predict(&design.x.row(k).transpose()).unwrap();
                    sq += (pred.mean - design.y[k]).powi(2);
                }
                static_sum += (sq / n_test as f64).sqrt();

                let mut cfg = OnlineConfig::new(Scheme::Mw, learner, initial_ts);
                cfg.window = 50;
                cfg.cv_repeats = 2;
                cfg.seed = 7 + rep;
                let trace = run_stream(&design, &cfg).unwrap();
                mw_sum += trace.rmse();
            }
            print!(
                "  {:?}: st {:6.2} mw {:6.2}",
                learner,
                static_sum / reps as f64,
                mw_sum / reps as f64
            );
        }
        println!();
    }
}

#[test]
#[ignore]
fn window_learner_gaps() {
    let lag = 2usize;
    let reps = 3u64;
    for w in [40usize, 50] {
        let mut rmse = [0.0f64; 3];
        for scenario in DriftScenario::DRIFTING {
            for rep in 0..reps {
                let out = simulate::<f64>(scenario, 2000 + rep).unwrap();
                let design = build_fir_matrix(&out.dataset, 0, lag).unwrap();
                let initial_ts = TRAIN_ROWS - lag;
                for (i, learner) in
                    [LearnerKind::Pls, LearnerKind::Lasso, LearnerKind::Rvm]
                        .into_iter()
                        .enumerate()
                {
                    let mut cfg = OnlineConfig::new(Scheme::Mw, learner, initial_ts);
                    cfg.window = w;
                    cfg.cv_repeats = 2;
                    cfg.seed = 7 + rep;
                    cfg.tuning_mode = TuningMode::Ts;
                    let trace = run_stream(&design, &cfg).unwrap();
                    rmse[i] += trace.rmse();
                }
            }
        }
        let total = (8 * reps as usize) as f64;
        let (pls, lasso, rvm) = (rmse[0] / total, rmse[1] / total, rmse[2] / total);
        println!(
            "W={w}: PLS {pls:.3} Lasso {lasso:.3} ({:+.1}%) RVM {rvm:.3} ({:+.1}%)",
            100.0 * (pls - lasso) / pls,
            100.0 * (pls - rvm) / pls
        );
    }
}
