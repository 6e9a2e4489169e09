//! The three regression learners. All of them produce a linear prediction
//! rule on the standardized scale, so a single prediction path is shared:
//! standardize the query with the model's scaler, apply the coefficient
//! vector, de-standardize the result.

mod lasso;
mod pls;
mod rvm;

pub use lasso::{lasso_fit, lasso_fit_warm, lasso_kkt_residual, LassoModel};
pub use pls::{pls_fit, PlsModel};
pub use rvm::{rvm_fit, RvmModel, RVM_PRUNE_THRESHOLD};

use crate::data::Scaler;
use crate::scalar::Real;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("component count {requested} out of range 1..={max}")]
    ComponentCount { requested: usize, max: usize },
    #[error("NIPALS did not converge on component {component}")]
    NipalsNonConvergence { component: usize },
    #[error("coordinate descent did not converge; max KKT violation {gap}")]
    LassoNonConvergence { gap: f64 },
    #[error("negative shrinkage weight")]
    NegativeLambda,
    #[error("posterior precision matrix is numerically singular")]
    IllConditioned,
    #[error("predictor dimension mismatch: model has {expected}, query has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty training set")]
    EmptyTrainingSet,
}

/// Point prediction in original target units; the variance is populated by
/// RVM models only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub mean: T,
    pub variance: Option<T>,
}

/// A fitted learner, tagged by method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "learner", rename_all = "snake_case")]
pub enum FittedModel<T: Real> {
    Pls(PlsModel<T>),
    Lasso(LassoModel<T>),
    Rvm(RvmModel<T>),
}

impl<T: Real> FittedModel<T> {
    /// Coefficient vector on the standardized scale.
    pub fn beta(&self) -> &DVector<T> {
        match self {
            FittedModel::Pls(m) => &m.beta,
            FittedModel::Lasso(m) => &m.beta,
            FittedModel::Rvm(m) => &m.beta,
        }
    }

    pub fn scaler(&self) -> &Scaler<T> {
        match self {
            FittedModel::Pls(m) => &m.scaler,
            FittedModel::Lasso(m) => &m.scaler,
            FittedModel::Rvm(m) => &m.scaler,
        }
    }

    pub fn learner_name(&self) -> &'static str {
        match self {
            FittedModel::Pls(_) => "pls",
            FittedModel::Lasso(_) => "lasso",
            FittedModel::Rvm(_) => "rvm",
        }
    }

    /// Predict a raw (unscaled) predictor row.
    pub fn predict(&self, x: &DVector<T>) -> Result<Prediction<T>, FitError> {
        let scaler = self.scaler();
        if x.len() != scaler.n_cols() {
            return Err(FitError::DimensionMismatch {
                expected: scaler.n_cols(),
                found: x.len(),
            });
        }
        let xs = scaler.apply_row(x);
        let intercept = match self {
            FittedModel::Lasso(m) => m.intercept,
            _ => T::zero(),
        };
        let mean_std = self.beta().dot(&xs) + intercept;
        let mean = scaler.invert_y(mean_std);
        let variance = match self {
            FittedModel::Rvm(m) => {
                Some(m.predictive_variance(&xs) * scaler.y_std * scaler.y_std)
            }
            _ => None,
        };
        Ok(Prediction { mean, variance })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serialization")
    }
}
