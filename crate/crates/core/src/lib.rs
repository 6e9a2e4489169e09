//! Soft-sensor regression toolkit.
//!
//! Implements three linear learners (PLS, Lasso, RVM) together with the
//! machinery needed to compare them as soft sensors on drifting process data:
//!
//! - [`data`]: dataset ingestion, FIR lag matrices, auto-scaling, segmentation
//!   and collinearity (VIF) diagnostics;
//! - [`learners`]: the three regression methods, all reducing to a linear
//!   prediction rule on the standardized scale;
//! - [`tuning`]: repeated K-fold cross-validation grid search for the PLS
//!   component count and the Lasso shrinkage weight;
//! - [`online`]: one-step-ahead prediction streams under fixed moving-window,
//!   Mahalanobis-adaptive moving-window and just-in-time learning schemes;
//! - [`stats`]: RMSE, %RMSE and robust comparison tests (trimmed/Winsorized t,
//!   Wilcoxon signed-rank);
//! - [`sim`]: a heat-exchanger + CSTR process simulator with PI control and
//!   configurable concept-drift scenarios.
//!
//! The numeric core is generic over the scalar type via [`scalar::Real`]
//! (`f32` or `f64`); the aliases below fix the default `f64` instantiation.

pub mod data;
pub mod learners;
pub mod online;
pub mod scalar;
pub mod sim;
pub mod special;
pub mod stats;
pub mod tuning;

pub use scalar::Real;

/// Default scalar used by the command-line front end.
pub type Scalar = f64;

pub type Dataset = data::Dataset<Scalar>;
pub type DesignMatrix = data::DesignMatrix<Scalar>;
pub type Scaler = data::Scaler<Scalar>;
pub type FittedModel = learners::FittedModel<Scalar>;
pub type Prediction = learners::Prediction<Scalar>;
pub type TuningSpec = tuning::TuningSpec<Scalar>;
pub type TuningResult = tuning::TuningResult<Scalar>;
pub type OnlineConfig = online::OnlineConfig<Scalar>;
pub type PredictionTrace = online::PredictionTrace<Scalar>;
pub type SimOutput = sim::SimOutput<Scalar>;
pub type EvalReport = stats::EvalReport<Scalar>;
