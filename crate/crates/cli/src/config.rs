//! Declarative experiment configuration (TOML).

use serde::{Deserialize, Serialize};
use softsense_core::online::{LearnerKind, Scheme, TuningMode};
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output root; falls back to --out, then the environment, then
    /// `./softsense-out`.
    pub out_dir: Option<PathBuf>,
    pub dataset: DatasetConfig,
    pub offline: Option<OfflineSection>,
    pub online: Option<OnlineSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Simulator,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: SourceKind,
    /// Drift scenario id 0-8 (simulator source).
    pub scenario: Option<u8>,
    /// Independent simulation repetitions for the simulate command.
    #[serde(default = "one")]
    pub reps: usize,
    /// CSV path (file source).
    pub path: Option<PathBuf>,
    /// Target column name (file source).
    pub target: Option<String>,
    /// Columns to ignore entirely (file source).
    #[serde(default)]
    pub ignore: Vec<String>,
    /// Field delimiter, single character (file source).
    pub delimiter: Option<String>,
    /// Keep only the k process variables most correlated with the response
    /// on the training rows (simulator source).
    pub preselect: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfflineSection {
    pub lags: Vec<usize>,
    pub learners: Vec<LearnerKind>,
    #[serde(default = "one")]
    pub segments: usize,
    #[serde(default = "default_train_rows")]
    pub train_rows: usize,
    #[serde(default = "default_test_rows")]
    pub test_rows: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_reference")]
    pub reference: LearnerKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineSection {
    pub learners: Vec<LearnerKind>,
    pub schemes: Vec<Scheme>,
    /// W grid for the moving-window schemes.
    #[serde(default)]
    pub windows: Vec<usize>,
    /// |NN| grid for the just-in-time scheme.
    #[serde(default)]
    pub neighborhoods: Vec<usize>,
    #[serde(default = "default_tuning")]
    pub tuning: Vec<TuningMode>,
    #[serde(default)]
    pub lag: usize,
    #[serde(default = "default_train_rows")]
    pub initial_ts: usize,
    #[serde(default = "default_alpha_md")]
    pub alpha_md: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}
fn default_train_rows() -> usize {
    300
}
fn default_test_rows() -> usize {
    400
}
fn default_folds() -> usize {
    10
}
fn default_repeats() -> usize {
    20
}
fn default_reference() -> LearnerKind {
    LearnerKind::Pls
}
fn default_tuning() -> Vec<TuningMode> {
    vec![TuningMode::Ts]
}
fn default_alpha_md() -> f64 {
    0.01
}

impl ExperimentConfig {
    pub fn parse(raw: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(raw)
    }

    /// Field-level validation; returns every problem found, not just the
    /// first.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        match self.dataset.source {
            SourceKind::Simulator => {
                match self.dataset.scenario {
                    None => errs.push("dataset.scenario: required for the simulator source".into()),
                    Some(id) if id > 8 => {
                        errs.push(format!("dataset.scenario: {id} outside 0-8"))
                    }
                    _ => {}
                }
                if self.dataset.path.is_some() {
                    errs.push("dataset.path: not applicable to the simulator source".into());
                }
            }
            SourceKind::File => {
                if self.dataset.path.is_none() {
                    errs.push("dataset.path: required for the file source".into());
                }
                if self.dataset.target.is_none() {
                    errs.push("dataset.target: required for the file source".into());
                }
                if self.dataset.preselect.is_some() {
                    errs.push(
                        "dataset.preselect: only supported for the simulator source".into(),
                    );
                }
                if let Some(d) = &self.dataset.delimiter {
                    if d.len() != 1 {
                        errs.push(format!("dataset.delimiter: {d:?} is not one character"));
                    }
                }
            }
        }
        if let Some(off) = &self.offline {
            if off.lags.is_empty() {
                errs.push("offline.lags: at least one lag order".into());
            }
            if off.learners.is_empty() {
                errs.push("offline.learners: at least one learner".into());
            }
            if off.segments == 0 {
                errs.push("offline.segments: must be positive".into());
            }
            if off.folds < 2 {
                errs.push("offline.folds: need at least 2".into());
            }
            if !off.learners.contains(&off.reference) {
                errs.push("offline.reference: reference learner not in offline.learners".into());
            }
        }
        if let Some(online) = &self.online {
            if online.learners.is_empty() {
                errs.push("online.learners: at least one learner".into());
            }
            if online.schemes.is_empty() {
                errs.push("online.schemes: at least one scheme".into());
            }
            let needs_w = online
                .schemes
                .iter()
                .any(|s| matches!(s, Scheme::Mw | Scheme::MwAdaptive));
            if needs_w && online.windows.is_empty() {
                errs.push("online.windows: required by the moving-window schemes".into());
            }
            if online.schemes.contains(&Scheme::Jitl) && online.neighborhoods.is_empty() {
                errs.push("online.neighborhoods: required by the just-in-time scheme".into());
            }
            if online.tuning.is_empty() {
                errs.push("online.tuning: at least one tuning mode".into());
            }
            // the comparison reference is the TS-tuned PLS moving window
            let has_reference = online.learners.contains(&LearnerKind::Pls)
                && online.schemes.contains(&Scheme::Mw)
                && online.tuning.contains(&TuningMode::Ts);
            if !has_reference {
                errs.push(
                    "online: the report needs pls + mw + ts present as the reference cell"
                        .into(),
                );
            }
            if !(0.0..1.0).contains(&online.alpha_md) || online.alpha_md <= 0.0 {
                errs.push(format!(
                    "online.alpha_md: {} outside (0, 1)",
                    online.alpha_md
                ));
            }
            if online.initial_ts <= online.lag {
                errs.push("online.initial_ts: must exceed the lag order".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
seed = 42

[dataset]
source = "simulator"
scenario = 1

[online]
learners = ["pls", "lasso"]
schemes = ["mw"]
windows = [40, 50]
lag = 2
"#;

    #[test]
    fn good_config_parses_and_validates() {
        let cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.seed, 42);
        cfg.validate().unwrap();
        let online = cfg.online.unwrap();
        assert_eq!(online.tuning, vec![TuningMode::Ts]);
        assert_eq!(online.initial_ts, 300);
    }

    #[test]
    fn missing_scenario_and_windows_reported_together() {
        let raw = r#"
[dataset]
source = "simulator"

[online]
learners = ["lasso"]
schemes = ["mw"]
"#;
        let cfg = ExperimentConfig::parse(raw).unwrap();
        let errs = cfg.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("dataset.scenario")));
        assert!(errs.iter().any(|e| e.contains("online.windows")));
        assert!(errs.iter().any(|e| e.contains("reference cell")));
    }

    #[test]
    fn unknown_fields_rejected() {
        let raw = format!("{GOOD}\nbogus_key = 1\n");
        assert!(ExperimentConfig::parse(&raw).is_err());
    }
}
