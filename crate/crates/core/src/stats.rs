//! Prediction accuracy metrics and robust statistical comparison of learners
//! against a PLS reference: RMSE, %RMSE, trimmed/Winsorized robust t-test and
//! the Wilcoxon signed-rank test.

use crate::scalar::Real;
use crate::special::{normal_cdf, student_t_cdf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("reference RMSE must be positive")]
    ZeroReference,
    #[error("trimming proportion {gamma} removes all data from a sample of {n}")]
    OverTrimming { gamma: f64, n: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
}

/// Root mean squared error.
pub fn rmse<T: Real>(y: &[T], y_hat: &[T]) -> Result<T, StatError> {
    if y.is_empty() {
        return Err(StatError::Empty);
    }
    if y.len() != y_hat.len() {
        return Err(StatError::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    let mut ss = T::zero();
    for (a, b) in y.iter().zip(y_hat) {
        let d = *a - *b;
        ss += d * d;
    }
    Ok((ss / T::from_count(y.len())).sqrt())
}

/// Percent increase in prediction accuracy relative to a reference learner.
/// Positive values mean learner `j` beats the reference.
pub fn pct_rmse<T: Real>(rmse_ref: T, rmse_j: T) -> Result<T, StatError> {
    if rmse_ref <= T::zero() {
        return Err(StatError::ZeroReference);
    }
    Ok(T::of(100.0) * (rmse_ref - rmse_j) / rmse_ref)
}

fn trim_count<T: Real>(n: usize, gamma: T) -> usize {
    (T::from_count(n) * gamma).floor().to_f64() as usize
}

/// Winsorize: clamp the g smallest values to the (g+1)-th order statistic and
/// the g largest to the (n-g)-th, with g = floor(n * gamma).
pub fn winsorize<T: Real>(x: &[T], gamma: T) -> Result<Vec<T>, StatError> {
    let n = x.len();
    let g = trim_count(n, gamma);
    if n < 2 * g + 1 || n == 0 {
        return Err(StatError::OverTrimming {
            gamma: gamma.to_f64(),
            n,
        });
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let lo = sorted[g];
    let hi = sorted[n - g - 1];
    Ok(x.iter()
        .map(|v| {
            if *v <= lo {
                lo
            } else if *v >= hi {
                hi
            } else {
                *v
            }
        })
        .collect())
}

/// Mean of the central n - 2g order statistics.
pub fn trimmed_mean<T: Real>(x: &[T], gamma: T) -> Result<T, StatError> {
    let n = x.len();
    let g = trim_count(n, gamma);
    if n < 2 * g + 1 || n == 0 {
        return Err(StatError::OverTrimming {
            gamma: gamma.to_f64(),
            n,
        });
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let kept = &sorted[g..n - g];
    Ok(kept.iter().copied().sum::<T>() / T::from_count(kept.len()))
}

/// Winsorized sample standard deviation ((n-1) denominator).
pub fn winsorized_std<T: Real>(x: &[T], gamma: T) -> Result<T, StatError> {
    let w = winsorize(x, gamma)?;
    let n = w.len();
    if n < 2 {
        return Err(StatError::Empty);
    }
    let mean = w.iter().copied().sum::<T>() / T::from_count(n);
    let mut ss = T::zero();
    for v in &w {
        let d = *v - mean;
        ss += d * d;
    }
    Ok((ss / T::from_count(n - 1)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustTestConfig<T> {
    /// Trimming proportion.
    pub gamma: T,
    /// Two-sided significance level.
    pub alpha: T,
}

impl<T: Real> Default for RobustTestConfig<T> {
    fn default() -> Self {
        Self {
            gamma: T::of(0.1),
            alpha: T::of(0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustTest<T> {
    pub statistic: T,
    pub df: usize,
    pub p_value: T,
    pub reject: bool,
    /// Set when the Winsorized spread collapsed to zero; the test then
    /// reports non-rejection.
    pub degenerate: bool,
}

/// Robust paired comparison on the differences of absolute errors,
/// d_i = |err_a_i| - |err_b_i|, using a trimmed mean and a Winsorized
/// standard error. Two-sided decision at `cfg.alpha` with df = n - 2g - 1.
pub fn robust_t_test<T: Real>(
    err_a: &[T],
    err_b: &[T],
    cfg: &RobustTestConfig<T>,
) -> Result<RobustTest<T>, StatError> {
    if err_a.len() != err_b.len() {
        return Err(StatError::LengthMismatch {
            left: err_a.len(),
            right: err_b.len(),
        });
    }
    let n = err_a.len();
    let g = trim_count(n, cfg.gamma);
    if n < 2 * g + 2 {
        return Err(StatError::OverTrimming {
            gamma: cfg.gamma.to_f64(),
            n,
        });
    }
    let d: Vec<T> = err_a
        .iter()
        .zip(err_b)
        .map(|(a, b)| a.abs() - b.abs())
        .collect();
    let mean_t = trimmed_mean(&d, cfg.gamma)?;
    let s_w = winsorized_std(&d, cfg.gamma)?;
    let df = n - 2 * g - 1;
    if s_w <= T::zero() {
        return Ok(RobustTest {
            statistic: T::zero(),
            df,
            p_value: T::one(),
            reject: false,
            degenerate: true,
        });
    }
    let statistic = (T::one() - T::of(2.0) * cfg.gamma) * T::from_count(n).sqrt() * mean_t / s_w;
    let p_value = T::of(2.0) * (T::one() - student_t_cdf(statistic.abs(), T::from_count(df)));
    Ok(RobustTest {
        statistic,
        df,
        p_value,
        reject: p_value < cfg.alpha,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonTest<T> {
    /// Sum of ranks of positive differences (W+).
    pub statistic: T,
    /// Two-sided p-value.
    pub p_value: T,
    pub n_used: usize,
    pub exact: bool,
}

/// Exact-enumeration cutoff for the signed-rank null distribution.
const WILCOXON_EXACT_MAX: usize = 25;

/// Wilcoxon signed-rank test on paired samples. Zero differences are dropped;
/// ties get average ranks. Exact distribution (conditional on the observed
/// ranks) for n <= 25, normal approximation with tie correction otherwise.
pub fn wilcoxon_signed_rank<T: Real>(a: &[T], b: &[T]) -> Result<WilcoxonTest<T>, StatError> {
    if a.len() != b.len() {
        return Err(StatError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs: Vec<T> = a
        .iter()
        .zip(b)
        .map(|(x, y)| *x - *y)
        .filter(|d| *d != T::zero())
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Err(StatError::AllZeroDifferences);
    }
    // rank |d| with average ranks for ties
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        diffs[i]
            .abs()
            .partial_cmp(&diffs[j].abs())
            .expect("finite differences")
    });
    let mut ranks = vec![T::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[order[j + 1]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let avg = T::of((i + j + 2) as f64 / 2.0);
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    let w_plus: T = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > T::zero())
        .map(|(_, r)| *r)
        .sum();

    let p_value = if n <= WILCOXON_EXACT_MAX {
        // doubled ranks are integers even with .5 average ranks
        let doubled: Vec<usize> = ranks.iter().map(|r| (r.to_f64() * 2.0).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        let mut counts = vec![0u64; total + 1];
        counts[0] = 1;
        for &r in &doubled {
            for s in (r..=total).rev() {
                counts[s] += counts[s - r];
            }
        }
        let w2 = (w_plus.to_f64() * 2.0).round() as usize;
        let all: u64 = 1u64 << n;
        let le: u64 = counts[..=w2].iter().sum();
        let ge: u64 = counts[w2..].iter().sum();
        let tail = le.min(ge) as f64 / all as f64;
        T::of((2.0 * tail).min(1.0))
    } else {
        let nf = T::from_count(n);
        let mean = nf * (nf + T::one()) / T::of(4.0);
        let mut var = nf * (nf + T::one()) * (T::of(2.0) * nf + T::one()) / T::of(24.0);
        // tie correction: subtract sum(t^3 - t)/48 over tie groups
        let mut sorted_abs: Vec<T> = diffs.iter().map(|d| d.abs()).collect();
        sorted_abs.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted_abs[j + 1] == sorted_abs[i] {
                j += 1;
            }
            let t = T::from_count(j - i + 1);
            var -= (t * t * t - t) / T::of(48.0);
            i = j + 1;
        }
        // continuity correction
        let diff = w_plus - mean;
        let half = T::of(0.5);
        let z = (diff.abs() - half) / var.sqrt();
        let tail = T::one() - normal_cdf(z);
        let two = T::of(2.0) * tail;
        if two > T::one() {
            T::one()
        } else {
            two
        }
    };

    Ok(WilcoxonTest {
        statistic: w_plus,
        p_value,
        n_used: n,
        exact: n <= WILCOXON_EXACT_MAX,
    })
}

/// Pairwise comparison outcome stored in an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison<T> {
    pub learner: String,
    pub rmse: T,
    pub pct_rmse: T,
    pub robust_t: Option<RobustTest<T>>,
    pub wilcoxon: Option<WilcoxonTest<T>>,
}

/// RMSE, %RMSE and robust test results for a set of learners against a
/// reference learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EvalReport<T: Real> {
    pub reference: String,
    pub reference_rmse: T,
    pub comparisons: Vec<Comparison<T>>,
    pub test_config: RobustTestConfig<T>,
}

impl<T: Real> EvalReport<T> {
    /// Build a report from per-learner residual vectors (prediction - truth).
    /// The reference learner must be present in `errors`.
    pub fn from_errors(
        reference: &str,
        errors: &[(String, Vec<T>)],
        cfg: RobustTestConfig<T>,
    ) -> Result<Self, StatError> {
        let ref_errors = errors
            .iter()
            .find(|(name, _)| name == reference)
            .map(|(_, e)| e.clone())
            .ok_or(StatError::Empty)?;
        let zeros = vec![T::zero(); ref_errors.len()];
        let reference_rmse = rmse(&ref_errors, &zeros)?;
        let mut comparisons = Vec::new();
        for (name, errs) in errors {
            let zeros = vec![T::zero(); errs.len()];
            let learner_rmse = rmse(errs, &zeros)?;
            let pct = pct_rmse(reference_rmse, learner_rmse)?;
            let (robust_t, wilcoxon) = if name == reference {
                (None, None)
            } else {
                let rt = robust_t_test(errs, &ref_errors, &cfg).ok();
                let abs_a: Vec<T> = errs.iter().map(|e| e.abs()).collect();
                let abs_b: Vec<T> = ref_errors.iter().map(|e| e.abs()).collect();
                let wx = wilcoxon_signed_rank(&abs_a, &abs_b).ok();
                (rt, wx)
            };
            comparisons.push(Comparison {
                learner: name.clone(),
                rmse: learner_rmse,
                pct_rmse: pct,
                robust_t,
                wilcoxon,
            });
        }
        Ok(Self {
            reference: reference.to_string(),
            reference_rmse,
            comparisons,
            test_config: cfg,
        })
    }

    /// Comparison table as CSV (learner x metric).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("learner,rmse,pct_rmse,robust_t,robust_df,robust_p,significant,wilcoxon_w,wilcoxon_p\n");
        for c in &self.comparisons {
            let (t, df, p, sig) = match &c.robust_t {
                Some(r) => (
                    format!("{}", r.statistic),
                    format!("{}", r.df),
                    format!("{}", r.p_value),
                    format!("{}", r.reject),
                ),
                None => (String::new(), String::new(), String::new(), String::new()),
            };
            let (w, wp) = match &c.wilcoxon {
                Some(wx) => (format!("{}", wx.statistic), format!("{}", wx.p_value)),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.learner, c.rmse, c.pct_rmse, t, df, p, sig, w, wp
            ));
        }
        out
    }

    /// Aligned plain-text comparison table. Significance against the reference
    /// is marked with a cross, as in the figure conventions.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<18} {:>12} {:>10} {:>10} {:>10}  sig\n",
            "learner", "rmse", "%rmse", "T_t", "p"
        );
        for c in &self.comparisons {
            let (t, p, sig) = match &c.robust_t {
                Some(r) => (
                    format!("{:.4}", r.statistic.to_f64()),
                    format!("{:.4}", r.p_value.to_f64()),
                    if r.reject { "x" } else { "" },
                ),
                None => ("-".into(), "-".into(), ""),
            };
            out.push_str(&format!(
                "{:<18} {:>12.6} {:>10.3} {:>10} {:>10}  {}\n",
                c.learner,
                c.rmse.to_f64(),
                c.pct_rmse.to_f64(),
                t,
                p,
                sig
            ));
        }
        out
    }
}
