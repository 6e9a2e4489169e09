//! Sparse Bayesian linear regression with per-weight precision
//! hyperparameters (relevance vector machine, linear basis).
//!
//! The design matrix is `[1 | X]` on the standardized scale, one precision
//! hyperparameter per basis column. Evidence maximization re-estimates the
//! precisions and the noise variance; bases whose precision diverges are
//! pruned, and a pruned basis whose quality factor later exceeds its
//! sparsity factor is brought back into the model.

use super::FitError;
use crate::data::Scaler;
use crate::scalar::Real;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Bases with precision above this are removed from the model.
pub const RVM_PRUNE_THRESHOLD: f64 = 1e12;
const MAX_ITER: usize = 1000;
const SIGMA2_FLOOR: f64 = 1e-12;
/// Log-evidence gain an out-of-model basis must offer before it is brought
/// back in. Chance correlations of a pure noise column clear the bare
/// `q^2 > s` test about a third of the time; demanding a real gain keeps
/// the model from churning on them.
const READD_GAIN: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RvmModel<T: Real> {
    /// Retained basis indices; 0 is the intercept, j + 1 is predictor j.
    pub relevant_set: Vec<usize>,
    /// Posterior mean weights of the retained bases.
    pub mu: DVector<T>,
    /// Posterior covariance of the retained bases.
    pub covariance: DMatrix<T>,
    /// Precision hyperparameters of the retained bases.
    pub alpha: DVector<T>,
    /// Noise variance on the standardized scale.
    pub sigma2: T,
    /// Dense coefficient vector on the standardized scale; pruned predictors
    /// are exactly zero.
    pub beta: DVector<T>,
    /// Intercept weight (zero when the intercept basis was pruned).
    pub intercept: T,
    /// Log marginal likelihood at each accepted iteration.
    pub evidence_path: Vec<T>,
    pub scaler: Scaler<T>,
}

impl<T: Real> RvmModel<T> {
    /// Predictive variance at a standardized query row, `sigma2 + phi' Sigma phi`.
    pub fn predictive_variance(&self, xs_row: &DVector<T>) -> T {
        if self.relevant_set.is_empty() {
            return self.sigma2;
        }
        let phi = DVector::from_fn(self.relevant_set.len(), |k, _| {
            let idx = self.relevant_set[k];
            if idx == 0 {
                T::one()
            } else {
                xs_row[idx - 1]
            }
        });
        self.sigma2 + (&self.covariance * &phi).dot(&phi)
    }
}

struct Posterior<T> {
    mu: DVector<T>,
    covariance: DMatrix<T>,
    evidence: T,
    residual_ss: T,
}

fn posterior<T: Real>(
    phi: &DMatrix<T>,
    y: &DVector<T>,
    active: &[usize],
    alpha: &DVector<T>,
    sigma2: T,
) -> Result<Posterior<T>, FitError> {
    let n = phi.nrows();
    let nf = T::from_count(n);
    let two_pi = T::of(2.0) * T::pi();
    let yy = y.dot(y);
    if active.is_empty() {
        let evidence =
            -T::of(0.5) * (nf * two_pi.ln() + nf * sigma2.ln() + yy / sigma2);
        return Ok(Posterior {
            mu: DVector::zeros(0),
            covariance: DMatrix::zeros(0, 0),
            evidence,
            residual_ss: yy,
        });
    }
    let a = active.len();
    let mut phi_a = DMatrix::zeros(n, a);
    for (k, &idx) in active.iter().enumerate() {
        phi_a.set_column(k, &phi.column(idx));
    }
    let mut precision = phi_a.transpose() * &phi_a / sigma2;
    for (k, &idx) in active.iter().enumerate() {
        precision[(k, k)] += alpha[idx];
    }
    let chol = Cholesky::new(precision.clone()).ok_or(FitError::IllConditioned)?;
    let ln_det_precision = T::of(2.0)
        * (0..a)
            .map(|k| chol.l_dirty()[(k, k)].ln())
            .sum::<T>();
    let covariance = chol.inverse();
    let phi_ty = phi_a.transpose() * y;
    let mu = &covariance * &phi_ty / sigma2;
    let fitted = &phi_a * &mu;
    let residual = y - &fitted;
    let residual_ss = residual.dot(&residual);
    let ln_det_a: T = active.iter().map(|&idx| alpha[idx].ln()).sum();
    // |C| = sigma^{2N} |Sigma^{-1}| / |A| and y' C^{-1} y = y'(y - phi mu) / sigma^2
    let ln_det_c = nf * sigma2.ln() + ln_det_precision - ln_det_a;
    let y_c_y = (yy - y.dot(&fitted)) / sigma2;
    let evidence = -T::of(0.5) * (nf * two_pi.ln() + ln_det_c + y_c_y);
    Ok(Posterior {
        mu,
        covariance,
        evidence,
        residual_ss,
    })
}

/// Fit an RVM on auto-scaled data. `tol` bounds the largest change in
/// log-precision between iterations (default 1e-3 in the callers).
pub fn rvm_fit<T: Real>(
    xs: &DMatrix<T>,
    ys: &DVector<T>,
    tol: T,
    scaler: Scaler<T>,
) -> Result<RvmModel<T>, FitError> {
    let n = xs.nrows();
    let p = xs.ncols();
    if n == 0 {
        return Err(FitError::EmptyTrainingSet);
    }
    let nf = T::from_count(n);

    let mut phi = DMatrix::zeros(n, p + 1);
    for i in 0..n {
        phi[(i, 0)] = T::one();
    }
    for j in 0..p {
        phi.set_column(j + 1, &xs.column(j));
    }

    let mut alpha = DVector::from_element(p + 1, T::of(1e-3));
    let y_var = ys.dot(ys) / nf;
    let mut sigma2 = (T::of(0.1) * y_var).max(T::of(1e-6));
    // all-zero basis columns (excluded predictors) are never candidates
    let candidates: Vec<usize> = (0..=p)
        .filter(|&idx| phi.column(idx).norm_squared() > T::of(1e-24))
        .collect();
    let mut active = candidates.clone();

    let mut state = posterior(&phi, ys, &active, &alpha, sigma2)?;
    let mut evidence_path = vec![state.evidence];

    for _ in 0..MAX_ITER {
        if active.is_empty() {
            break;
        }
        // re-estimate precisions from the per-basis sparsity and quality
        // factors; a basis whose squared quality falls below its sparsity
        // has its evidence maximized at infinite precision and is pruned,
        // while an out-of-model basis with excess quality is brought back
        let a = active.len();
        let mut phi_a = DMatrix::zeros(n, a);
        for (k, &idx) in active.iter().enumerate() {
            phi_a.set_column(k, &phi.column(idx));
        }
        let phi_a_t_y = phi_a.transpose() * ys;
        let in_model: Vec<Option<usize>> = {
            let mut slots = vec![None; p + 1];
            for (k, &idx) in active.iter().enumerate() {
                slots[idx] = Some(k);
            }
            slots
        };
        let mut new_alpha = alpha.clone();
        let mut gamma_sum = T::zero();
        for &idx in &candidates {
            let col = phi.column(idx);
            let b = phi_a.transpose() * col;
            let sb = &state.covariance * &b;
            let cap_s = (col.norm_squared() - b.dot(&sb) / sigma2) / sigma2;
            let cap_q = (col.dot(ys) - sb.dot(&phi_a_t_y) / sigma2) / sigma2;
            // for a basis in the model, convert to leave-one-out form
            let (s_i, q_i) = if let Some(k) = in_model[idx] {
                gamma_sum += T::one() - alpha[idx] * state.covariance[(k, k)];
                let denom_i = alpha[idx] - cap_s;
                if denom_i.abs() > T::of(1e-300) {
                    (alpha[idx] * cap_s / denom_i, alpha[idx] * cap_q / denom_i)
                } else {
                    (cap_s, cap_q)
                }
            } else {
                (cap_s, cap_q)
            };
            let worthwhile = if q_i * q_i > s_i && s_i > T::zero() {
                if in_model[idx].is_some() {
                    true
                } else {
                    // evidence gain from adding the basis at its optimal
                    // precision: ((q^2 - s)/s - ln(q^2/s)) / 2
                    let ratio = q_i * q_i / s_i;
                    T::of(0.5) * (ratio - T::one() - ratio.ln()) > T::of(READD_GAIN)
                }
            } else {
                false
            };
            new_alpha[idx] = if worthwhile {
                (s_i * s_i / (q_i * q_i - s_i)).max(T::of(1e-12))
            } else {
                T::infinity()
            };
        }
        let denom = nf - gamma_sum;
        let new_sigma2 = if denom > T::zero() {
            (state.residual_ss / denom).max(T::of(SIGMA2_FLOOR))
        } else {
            sigma2
        };

        // The fixed-point update is not guaranteed to increase the evidence;
        // backtrack geometrically in log-precision space until it does, so
        // the evidence path stays monotone without stalling the pruning.
        let last_evidence = *evidence_path.last().expect("non-empty");
        let mut accepted = None;
        let mut step = T::one();
        for _ in 0..6 {
            let mut cand_alpha = alpha.clone();
            let mut cand_active = Vec::with_capacity(active.len());
            for &idx in &candidates {
                let target = if new_alpha[idx].is_finite() {
                    new_alpha[idx]
                } else {
                    T::of(1e30)
                };
                let mixed =
                    ((T::one() - step) * alpha[idx].ln() + step * target.ln()).exp();
                cand_alpha[idx] = mixed;
                if mixed < T::of(RVM_PRUNE_THRESHOLD) {
                    cand_active.push(idx);
                }
            }
            let cand_sigma2 =
                ((T::one() - step) * sigma2.ln() + step * new_sigma2.ln()).exp();
            let cand_state = posterior(&phi, ys, &cand_active, &cand_alpha, cand_sigma2)?;
            if cand_state.evidence >= last_evidence {
                accepted = Some((cand_alpha, cand_active, cand_sigma2, cand_state));
                break;
            }
            step *= T::of(0.5);
        }
        let Some((acc_alpha, acc_active, acc_sigma2, acc_state)) = accepted else {
            // no admissible step left; keep the previous state
            break;
        };
        let max_log_change = candidates
            .iter()
            .filter(|&&idx| alpha[idx] > T::zero())
            .map(|&idx| (acc_alpha[idx].ln() - alpha[idx].ln()).abs())
            .fold(T::zero(), |a, b| a.max(b));
        alpha = acc_alpha;
        sigma2 = acc_sigma2;
        let membership_changed = acc_active != active;
        active = acc_active;
        state = acc_state;
        evidence_path.push(state.evidence);
        if !membership_changed && max_log_change < tol {
            break;
        }
    }

    let mut beta = DVector::zeros(p);
    let mut intercept = T::zero();
    for (k, &idx) in active.iter().enumerate() {
        if idx == 0 {
            intercept = state.mu[k];
        } else {
            beta[idx - 1] = state.mu[k];
        }
    }
    let alpha_active = DVector::from_fn(active.len(), |k, _| alpha[active[k]]);
    Ok(RvmModel {
        relevant_set: active,
        mu: state.mu,
        covariance: state.covariance,
        alpha: alpha_active,
        sigma2,
        beta,
        intercept,
        evidence_path,
        scaler,
    })
}
