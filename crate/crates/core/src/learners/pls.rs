//! Partial least squares via NIPALS with deflation, single response.

use super::FitError;
use crate::data::Scaler;
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const NIPALS_MAX_ITER: usize = 500;
const NIPALS_TOL: f64 = 1e-12;
/// Deflated blocks with Frobenius norm below this fraction of the original
/// are treated as numerically zero and stop extraction early.
const DEFLATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PlsModel<T: Real> {
    /// Achieved number of latent components (may be below the request when
    /// the deflated predictor block vanishes).
    pub components: usize,
    /// Unit-norm weight vectors, p x L.
    pub weights: DMatrix<T>,
    /// Score vectors, N' x L, mutually orthogonal.
    pub scores: DMatrix<T>,
    /// Predictor loadings, p x L.
    pub x_loadings: DMatrix<T>,
    /// Inner regression coefficients, one per component.
    pub inner_coeffs: DVector<T>,
    /// Collapsed coefficient vector on the standardized scale.
    pub beta: DVector<T>,
    pub scaler: Scaler<T>,
}

/// Fit a PLS model on auto-scaled data.
pub fn pls_fit<T: Real>(
    xs: &DMatrix<T>,
    ys: &DVector<T>,
    l: usize,
    scaler: Scaler<T>,
) -> Result<PlsModel<T>, FitError> {
    let n = xs.nrows();
    let p = xs.ncols();
    if n == 0 {
        return Err(FitError::EmptyTrainingSet);
    }
    let max_l = p.min(n.saturating_sub(1)).max(1);
    if l == 0 || l > max_l {
        return Err(FitError::ComponentCount {
            requested: l,
            max: max_l,
        });
    }

    let mut x = xs.clone();
    let mut y = ys.clone();
    let x_norm0 = x.norm();
    let mut weights = DMatrix::zeros(p, l);
    let mut scores = DMatrix::zeros(n, l);
    let mut loadings = DMatrix::zeros(p, l);
    let mut inner = DVector::zeros(l);
    let mut achieved = 0;

    for comp in 0..l {
        if x.norm() <= T::of(DEFLATION_FLOOR) * x_norm0 {
            break;
        }
        let mut c = x.transpose() * &y;
        let mut norm = c.norm();
        if norm <= T::of(DEFLATION_FLOOR) {
            break;
        }
        c /= norm;
        // single-response NIPALS converges immediately; the loop guards the
        // stated tolerance anyway
        let mut t = &x * &c;
        let mut converged = false;
        let mut prev_delta = T::infinity();
        for _ in 0..NIPALS_MAX_ITER {
            let q = y.dot(&t) / t.dot(&t);
            let u = y.scale(q);
            let mut c_new = x.transpose() * &u;
            norm = c_new.norm();
            if norm <= T::of(DEFLATION_FLOOR) {
                converged = true;
                break;
            }
            c_new /= norm;
            // the weight sign is arbitrary; keep the orientation stable so
            // the delta measures subspace movement, not sign flips
            if c_new.dot(&c) < T::zero() {
                c_new = -c_new;
            }
            let delta = (&c_new - &c).norm();
            c = c_new;
            t = &x * &c;
            // near-exhausted deflation leaves a roundoff floor above the
            // tolerance; stop once the delta no longer shrinks
            if delta < T::of(NIPALS_TOL) || delta >= prev_delta {
                converged = true;
                break;
            }
            prev_delta = delta;
        }
        if !converged {
            return Err(FitError::NipalsNonConvergence { component: comp });
        }
        let tt = t.dot(&t);
        if tt <= T::of(DEFLATION_FLOOR) {
            break;
        }
        let p_load = x.transpose() * &t / tt;
        let b = t.dot(&y) / tt;
        x -= &t * p_load.transpose();
        y -= t.scale(b);
        weights.set_column(comp, &c);
        scores.set_column(comp, &t);
        loadings.set_column(comp, &p_load);
        inner[comp] = b;
        achieved = comp + 1;
    }

    let weights = weights.columns(0, achieved).into_owned();
    let scores = scores.columns(0, achieved).into_owned();
    let loadings = loadings.columns(0, achieved).into_owned();
    let inner = inner.rows(0, achieved).into_owned();

    // beta = C (P^T C)^{-1} b so that x beta reproduces the latent regression
    let beta = if achieved == 0 {
        DVector::zeros(p)
    } else {
        let r = loadings.transpose() * &weights;
        let solved = r
            .lu()
            .solve(&inner)
            .ok_or(FitError::IllConditioned)?;
        &weights * solved
    };

    Ok(PlsModel {
        components: achieved,
        weights,
        scores,
        x_loadings: loadings,
        inner_coeffs: inner,
        beta,
        scaler,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Scaler;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn scaled_problem(
        n: usize,
        p: usize,
        seed: u64,
    ) -> (DMatrix<f64>, DVector<f64>, Scaler<f64>) {
        let mut rng = StdRng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
        let beta_true = DVector::from_fn(p, |j, _| (j as f64 + 1.0) * 0.3);
        let y = &x * &beta_true
            + DVector::from_fn(n, |_, _| rng.gen_range(-0.05..0.05));
        let scaler = Scaler::fit(&x, &y).unwrap();
        let (xs, ys) = scaler.apply(&x, &y);
        (xs, ys, scaler)
    }

    #[test]
    fn one_predictor_matches_simple_regression() {
        let (xs, ys, scaler) = scaled_problem(30, 1, 7);
        let model = pls_fit(&xs, &ys, 1, scaler).unwrap();
        let slope = xs.column(0).dot(&ys) / xs.column(0).dot(&xs.column(0));
        assert!((model.beta[0] - slope).abs() < 1e-10);
    }

    #[test]
    fn first_weight_proportional_to_covariance() {
        let (xs, ys, scaler) = scaled_problem(40, 6, 11);
        let model = pls_fit(&xs, &ys, 3, scaler).unwrap();
        let mut c1 = xs.transpose() * &ys;
        c1 /= c1.norm();
        for j in 0..6 {
            assert!((model.weights[(j, 0)] - c1[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn full_components_match_least_squares() {
        let (xs, ys, scaler) = scaled_problem(20, 5, 3);
        let model = pls_fit(&xs, &ys, 5, scaler).unwrap();
        let xtx = xs.transpose() * &xs;
        let xty = xs.transpose() * &ys;
        let ols = xtx.lu().solve(&xty).unwrap();
        for j in 0..5 {
            assert!(
                (model.beta[j] - ols[j]).abs() < 1e-8,
                "beta[{j}] = {} vs ols {}",
                model.beta[j],
                ols[j]
            );
        }
    }

    #[test]
    fn scores_orthogonal() {
        let (xs, ys, scaler) = scaled_problem(30, 8, 19);
        let model = pls_fit(&xs, &ys, 5, scaler).unwrap();
        for i in 0..model.components {
            for j in 0..i {
                let ti = model.scores.column(i);
                let tj = model.scores.column(j);
                let dot = ti.dot(&tj).abs();
                assert!(dot <= 1e-8 * ti.norm() * tj.norm());
            }
        }
    }

    #[test]
    fn weights_unit_norm() {
        let (xs, ys, scaler) = scaled_problem(25, 4, 23);
        let model = pls_fit(&xs, &ys, 4, scaler).unwrap();
        for j in 0..model.components {
            assert!((model.weights.column(j).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn more_components_never_increase_training_rss() {
        let (xs, ys, scaler) = scaled_problem(30, 6, 31);
        let mut last = f64::INFINITY;
        for l in 1..=6 {
            let model = pls_fit(&xs, &ys, l, scaler.clone()).unwrap();
            let residual = &ys - &xs * &model.beta;
            let rss = residual.dot(&residual);
            assert!(rss <= last + 1e-10);
            last = rss;
        }
    }

    #[test]
    fn rank_deficient_stops_early() {
        // duplicate columns: rank 2 in a 4-column matrix
        let mut rng = StdRng::seed_from_u64(5);
        let base = DMatrix::from_fn(20, 2, |_, _| rng.gen_range(-1.0f64..1.0));
        let mut x = DMatrix::zeros(20, 4);
        x.set_column(0, &base.column(0));
        x.set_column(1, &base.column(1));
        x.set_column(2, &base.column(0));
        x.set_column(3, &base.column(1));
        let y = base.column(0).into_owned() * 2.0;
        let scaler = Scaler::fit(&x, &y).unwrap();
        let (xs, ys) = scaler.apply(&x, &y);
        let model = pls_fit(&xs, &ys, 4, scaler).unwrap();
        assert!(model.components <= 2);
    }

    #[test]
    fn component_count_validated() {
        let (xs, ys, scaler) = scaled_problem(10, 3, 1);
        assert!(matches!(
            pls_fit(&xs, &ys, 0, scaler.clone()),
            Err(FitError::ComponentCount { .. })
        ));
        assert!(matches!(
            pls_fit(&xs, &ys, 4, scaler),
            Err(FitError::ComponentCount { .. })
        ));
    }
}
