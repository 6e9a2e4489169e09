//! Cross-check the coordinate-descent lasso against an independent
//! accelerated proximal-gradient (FISTA) solver written from the objective
//! alone.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use softsense_core::data::Scaler;
use softsense_core::learners::lasso_fit;

fn identity_scaler(p: usize) -> Scaler<f64> {
    Scaler {
        means: DVector::zeros(p),
        stds: DVector::from_element(p, 1.0),
        y_mean: 0.0,
        y_std: 1.0,
        retained: vec![true; p],
    }
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// FISTA on 1/2 ||y - X b||^2 + lambda ||b||_1 with step 1/L, L the largest
/// eigenvalue of X'X found by power iteration.
fn fista(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, iters: usize) -> DVector<f64> {
    let p = x.ncols();
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let mut v = DVector::from_element(p, 1.0 / (p as f64).sqrt());
    let mut lmax = 1.0;
    for _ in 0..500 {
        let w = &xtx * &v;
        lmax = w.norm();
        if lmax == 0.0 {
            break;
        }
        v = w / lmax;
    }
    let step = 1.0 / (lmax * 1.01);
    let mut b = DVector::zeros(p);
    let mut z = b.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = &xtx * &z - &xty;
        let mut b_next = DVector::zeros(p);
        for j in 0..p {
            b_next[j] = soft(z[j] - step * grad[j], step * lambda);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &b_next + (&b_next - &b) * ((t - 1.0) / t_next);
        b = b_next;
        t = t_next;
    }
    b
}

fn objective(x: &DMatrix<f64>, y: &DVector<f64>, b: &DVector<f64>, lambda: f64) -> f64 {
    let r = y - x * b;
    0.5 * r.norm_squared() + lambda * b.iter().map(|v| v.abs()).sum::<f64>()
}

#[test]
fn coordinate_descent_matches_fista_over_seeded_problems() {
    for seed in 0..20u64 {
        let mut rng = StdRng::seed_from_u64(900 + seed);
        let n = 60;
        let p = 12;
        let x = DMatrix::from_fn(n, p, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z
        });
        let mut beta_true = DVector::zeros(p);
        for j in 0..4 {
            beta_true[j * 3] = rng.gen_range(-2.0f64..2.0);
        }
        let y = &x * &beta_true
            + DVector::from_fn(n, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                0.2 * z
            });
        let lambda = rng.gen_range(0.5f64..8.0);

        let model = lasso_fit(&x, &y, lambda, identity_scaler(p)).unwrap();
        let oracle = fista(&x, &y, lambda, 20_000);

        let f_cd = objective(&x, &y, &model.beta, lambda);
        let f_or = objective(&x, &y, &oracle, lambda);
        assert!(
            (f_cd - f_or).abs() <= 1e-6 * (1.0 + f_or.abs()),
            "seed {seed}: objective mismatch {f_cd} vs {f_or}"
        );
        for j in 0..p {
            assert!(
                (model.beta[j] - oracle[j]).abs() < 1e-4,
                "seed {seed}: beta[{j}] {} vs {}",
                model.beta[j],
                oracle[j]
            );
        }
    }
}
