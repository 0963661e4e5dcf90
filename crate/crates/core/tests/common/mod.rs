//! Independent reference computations for the engine checks.
#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regcal::glmnet::{elastic_net_path, FitControl, PathFit};

pub struct Problem {
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
}

/// Standardized design (population scale) and centered response.
pub fn standardize(x: &Array2<f64>, y: &[f64]) -> (Array2<f64>, Vec<f64>) {
    let (n, p) = x.dim();
    let mut z = x.clone();
    for j in 0..p {
        let col = x.column(j);
        let m = col.sum() / n as f64;
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
        for i in 0..n {
            z[[i, j]] = (x[[i, j]] - m) / sd;
        }
    }
    let ym = y.iter().sum::<f64>() / n as f64;
    (z, y.iter().map(|v| v - ym).collect())
}

/// Smallest lambda with all coefficients zero.
pub fn lambda_max(z: &Array2<f64>, yc: &[f64], alpha: f64) -> f64 {
    let n = yc.len() as f64;
    (0..z.ncols())
        .map(|j| z.column(j).iter().zip(yc).map(|(a, b)| a * b).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
        / alpha.max(1e-3)
}

pub fn random_problem(seed: u64, n_range: (usize, usize), p_range: (usize, usize)) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(n_range.0..=n_range.1);
    let p = rng.random_range(p_range.0..=p_range.1);
    let scales: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let shared: f64 = StandardNormal.sample(&mut rng);
        for j in 0..p {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = scales[j] * (e + 0.5 * shared) + j as f64;
        }
    }
    let truth: Vec<f64> = (0..p)
        .map(|_| if rng.random_bool(0.5) { rng.random_range(-2.0..2.0) } else { 0.0 })
        .collect();
    let y = (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (0..p).map(|j| x[[i, j]] / scales[j] * truth[j]).sum::<f64>() + e
        })
        .collect::<Vec<f64>>();
    let alpha = rng.random_range(0.05..=1.0);
    let (z, yc) = standardize(&x, &y);
    let lambda = lambda_max(&z, &yc, alpha) * 10f64.powf(rng.random_range(-2.5..-0.05));
    Problem { x, y, alpha, lambda }
}

pub fn fit(problem: &Problem) -> PathFit {
    elastic_net_path(
        &problem.x,
        &problem.y,
        problem.alpha,
        &[problem.lambda],
        &FitControl::exhaustive(1e-14),
    )
    .unwrap()
}

/// `(1/2n)|yc - Z b|^2 + lambda (alpha |b|_1 + (1 - alpha) |b|^2 / 2)`.
pub fn objective(z: &Array2<f64>, yc: &[f64], alpha: f64, lambda: f64, b: &[f64]) -> f64 {
    let n = yc.len() as f64;
    let rss: f64 = (0..yc.len())
        .map(|i| {
            let fit: f64 = b.iter().enumerate().map(|(j, bj)| z[[i, j]] * bj).sum();
            (yc[i] - fit).powi(2)
        })
        .sum();
    let l1: f64 = b.iter().map(|v| v.abs()).sum();
    let l2: f64 = b.iter().map(|v| v * v).sum();
    rss / (2.0 * n) + lambda * (alpha * l1 + (1.0 - alpha) * l2 / 2.0)
}

/// Largest violation of the elastic-net optimality conditions.
pub fn kkt_violation(z: &Array2<f64>, yc: &[f64], alpha: f64, lambda: f64, b: &[f64]) -> f64 {
    let n = yc.len() as f64;
    let r: Vec<f64> = (0..yc.len())
        .map(|i| yc[i] - b.iter().enumerate().map(|(j, bj)| z[[i, j]] * bj).sum::<f64>())
        .collect();
    let mut worst = 0.0f64;
    for (j, bj) in b.iter().enumerate() {
        let g = z.column(j).iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() / n;
        let v = if *bj == 0.0 {
            (g.abs() - lambda * alpha).max(0.0)
        } else {
            (g - lambda * (1.0 - alpha) * bj - lambda * alpha * bj.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Minimizes [`objective`] by cyclic search over shrinking one-dimensional
/// grids; uses no closed-form update.
pub fn grid_oracle(z: &Array2<f64>, yc: &[f64], alpha: f64, lambda: f64) -> Vec<f64> {
    let p = z.ncols();
    let mut b = vec![0.0; p];
    let mut best = objective(z, yc, alpha, lambda, &b);
    let mut h = 4.0;
    while h > 1e-11 {
        let mut improved = false;
        for j in 0..p {
            let centre = b[j];
            let mut pick = centre;
            for k in -50..=50 {
                let mut t = b.clone();
                t[j] = centre + h * k as f64 / 50.0;
                let f = objective(z, yc, alpha, lambda, &t);
                if f < best {
                    best = f;
                    pick = t[j];
                }
            }
            // zero is always a candidate, the kink sits there
            let mut t = b.clone();
            t[j] = 0.0;
            let f = objective(z, yc, alpha, lambda, &t);
            if f < best {
                best = f;
                pick = 0.0;
            }
            if pick != centre {
                b[j] = pick;
                improved = true;
            }
        }
        if !improved {
            h /= 4.0;
        }
    }
    b
}
