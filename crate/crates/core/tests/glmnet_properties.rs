mod common;

use nalgebra::DMatrix;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regcal::glmnet::{
    elastic_net_path, fit_elastic_net, multinomial_path, ClassifierModel, FitControl, PenaltySpec,
};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kkt_conditions_hold(seed in any::<u64>()) {
        let problem = common::random_problem(seed, (20, 150), (1, 25));
        let fit = common::fit(&problem);
        let (z, yc) = common::standardize(&problem.x, &problem.y);
        let v = common::kkt_violation(&z, &yc, problem.alpha, problem.lambda, &fit.points[0].beta_std);
        prop_assert!(v <= 1e-6, "kkt residual {v}");
    }

    #[test]
    fn matches_coordinate_grid_oracle(seed in any::<u64>()) {
        let problem = common::random_problem(seed, (10, 50), (1, 6));
        let fit = common::fit(&problem);
        let (z, yc) = common::standardize(&problem.x, &problem.y);
        let oracle = common::grid_oracle(&z, &yc, problem.alpha, problem.lambda);
        let f_fit = common::objective(&z, &yc, problem.alpha, problem.lambda, &fit.points[0].beta_std);
        let f_oracle = common::objective(&z, &yc, problem.alpha, problem.lambda, &oracle);
        prop_assert!(f_fit <= f_oracle + 1e-6, "fit {f_fit} oracle {f_oracle}");
        prop_assert!((f_fit - f_oracle).abs() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rescaling_a_column_rescales_its_coefficient(seed in any::<u64>(), col in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, p) = (120, 5);
        let x = Array2::from_shape_fn((n, p), |_| normal(&mut rng));
        let y: Vec<f64> = (0..n)
            .map(|i| 1.5 * x[[i, 0]] - 0.7 * x[[i, 2]] + 0.3 * x[[i, 4]] + normal(&mut rng))
            .collect();
        let mut scaled = x.clone();
        scaled.column_mut(col).mapv_inplace(|v| v * 10.0);
        let names: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
        let spec = PenaltySpec::default();
        let a = fit_elastic_net(&x, &y, &names, &spec, 7).unwrap();
        let b = fit_elastic_net(&scaled, &y, &names, &spec, 7).unwrap();
        for i in 0..n {
            let pa = a.predict_row(&x.row(i).to_vec());
            let pb = b.predict_row(&scaled.row(i).to_vec());
            prop_assert!((pa - pb).abs() <= 1e-8, "row {i}: {pa} vs {pb}");
        }
        let (ca, cb) = (a.coefficient(&names[col]), b.coefficient(&names[col]));
        prop_assert!((ca / 10.0 - cb).abs() <= 1e-8 * (1.0 + ca.abs()), "{ca} vs {cb}");
    }

    #[test]
    fn lasso_support_shrinks_with_lambda_on_orthogonal_designs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(20..60);
        let p = rng.random_range(2..8);
        let mut raw = DMatrix::from_fn(n, p, |_, _| normal(&mut rng));
        for mut c in raw.column_iter_mut() {
            let m = c.mean();
            c.add_scalar_mut(-m);
        }
        let q = raw.qr().q();
        let x = Array2::from_shape_fn((n, p), |(i, j)| q[(i, j)] * (j + 1) as f64);
        let y: Vec<f64> = (0..n)
            .map(|i| (0..p).map(|j| x[[i, j]] * normal(&mut rng)).sum::<f64>() + 0.1 * normal(&mut rng))
            .collect();
        let (z, yc) = common::standardize(&x, &y);
        let top = common::lambda_max(&z, &yc, 1.0);
        let lambdas: Vec<f64> = (0..40).map(|k| top * 10f64.powf(-3.0 * k as f64 / 39.0)).collect();
        let fit = elastic_net_path(&x, &y, 1.0, &lambdas, &FitControl::exhaustive(1e-14)).unwrap();
        let support: Vec<usize> = fit
            .points
            .iter()
            .map(|pt| pt.beta_std.iter().filter(|b| **b != 0.0).count())
            .collect();
        // points run from large to small lambda
        prop_assert!(support.windows(2).all(|w| w[0] <= w[1]), "{support:?}");
    }

    #[test]
    fn probabilities_sum_to_one(seed in any::<u64>(), k in 2usize..6, p in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_classifier(&mut rng, k, p, 3.0);
        for _ in 0..20 {
            let v: Vec<f64> = (0..p).map(|_| 10.0 * normal(&mut rng)).collect();
            let total: f64 = model.probabilities_row(&v).iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
        }
    }

    #[test]
    fn raising_a_class_specific_feature_raises_that_class(
        seed in any::<u64>(),
        k in 2usize..6,
        p in 1usize..6,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rng.random_range(0..k);
        let j = rng.random_range(0..p);
        let mut coefficients: Vec<Vec<f64>> = (0..k).map(|_| (0..p).map(|_| normal(&mut rng)).collect()).collect();
        for (class, row) in coefficients.iter_mut().enumerate() {
            row[j] = if class == c { rng.random_range(0.1..2.0) } else { -rng.random_range(0.0..2.0) };
        }
        let model = ClassifierModel::from_parts(
            (0..k).map(|i| format!("m{i}")).collect(),
            (0..p).map(|i| format!("s{i}")).collect(),
            (0..k).map(|_| normal(&mut rng)).collect(),
            coefficients,
        )
        .unwrap();
        let mut v: Vec<f64> = (0..p).map(|_| normal(&mut rng)).collect();
        let before = model.probabilities_row(&v)[c];
        v[j] += 1e-3;
        let after = model.probabilities_row(&v)[c];
        prop_assert!(after > before, "{before} -> {after}");
    }
}

fn random_classifier(rng: &mut ChaCha8Rng, k: usize, p: usize, scale: f64) -> ClassifierModel {
    ClassifierModel::from_parts(
        (0..k).map(|i| format!("m{i}")).collect(),
        (0..p).map(|i| format!("s{i}")).collect(),
        (0..k).map(|_| scale * normal(rng)).collect(),
        (0..k).map(|_| (0..p).map(|_| scale * normal(rng)).collect()).collect(),
    )
    .unwrap()
}

/// Lasso-penalized binary logistic regression on standardized columns,
/// solved by proximal gradient descent with an unpenalized intercept.
fn binary_logit_oracle(z: &Array2<f64>, y: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let (n, p) = z.dim();
    let nf = n as f64;
    let mut a = 0.0;
    let mut b = vec![0.0; p];
    // the logistic loss gradient is 1/4-Lipschitz per unit-variance column
    let step = 4.0 / (1.0 + p as f64);
    for _ in 0..200_000 {
        let mut ga = 0.0;
        let mut gb = vec![0.0; p];
        for i in 0..n {
            let eta = a + (0..p).map(|j| z[[i, j]] * b[j]).sum::<f64>();
            let r = 1.0 / (1.0 + (-eta).exp()) - y[i];
            ga += r / nf;
            for j in 0..p {
                gb[j] += r * z[[i, j]] / nf;
            }
        }
        let mut moved = (step * ga).abs();
        a -= step * ga;
        for j in 0..p {
            let t = b[j] - step * gb[j];
            let next = t.signum() * (t.abs() - step * lambda).max(0.0);
            moved = moved.max((next - b[j]).abs());
            b[j] = next;
        }
        if moved < 1e-13 {
            break;
        }
    }
    (a, b)
}

#[test]
fn two_class_multinomial_matches_binary_logit() {
    for seed in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, p) = (150, 4);
        let x = Array2::from_shape_fn((n, p), |(_, j)| (j + 1) as f64 * normal(&mut rng) + j as f64);
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                let eta = 0.3 + 0.8 * x[[i, 0]] - 0.2 * x[[i, 1]] + 0.05 * x[[i, 3]];
                usize::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()))
            })
            .collect();
        let lambda = 0.02 * (1 + seed) as f64;
        let fit = multinomial_path(&x, &labels, 2, 1.0, &[lambda], &FitControl::exhaustive(1e-14)).unwrap();
        let pt = &fit[0];
        let slope: Vec<f64> = (0..p).map(|j| pt.coefficients[1][j] - pt.coefficients[0][j]).collect();
        let intercept = pt.intercepts[1] - pt.intercepts[0];

        let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        let (z, _) = common::standardize(&x, &y);
        let (a_std, b_std) = binary_logit_oracle(&z, &y, lambda);
        let mut a = a_std;
        for j in 0..p {
            let col = x.column(j);
            let m = col.sum() / n as f64;
            let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            let bj = b_std[j] / sd;
            a -= bj * m;
            assert!((slope[j] - bj).abs() < 1e-4, "seed {seed} coef {j}: {} vs {bj}", slope[j]);
        }
        assert!((intercept - a).abs() < 1e-4, "seed {seed} intercept: {intercept} vs {a}");
    }
}
