use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regcal::baselines::{mcmc_abc, rejection_abc_with, AbcConfig, DistanceSpec, WeightedDistance, Weighting};
use regcal::experiment::{ExperimentTable, Parameter, ParameterSpace, Row, SummaryVector};
use regcal::models::{simulate_line, LineModelConfig, LineSimulator};

fn names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("s{i}")).collect()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| StandardNormal.sample(rng)).collect()
}

/// W = A A' with A of shape m x rank, plus a vector in its null space and
/// one guaranteed to leave it.
fn low_rank(seed: u64, m: usize, rank: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: DMatrix<f64> = DMatrix::from_fn(m, rank, |_, _| StandardNormal.sample(&mut rng));
    let w: DMatrix<f64> = &a * a.transpose();
    let rows = (0..m).map(|i| (0..m).map(|j| w[(i, j)]).collect()).collect();
    let q = a.clone().qr().q();
    let v = DVector::from_vec(gaussian_vec(&mut rng, m));
    let null = &v - &q * (q.transpose() * &v);
    let outside = q.column(0).into_owned();
    (rows, null.iter().copied().collect(), outside.iter().copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_symmetric(seed in any::<u64>(), m in 1usize..8, custom in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = if custom {
            let (rows, _, _) = low_rank(seed, m, m);
            DistanceSpec { weighting: Weighting::Custom(rows), subset: None }
        } else {
            DistanceSpec::inverse_variance()
        };
        let sample = Array2::from_shape_fn((30, m), |_| StandardNormal.sample(&mut rng));
        let dist = WeightedDistance::new(&spec, &names(m), Some(&sample)).unwrap();
        let (a, b) = (gaussian_vec(&mut rng, m), gaussian_vec(&mut rng, m));
        let (ab, ba) = (dist.eval(&a, &b), dist.eval(&b, &a));
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()), "{ab} vs {ba}");
        prop_assert!(ab >= -1e-12);
        prop_assert_eq!(dist.eval(&a, &a), 0.0);
    }

    #[test]
    fn distance_vanishes_exactly_on_the_null_space(seed in any::<u64>(), m in 2usize..8, drop in 1usize..4) {
        let rank = m.saturating_sub(drop).max(1);
        let (rows, null, outside) = low_rank(seed, m, rank);
        let spec = DistanceSpec { weighting: Weighting::Custom(rows), subset: None };
        let dist = WeightedDistance::new(&spec, &names(m), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let a = gaussian_vec(&mut rng, m);
        let shifted: Vec<f64> = a.iter().zip(&null).map(|(x, d)| x + d).collect();
        prop_assert!(dist.eval(&a, &shifted).abs() <= 1e-10, "{}", dist.eval(&a, &shifted));
        let moved: Vec<f64> = a.iter().zip(&outside).map(|(x, d)| x + d).collect();
        prop_assert!(dist.eval(&a, &moved) > 1e-8);
    }

    #[test]
    fn rejection_keeps_an_exact_order_statistic(
        seed in any::<u64>(),
        n in 1usize..300,
        keep in 0.001f64..1.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = ParameterSpace::new(vec![Parameter::new("a", 0.0, 1.0), Parameter::new("b", -1.0, 1.0)]).unwrap();
        // coarse values so ties occur
        let rows: Vec<Row> = (0..n)
            .map(|i| Row {
                theta: vec![(i % 7) as f64 / 7.0, 0.0],
                stats: gaussian_vec(&mut rng, 3).into_iter().map(|v| (4.0 * v).round() / 4.0).collect(),
            })
            .collect();
        let table = ExperimentTable::from_rows(space, names(3), rows, seed).unwrap();
        let dist = WeightedDistance::for_table(&DistanceSpec::identity(), &table).unwrap();
        let s_star = SummaryVector::new(names(3), vec![0.0, 0.25, -0.5]).unwrap();
        let res = rejection_abc_with(&table, &s_star, &dist, keep).unwrap();
        prop_assert_eq!(res.retained.len(), ((keep * n as f64).ceil() as usize).clamp(1, n));
        let all: Vec<f64> = table.rows().iter().map(|r| dist.eval(&r.stats, s_star.values())).collect();
        let threshold = res.threshold();
        for (i, d) in all.iter().enumerate() {
            if !res.retained.contains(&i) {
                prop_assert!(threshold <= *d, "excluded row {i} at {d} below {threshold}");
            }
        }
        prop_assert!(res.distances.windows(2).all(|w| w[0] <= w[1]));
    }
}

/// Asymptotic Kolmogorov p-value for the one-sample statistic `d` on `n` draws.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as usize % 2 == 1 { 1.0 } else { -1.0 };
            2.0 * sign * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    p.clamp(0.0, 1.0)
}

fn ks_uniform(mut draws: Vec<f64>, low: f64, high: f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = (x - low) / (high - low);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn infinite_epsilon_chain_samples_the_prior() {
    let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
    let space = LineSimulator::default_space();
    let s_star = simulate_line(&LineModelConfig::straight(), 1.3, 99).unwrap();
    let dist = WeightedDistance::new(&DistanceSpec::identity(), s_star.names(), None).unwrap();
    for seed in [1u64, 2, 3] {
        let cfg = AbcConfig {
            epsilon: f64::INFINITY,
            proposal_scale: 5.0,
            chain_length: 10_001,
            burn_in: 0.0,
            initial: Some(vec![1.0]),
            seed,
            ..AbcConfig::default()
        };
        let res = mcmc_abc(&sim, &space, &s_star, &dist, &cfg).unwrap();
        assert_eq!(res.accepted, 10_000);
        let draws: Vec<f64> = res.chain[1..].iter().map(|t| t[0]).collect();
        let p = &space.params()[0];
        let d = ks_uniform(draws, p.low, p.high);
        let pv = ks_p_value(d, 10_000);
        assert!(pv > 0.01, "seed {seed}: KS statistic {d}, p = {pv}");
    }
}

#[test]
fn ks_helper_agrees_with_tabulated_critical_value() {
    // the 1% critical value of the Kolmogorov distribution is 1.6276 / sqrt(n)
    let n = 10_000;
    let d = 1.6276 / (n as f64).sqrt();
    let pv = ks_p_value(d, n);
    assert!((pv - 0.01).abs() < 5e-4, "{pv}");
}
