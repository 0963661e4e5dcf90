use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regcal::estimator::{evaluate, predictivity, rmse, train_estimator, FeatureExpansion};
use regcal::experiment::{
    derive_seed, run_experiment, sample_parameters, split_table, ExperimentTable, Parameter, ParameterSpace, Row,
};
use regcal::glmnet::{FoldScheme, PenaltySpec};
use regcal::models::{LineModelConfig, LineSimulator};

fn space_strategy() -> impl Strategy<Value = ParameterSpace> {
    prop::collection::vec((-1e3f64..1e3, 1e-6f64..1e3), 1..6).prop_map(|bounds| {
        let params = bounds
            .into_iter()
            .enumerate()
            .map(|(i, (low, width))| Parameter::new(format!("p{i}"), low, low + width))
            .collect();
        ParameterSpace::new(params).unwrap()
    })
}

proptest! {
    #[test]
    fn samples_stay_in_bounds(space in space_strategy(), n in 1usize..200, seed in any::<u64>()) {
        for theta in sample_parameters(&space, n, seed) {
            prop_assert!(space.contains(&theta), "{theta:?}");
        }
    }

    #[test]
    fn run_seeds_are_distinct(seed in any::<u64>()) {
        let seeds: HashSet<u64> = (0..5000).map(|i| derive_seed(seed, i)).collect();
        prop_assert_eq!(seeds.len(), 5000);
    }

    #[test]
    fn split_partitions_rows(n in 2usize..300, fraction in 0.001f64..0.999, seed in any::<u64>()) {
        let space = ParameterSpace::single("beta", 0.0, 2.0).unwrap();
        let rows: Vec<Row> = (0..n)
            .map(|i| Row { theta: vec![1.0], stats: vec![i as f64] })
            .collect();
        let table = ExperimentTable::from_rows(space, vec!["i".into()], rows, 0).unwrap();
        let (train, test) = split_table(&table, fraction, seed).unwrap();
        prop_assert_eq!(train.len(), (fraction * n as f64).floor() as usize);
        prop_assert_eq!(train.len() + test.len(), n);
        let mut seen: Vec<usize> = train.rows().iter().chain(test.rows()).map(|r| r.stats[0] as usize).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn predictivity_never_exceeds_one(
        pairs in prop::collection::vec((-10f64..10.0, -10f64..10.0), 2..40),
    ) {
        let (real, est): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Some(v) = predictivity(&real, &est) {
            prop_assert!(v <= 1.0);
            if v == 1.0 {
                // only rounding can hide a nonzero residual
                prop_assert!(rmse(&real, &est) <= 1e-7, "{real:?} {est:?}");
            }
        }
        if real.iter().any(|r| *r != real[0]) {
            prop_assert_eq!(predictivity(&real, &real), Some(1.0));
        }
    }
}

#[test]
fn worker_count_does_not_change_the_table() {
    let sim = LineSimulator::new(LineModelConfig::broken()).unwrap();
    let space = LineSimulator::default_space();
    let tables: Vec<ExperimentTable> = [1, 3, 8]
        .into_iter()
        .map(|threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_experiment(&sim, &space, 500, 42).unwrap())
        })
        .collect();
    assert_eq!(tables[0], tables[1]);
    assert_eq!(tables[0], tables[2]);
}

#[test]
fn content_hash_folds_make_training_order_free() {
    let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
    let space = LineSimulator::default_space();
    let table = run_experiment(&sim, &space, 400, 5).unwrap();
    let test = run_experiment(&sim, &space, 100, 6).unwrap();
    let spec = PenaltySpec {
        fold_scheme: FoldScheme::ContentHash,
        ..PenaltySpec::default()
    };
    let base = train_estimator(&table, &FeatureExpansion::default(), &spec, 11).unwrap();
    let reference = base.predict_table(&test).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut rows = table.rows().to_vec();
        rows.shuffle(&mut rng);
        let shuffled =
            ExperimentTable::from_rows(space.clone(), table.statistic_names().to_vec(), rows, table.seed()).unwrap();
        let est = train_estimator(&shuffled, &FeatureExpansion::default(), &spec, 11).unwrap();
        assert_eq!(est.predict_table(&test).unwrap(), reference);
    }
}

fn with_noise_column(table: &ExperimentTable, seed: u64) -> ExperimentTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = table
        .rows()
        .iter()
        .map(|r| {
            let mut stats = r.stats.clone();
            stats.push(StandardNormal.sample(&mut rng));
            Row { theta: r.theta.clone(), stats }
        })
        .collect();
    let mut names = table.statistic_names().to_vec();
    names.push("noise".into());
    ExperimentTable::from_rows(table.space().clone(), names, rows, table.seed()).unwrap()
}

#[test]
fn noise_statistic_barely_moves_test_error() {
    let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
    let space = LineSimulator::default_space();
    let train = run_experiment(&sim, &space, 1000, derive_seed(1, 0)).unwrap();
    let test = run_experiment(&sim, &space, 1000, derive_seed(1, 1)).unwrap();
    let spec = PenaltySpec::default();
    let plain = train_estimator(&train, &FeatureExpansion::default(), &spec, 2).unwrap();
    let noisy = train_estimator(&with_noise_column(&train, 8), &FeatureExpansion::default(), &spec, 2).unwrap();
    let a = evaluate(&plain, &test).unwrap().parameters[0].rmse;
    let b = evaluate(&noisy, &with_noise_column(&test, 9)).unwrap().parameters[0].rmse;
    assert!((b - a).abs() < 0.1 * a, "rmse {a} -> {b}");
}

#[test]
fn rmse_of_perfect_estimate_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let real: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..2.0)).collect();
    assert_eq!(rmse(&real, &real), 0.0);
    assert_eq!(predictivity(&real, &real), Some(1.0));
}
