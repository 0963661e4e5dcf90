use std::sync::Arc;

use regcal::experiment::{ParameterSpace, Simulator};
use regcal::glmnet::PenaltySpec;
use regcal::models::{LineModelConfig, LineSimulator};
use regcal::selector::{
    build_selection_table, evaluate_selection, train_selector, Candidate, CandidateParameters, CandidateSet,
};

fn line_candidates(parameters: CandidateParameters) -> CandidateSet {
    let straight: Arc<dyn Simulator> = Arc::new(LineSimulator::new(LineModelConfig::straight()).unwrap());
    let broken: Arc<dyn Simulator> = Arc::new(LineSimulator::new(LineModelConfig::broken()).unwrap());
    CandidateSet::new(vec![
        Candidate::new("straight", straight, parameters.clone()),
        Candidate::new("broken", broken, parameters),
    ])
    .unwrap()
}

fn accuracy(cands: &CandidateSet, test: &CandidateSet) -> f64 {
    let train = build_selection_table(cands, 400, 10).unwrap();
    let held_out = build_selection_table(test, 500, 11).unwrap();
    let selector = train_selector(&train, &PenaltySpec::default(), 12).unwrap();
    let report = evaluate_selection(&selector, &held_out).unwrap();
    for (label, row) in report.labels.iter().zip(&report.confusion) {
        assert_eq!(row.iter().sum::<usize>(), held_out.counts()[label]);
    }
    report.accuracy
}

#[test]
fn randomized_slope_keeps_accuracy() {
    let fixed = line_candidates(CandidateParameters::Fixed(vec![1.0]));
    let nuisance = line_candidates(CandidateParameters::Sampled(ParameterSpace::single("beta", 0.8, 1.2).unwrap()));
    let a = accuracy(&fixed, &fixed);
    let b = accuracy(&nuisance, &fixed);
    assert!(a > 0.9, "fixed accuracy {a}");
    assert!((a - b).abs() <= 0.05, "fixed {a}, randomized {b}");
}
