//! Elastic-net penalized regression and multinomial classification.
//!
//! Both fitters solve, on standardized features,
//!
//! ```text
//! loss(a, b) + lambda * [ alpha * ||b||_1 + (1 - alpha) * ||b||_2^2 / 2 ]
//! ```
//!
//! by cyclic coordinate descent along a decreasing lambda path, and pick
//! lambda by K-fold cross-validation (plain minimum of the CV curve).
//! Coefficients are reported on the original feature scale.

mod gaussian;
mod multinomial;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::SummaryVector;

pub use gaussian::{elastic_net_path, fit_elastic_net, fit_elastic_net_many, PathFit, PathPoint, RegressionModel};
pub use multinomial::{
    fit_multinomial, multinomial_path, ClassPrediction, ClassifierModel, MultinomialPathPoint,
};

/// Which lambda values to fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LambdaPath {
    /// `count` log-spaced values from lambda_max down to `ratio * lambda_max`.
    Auto { count: usize, ratio: f64 },
    /// Explicit values, strictly descending and positive.
    Explicit(Vec<f64>),
}

impl Default for LambdaPath {
    fn default() -> Self {
        LambdaPath::Auto {
            count: 100,
            ratio: 1e-4,
        }
    }
}

/// How rows are assigned to cross-validation folds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldScheme {
    /// Seeded random permutation.
    #[default]
    Seeded,
    /// Rows are put in a canonical order by content digest before folding,
    /// which makes the fit independent of the input row order.
    ContentHash,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitControl {
    /// Coordinate descent stops once, over a full sweep, the largest
    /// `G_jj * (change in b_j)^2` falls below `tol` times the response
    /// variance (for the classifier: below `tol`). With standardized
    /// features this bounds every coefficient change by `sqrt(tol) * sd(y)`.
    pub tol: f64,
    /// Sweep cap per lambda.
    pub max_sweeps: usize,
    /// Stop the path once the fraction of deviance explained changes by less
    /// than this between consecutive lambdas.
    pub path_min_dev_change: f64,
    /// Stop the path once this fraction of deviance is explained.
    pub path_max_dev_ratio: f64,
}

impl Default for FitControl {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 100_000,
            path_min_dev_change: 1e-5,
            path_max_dev_ratio: 0.999,
        }
    }
}

impl FitControl {
    /// Full path, no early termination.
    pub fn exhaustive(tol: f64) -> Self {
        Self {
            tol,
            path_min_dev_change: 0.0,
            path_max_dev_ratio: f64::INFINITY,
            ..Self::default()
        }
    }
}

/// How cross-validation picks lambda along the path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaRule {
    /// Smallest mean held-out error.
    #[default]
    Min,
    /// Largest lambda whose error is within one standard error of the
    /// minimum.
    OneStandardError,
}

impl std::str::FromStr for LambdaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(LambdaRule::Min),
            "one-standard-error" | "1se" => Ok(LambdaRule::OneStandardError),
            other => Err(Error::InvalidArgument(format!(
                "unknown lambda rule `{other}` (expected min or 1se)"
            ))),
        }
    }
}

/// Mean held-out error per lambda (`fold_totals[f][l]` summed over folds,
/// divided by the row count) and the index the rule picks.
pub(crate) fn cv_select(rule: LambdaRule, fold_totals: &[&[f64]], fold_sizes: &[usize]) -> (Vec<f64>, usize) {
    let n: usize = fold_sizes.iter().sum();
    let m = fold_totals[0].len();
    let cv: Vec<f64> = (0..m)
        .map(|l| fold_totals.iter().map(|t| t[l]).sum::<f64>() / n as f64)
        .collect();
    let best = cv
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v < cv[best] { i } else { best });
    match rule {
        LambdaRule::Min => (cv, best),
        LambdaRule::OneStandardError => {
            let k = fold_totals.len() as f64;
            let spread: f64 = fold_totals
                .iter()
                .zip(fold_sizes)
                .map(|(t, &size)| size as f64 * (t[best] / size as f64 - cv[best]).powi(2))
                .sum::<f64>()
                / n as f64;
            let se = (spread / (k - 1.0)).sqrt();
            let pick = (0..=best).find(|&i| cv[i] <= cv[best] + se).unwrap_or(best);
            (cv, pick)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub alpha: f64,
    pub lambda_path: LambdaPath,
    pub cv_folds: usize,
    #[serde(default)]
    pub fold_scheme: FoldScheme,
    #[serde(default)]
    pub lambda_rule: LambdaRule,
    #[serde(default)]
    pub control: FitControl,
}

impl Default for PenaltySpec {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lambda_path: LambdaPath::default(),
            cv_folds: 10,
            fold_scheme: FoldScheme::default(),
            lambda_rule: LambdaRule::default(),
            control: FitControl::default(),
        }
    }
}

impl PenaltySpec {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cv folds, got {}",
                self.cv_folds
            )));
        }
        match &self.lambda_path {
            LambdaPath::Auto { count, ratio } => {
                if *count == 0 || !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::InvalidArgument(
                        "auto lambda path needs count >= 1 and 0 < ratio < 1".into(),
                    ));
                }
            }
            LambdaPath::Explicit(values) => validate_explicit_path(values)?,
        }
        Ok(())
    }
}

pub(crate) fn validate_explicit_path(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty lambda path".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("lambda values must be finite and >= 0".into()));
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("lambda path must be strictly descending".into()));
    }
    Ok(())
}

pub(crate) fn auto_path(lambda_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if lambda_max <= 0.0 || !lambda_max.is_finite() {
        return vec![0.0];
    }
    if count == 1 {
        return vec![lambda_max];
    }
    let log_max = lambda_max.ln();
    let step = ratio.ln() / (count - 1) as f64;
    (0..count).map(|i| (log_max + step * i as f64).exp()).collect()
}

/// Alpha used when computing lambda_max; a pure ridge has no finite
/// "all coefficients zero" lambda.
pub(crate) fn alpha_for_lambda_max(alpha: f64) -> f64 {
    alpha.max(1e-3)
}

/// `S(z, gamma) = sign(z) * max(|z| - gamma, 0)`
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Column means and scales used to standardize features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Columns with no variation; their coefficients are fixed at zero.
    #[serde(default)]
    pub constant: Vec<bool>,
}

/// Population standard deviation below which a column is treated as constant.
pub(crate) fn is_constant(variance: f64, max_abs: f64) -> bool {
    let floor = 16.0 * f64::EPSILON * max_abs.max(f64::MIN_POSITIVE);
    !(variance > floor * floor)
}

/// Fold index for every row.
pub(crate) fn assign_folds(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % folds;
    }
    assignment
}

/// Fold assignment that keeps every class present in every fold.
pub(crate) fn assign_stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut offset = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, &row) in members.iter().enumerate() {
            assignment[row] = (pos + offset) % folds;
        }
        offset += members.len();
    }
    assignment
}

/// Indices that put rows into canonical order by content digest.
pub(crate) fn canonical_order(digests: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..digests.len()).collect();
    order.sort_by_key(|&i| digests[i]);
    order
}

pub(crate) fn digest_row(x: &[f64], y: f64) -> u64 {
    crate::experiment::row_digest(None, &[y], x)
}

/// Looks up model features in a summary vector, in model order.
pub(crate) fn align_features(features: &[String], s: &SummaryVector) -> Result<Vec<f64>> {
    if s.names() == features {
        return Ok(s.values().to_vec());
    }
    let index: std::collections::HashMap<&str, f64> = s
        .names()
        .iter()
        .map(String::as_str)
        .zip(s.values().iter().copied())
        .collect();
    features
        .iter()
        .map(|f| {
            index
                .get(f.as_str())
                .copied()
                .ok_or_else(|| Error::MissingFeature(f.clone()))
        })
        .collect()
}

/// Fit outcome that does not invalidate the model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub sweeps: usize,
    pub path_length: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
    /// CV curve as (lambda, error) pairs.
    #[serde(default)]
    pub cv_curve: Vec<(f64, f64)>,
}

/// Tagged JSON form of a fitted model.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelArtifact {
    Regression(RegressionModel),
    Classifier(ClassifierModel),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
        assert_eq!(soft_threshold(-2.0, 2.0), 0.0);
    }

    #[test]
    fn auto_path_spans_ratio() {
        let path = auto_path(2.0, 100, 1e-4);
        assert_eq!(path.len(), 100);
        assert!((path[0] - 2.0).abs() < 1e-12);
        assert!((path[99] - 2e-4).abs() < 1e-12);
        assert!(path.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn penalty_validation() {
        assert!(PenaltySpec::default().validate().is_ok());
        assert!(PenaltySpec::with_alpha(1.5).validate().is_err());
        let mut spec = PenaltySpec::default();
        spec.lambda_path = LambdaPath::Explicit(vec![0.1, 0.2]);
        assert!(spec.validate().is_err());
        spec.lambda_path = LambdaPath::Explicit(vec![0.2, 0.1]);
        assert!(spec.validate().is_ok());
        spec.cv_folds = 1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn folds_are_balanced() {
        let folds = assign_folds(103, 10, 1);
        for f in 0..10 {
            let c = folds.iter().filter(|&&x| x == f).count();
            assert!(c == 10 || c == 11);
        }
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let strat = assign_stratified_folds(&labels, 3, 5, 2);
        for f in 0..5 {
            for c in 0..3 {
                assert!((0..60).any(|i| strat[i] == f && labels[i] == c));
            }
        }
    }
}
