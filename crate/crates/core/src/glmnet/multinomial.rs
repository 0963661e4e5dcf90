//! Elastic-net multinomial logistic regression.
//!
//! Each class's coefficient block is updated in turn by penalized weighted
//! least squares on the quadratic approximation of the log-likelihood at
//! the current fit; the outer loop repeats until no coefficient moves.

use indexmap::IndexMap;
use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    align_features, alpha_for_lambda_max, assign_stratified_folds, auto_path, canonical_order, cv_select,
    digest_row, is_constant, soft_threshold, FitControl, FitDiagnostics, FoldScheme, LambdaPath,
    ModelArtifact, PenaltySpec, Standardization,
};
use crate::error::{Error, Result};
use crate::experiment::SummaryVector;

const MIN_WEIGHT: f64 = 1e-5;
const PROB_FLOOR: f64 = 1e-5;

/// Standardized columns of a design matrix.
struct Standardized {
    n: usize,
    cols: Vec<Vec<f64>>,
    means: Vec<f64>,
    scales: Vec<f64>,
    constant: Vec<bool>,
}

impl Standardized {
    fn new(x: &Array2<f64>, rows: &[usize]) -> Self {
        let p = x.ncols();
        let n = rows.len();
        let mut cols = Vec::with_capacity(p);
        let mut means = vec![0.0; p];
        let mut scales = vec![1.0; p];
        let mut constant = vec![false; p];
        for j in 0..p {
            let col: Vec<f64> = rows.iter().map(|&i| x[[i, j]]).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let max_abs = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            means[j] = mean;
            if is_constant(var, max_abs) {
                constant[j] = true;
                cols.push(vec![0.0; n]);
            } else {
                let s = var.sqrt();
                scales[j] = s;
                cols.push(col.iter().map(|v| (v - mean) / s).collect());
            }
        }
        Self {
            n,
            cols,
            means,
            scales,
            constant,
        }
    }

    fn standardize_row(&self, x: &Array2<f64>, i: usize) -> Vec<f64> {
        (0..self.cols.len())
            .map(|j| {
                if self.constant[j] {
                    0.0
                } else {
                    (x[[i, j]] - self.means[j]) / self.scales[j]
                }
            })
            .collect()
    }
}

fn softmax_into(eta: &[f64], out: &mut [f64]) {
    let max = eta.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let mut total = 0.0;
    for (o, e) in out.iter_mut().zip(eta) {
        *o = (e - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

struct State {
    intercepts: Vec<f64>,
    /// `coef[k][j]` on standardized features.
    coef: Vec<Vec<f64>>,
    /// Row-major n x K linear predictors.
    eta: Vec<f64>,
}

struct Solver<'a> {
    data: &'a Standardized,
    labels: &'a [usize],
    k: usize,
    usable: Vec<usize>,
}

impl<'a> Solver<'a> {
    fn new(data: &'a Standardized, labels: &'a [usize], k: usize) -> Self {
        let usable = (0..data.cols.len()).filter(|&j| !data.constant[j]).collect();
        Self {
            data,
            labels,
            k,
            usable,
        }
    }

    fn class_freq(&self) -> Vec<f64> {
        let mut freq = vec![0.0; self.k];
        for &l in self.labels {
            freq[l] += 1.0;
        }
        freq.iter().map(|c| c / self.data.n as f64).collect()
    }

    fn null_state(&self) -> State {
        let freq = self.class_freq();
        let logs: Vec<f64> = freq.iter().map(|f| f.max(PROB_FLOOR).ln()).collect();
        let centre = logs.iter().sum::<f64>() / self.k as f64;
        let intercepts: Vec<f64> = logs.iter().map(|l| l - centre).collect();
        let eta = (0..self.data.n).flat_map(|_| intercepts.clone()).collect();
        State {
            intercepts,
            coef: vec![vec![0.0; self.data.cols.len()]; self.k],
            eta,
        }
    }

    fn lambda_max(&self, alpha: f64) -> f64 {
        let freq = self.class_freq();
        let n = self.data.n as f64;
        let mut best = 0.0f64;
        for &j in &self.usable {
            let col = &self.data.cols[j];
            for (c, fc) in freq.iter().enumerate() {
                let g: f64 = col
                    .iter()
                    .zip(self.labels)
                    .map(|(z, &l)| z * (f64::from(u8::from(l == c)) - fc))
                    .sum::<f64>()
                    / n;
                best = best.max(g.abs());
            }
        }
        best / alpha_for_lambda_max(alpha)
    }

    fn deviance(&self, state: &State) -> f64 {
        let mut prob = vec![0.0; self.k];
        let mut dev = 0.0;
        for (i, &l) in self.labels.iter().enumerate() {
            softmax_into(&state.eta[i * self.k..(i + 1) * self.k], &mut prob);
            dev -= 2.0 * prob[l].max(f64::MIN_POSITIVE).ln();
        }
        dev
    }

    /// Fits one lambda from the warm start in `state`; returns sweeps and
    /// convergence.
    fn solve(
        &self,
        state: &mut State,
        alpha: f64,
        lambda: f64,
        control: &FitControl,
    ) -> (usize, bool) {
        let n = self.data.n;
        let nf = n as f64;
        let k = self.k;
        let l1 = lambda * alpha;
        let l2 = lambda * (1.0 - alpha);
        let mut prob = vec![0.0; k];
        let mut w = vec![0.0; n];
        let mut r = vec![0.0; n];
        let mut v = vec![0.0; self.data.cols.len()];
        let mut sweeps = 0;
        let mut active = Vec::with_capacity(self.usable.len());
        loop {
            let mut outer_change = 0.0f64;
            for c in 0..k {
                for i in 0..n {
                    softmax_into(&state.eta[i * k..(i + 1) * k], &mut prob);
                    let pc = prob[c];
                    w[i] = (pc * (1.0 - pc)).max(MIN_WEIGHT);
                    let yc = f64::from(u8::from(self.labels[i] == c));
                    r[i] = (yc - pc) / w[i];
                }
                let wsum: f64 = w.iter().sum();
                for &j in &self.usable {
                    v[j] = self.data.cols[j]
                        .iter()
                        .zip(&w)
                        .map(|(z, wi)| wi * z * z)
                        .sum::<f64>()
                        / nf;
                }
                let start_a = state.intercepts[c];
                let start_b = state.coef[c].clone();
                let coef = &mut state.coef[c];
                let update = |j: usize, coef: &mut [f64], r: &mut [f64]| -> f64 {
                    let col = &self.data.cols[j];
                    let g = col
                        .iter()
                        .zip(w.iter().zip(r.iter()))
                        .map(|(z, (wi, ri))| wi * z * ri)
                        .sum::<f64>()
                        / nf
                        + v[j] * coef[j];
                    let new = soft_threshold(g, l1) / (v[j] + l2);
                    let delta = new - coef[j];
                    if delta != 0.0 {
                        coef[j] = new;
                        for (ri, z) in r.iter_mut().zip(col) {
                            *ri -= delta * z;
                        }
                    }
                    v[j] * delta * delta
                };
                let intercept_step = |r: &mut [f64]| -> f64 {
                    let d = w.iter().zip(r.iter()).map(|(wi, ri)| wi * ri).sum::<f64>() / wsum;
                    for ri in r.iter_mut() {
                        *ri -= d;
                    }
                    d
                };
                let mut a_shift = 0.0;
                'inner: loop {
                    let d = intercept_step(&mut r);
                    a_shift += d;
                    let mut dmax = wsum / nf * d * d;
                    for &j in &self.usable {
                        dmax = dmax.max(update(j, coef, &mut r));
                    }
                    sweeps += 1;
                    if dmax < control.tol || sweeps >= control.max_sweeps {
                        break;
                    }
                    active.clear();
                    active.extend(self.usable.iter().copied().filter(|&j| coef[j] != 0.0));
                    loop {
                        let d = intercept_step(&mut r);
                        a_shift += d;
                        let mut dmax = wsum / nf * d * d;
                        for &j in &active {
                            dmax = dmax.max(update(j, coef, &mut r));
                        }
                        sweeps += 1;
                        if sweeps >= control.max_sweeps {
                            break 'inner;
                        }
                        if dmax < control.tol {
                            break;
                        }
                    }
                }
                state.intercepts[c] = start_a + a_shift;
                outer_change = outer_change.max(a_shift.abs());
                for j in 0..coef.len() {
                    outer_change = outer_change.max((coef[j] - start_b[j]).abs());
                }
                let a = state.intercepts[c];
                for i in 0..n {
                    state.eta[i * k + c] = a + self
                        .usable
                        .iter()
                        .map(|&j| self.data.cols[j][i] * coef[j])
                        .sum::<f64>();
                }
            }
            if outer_change * outer_change < control.tol {
                break;
            }
            if sweeps >= control.max_sweeps {
                self.centre(state);
                return (sweeps, false);
            }
        }
        self.centre(state);
        (sweeps, true)
    }

    fn centre(&self, state: &mut State) {
        let shift = state.intercepts.iter().sum::<f64>() / self.k as f64;
        for a in &mut state.intercepts {
            *a -= shift;
        }
        for e in &mut state.eta {
            *e -= shift;
        }
    }

    fn solve_path(
        &self,
        alpha: f64,
        lambdas: &[f64],
        control: &FitControl,
        stop_early: bool,
    ) -> Vec<(f64, State, usize, bool)> {
        let mut state = self.null_state();
        let null_dev = self.deviance(&state);
        let mut prev_ratio = 0.0;
        let mut out = Vec::with_capacity(lambdas.len());
        for (i, &lambda) in lambdas.iter().enumerate() {
            let (sweeps, converged) = self.solve(&mut state, alpha, lambda, control);
            let snapshot = State {
                intercepts: state.intercepts.clone(),
                coef: state.coef.clone(),
                eta: Vec::new(),
            };
            out.push((lambda, snapshot, sweeps, converged));
            if stop_early {
                let ratio = if null_dev > 0.0 {
                    1.0 - self.deviance(&state) / null_dev
                } else {
                    0.0
                };
                if i + 1 >= 5
                    && (ratio > control.path_max_dev_ratio
                        || ratio - prev_ratio < control.path_min_dev_change * ratio)
                {
                    break;
                }
                prev_ratio = ratio;
            }
        }
        out
    }
}

/// One fitted point of a multinomial path, on the original feature scale.
#[derive(Clone, Debug)]
pub struct MultinomialPathPoint {
    pub lambda: f64,
    pub intercepts: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub converged: bool,
}

fn to_original(std: &Standardized, state: &State) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = std.cols.len();
    let coefficients: Vec<Vec<f64>> = state
        .coef
        .iter()
        .map(|b| (0..p).map(|j| b[j] / std.scales[j]).collect())
        .collect();
    let intercepts = state
        .intercepts
        .iter()
        .zip(&coefficients)
        .map(|(a, b)| a - b.iter().zip(&std.means).map(|(bj, m)| bj * m).sum::<f64>())
        .collect();
    (intercepts, coefficients)
}

fn check_labels(labels: &[usize], n_classes: usize, n: usize, min_members: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} rows but {} labels",
            labels.len()
        )));
    }
    if n_classes < 2 {
        return Err(Error::Degenerate("classification needs at least two classes".into()));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::InvalidArgument(format!("label index {l} out of range")));
        }
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c < min_members.max(1)) {
        return Err(Error::Degenerate(format!(
            "class {c} has {} member(s), need at least {}",
            counts[c],
            min_members.max(1)
        )));
    }
    Ok(())
}

/// Fits the penalized multinomial model at each of `lambdas`.
pub fn multinomial_path(
    x: &Array2<f64>,
    labels: &[usize],
    n_classes: usize,
    alpha: f64,
    lambdas: &[f64],
    control: &FitControl,
) -> Result<Vec<MultinomialPathPoint>> {
    super::validate_explicit_path(lambdas)?;
    check_labels(labels, n_classes, x.nrows(), 1)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix".into()));
    }
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let std = Standardized::new(x, &rows);
    let solver = Solver::new(&std, labels, n_classes);
    Ok(solver
        .solve_path(alpha, lambdas, control, false)
        .into_iter()
        .map(|(lambda, state, _, converged)| {
            let (intercepts, coefficients) = to_original(&std, &state);
            MultinomialPathPoint {
                lambda,
                intercepts,
                coefficients,
                converged,
            }
        })
        .collect())
}

/// Predicted class and per-class probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPrediction {
    pub label: String,
    pub index: usize,
    pub probabilities: IndexMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ClassifierRepr", into = "ClassifierRepr")]
pub struct ClassifierModel {
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub intercepts: Vec<f64>,
    /// Per class, nonzero coefficients only (original scale).
    pub coefficients: Vec<IndexMap<String, f64>>,
    pub standardization: Standardization,
    pub alpha: f64,
    pub lambda_selected: f64,
    pub cv_error: f64,
    pub diagnostics: FitDiagnostics,
    /// Digests of the rows this model was trained on.
    pub training_digests: Vec<u64>,
    dense: Vec<Vec<f64>>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ClassifierRepr {
    classes: Vec<String>,
    features: Vec<String>,
    alpha: f64,
    lambda: f64,
    intercepts: Vec<f64>,
    coefficients: Vec<IndexMap<String, f64>>,
    standardization: Standardization,
    cv_error: f64,
    diagnostics: FitDiagnostics,
    #[serde(default)]
    training_digests: Vec<u64>,
}

impl From<ClassifierRepr> for ClassifierModel {
    fn from(r: ClassifierRepr) -> Self {
        let mut m = ClassifierModel {
            classes: r.classes,
            features: r.features,
            intercepts: r.intercepts,
            coefficients: r.coefficients,
            standardization: r.standardization,
            alpha: r.alpha,
            lambda_selected: r.lambda,
            cv_error: r.cv_error,
            diagnostics: r.diagnostics,
            training_digests: r.training_digests,
            dense: Vec::new(),
        };
        m.rebuild_dense();
        m
    }
}

impl From<ClassifierModel> for ClassifierRepr {
    fn from(m: ClassifierModel) -> Self {
        Self {
            classes: m.classes,
            features: m.features,
            alpha: m.alpha,
            lambda: m.lambda_selected,
            intercepts: m.intercepts,
            coefficients: m.coefficients,
            standardization: m.standardization,
            cv_error: m.cv_error,
            diagnostics: m.diagnostics,
            training_digests: m.training_digests,
        }
    }
}

impl ClassifierModel {
    fn rebuild_dense(&mut self) {
        self.dense = self
            .coefficients
            .iter()
            .map(|map| {
                self.features
                    .iter()
                    .map(|f| map.get(f).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
    }

    /// A classifier with explicit dense coefficients (`coefficients[k][j]`).
    pub fn from_parts(
        classes: Vec<String>,
        features: Vec<String>,
        intercepts: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = classes.len();
        let p = features.len();
        if k < 2 || intercepts.len() != k || coefficients.len() != k {
            return Err(Error::DimensionMismatch(
                "need >= 2 classes with one intercept and coefficient row each".into(),
            ));
        }
        if coefficients.iter().any(|row| row.len() != p) {
            return Err(Error::DimensionMismatch("coefficient row length != features".into()));
        }
        let maps = coefficients
            .iter()
            .map(|row| {
                features
                    .iter()
                    .zip(row)
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(f, v)| (f.clone(), *v))
                    .collect()
            })
            .collect();
        let mut m = ClassifierModel {
            classes,
            standardization: Standardization {
                means: vec![0.0; p],
                scales: vec![1.0; p],
                constant: vec![false; p],
            },
            features,
            intercepts,
            coefficients: maps,
            alpha: 1.0,
            lambda_selected: 0.0,
            cv_error: 0.0,
            diagnostics: FitDiagnostics {
                converged: true,
                ..FitDiagnostics::default()
            },
            training_digests: Vec::new(),
            dense: Vec::new(),
        };
        m.rebuild_dense();
        Ok(m)
    }

    pub fn dense_coefficients(&self) -> &[Vec<f64>] {
        &self.dense
    }

    /// Linear predictors for values in model feature order.
    pub fn linear_predictors(&self, values: &[f64]) -> Vec<f64> {
        self.intercepts
            .iter()
            .zip(&self.dense)
            .map(|(a, b)| {
                a + b
                    .iter()
                    .zip(values)
                    .filter(|(bj, _)| **bj != 0.0)
                    .map(|(bj, v)| bj * v)
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn probabilities_row(&self, values: &[f64]) -> Vec<f64> {
        let eta = self.linear_predictors(values);
        let mut prob = vec![0.0; eta.len()];
        softmax_into(&eta, &mut prob);
        prob
    }

    pub fn predict_row(&self, values: &[f64]) -> ClassPrediction {
        let prob = self.probabilities_row(values);
        let index = prob
            .iter()
            .enumerate()
            .fold(0, |best, (i, p)| if *p > prob[best] { i } else { best });
        ClassPrediction {
            label: self.classes[index].clone(),
            index,
            probabilities: self.classes.iter().cloned().zip(prob).collect(),
        }
    }

    pub fn predict(&self, s: &SummaryVector) -> Result<ClassPrediction> {
        let values = align_features(&self.features, s)?;
        Ok(self.predict_row(&values))
    }

    /// For two classes, the logit of the second class against the first:
    /// `Pr(class 1) = 1 / (1 + exp(-(a + b'x)))`.
    pub fn binary_logit(&self) -> Option<(f64, Vec<f64>)> {
        if self.classes.len() != 2 {
            return None;
        }
        let a = self.intercepts[1] - self.intercepts[0];
        let b = self.dense[1]
            .iter()
            .zip(&self.dense[0])
            .map(|(b1, b0)| b1 - b0)
            .collect();
        Some((a, b))
    }

    /// Sum over classes of |coefficient| for each feature.
    pub fn l1_mass(&self) -> Vec<f64> {
        (0..self.features.len())
            .map(|j| self.dense.iter().map(|row| row[j].abs()).sum())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelArtifact::Classifier(self.clone()))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text)? {
            ModelArtifact::Classifier(m) => Ok(m),
            ModelArtifact::Regression(_) => Err(Error::InvalidArgument(
                "artifact holds a regression, expected a classifier".into(),
            )),
        }
    }
}

/// Cross-validated multinomial elastic net; `labels[i]` indexes `classes`.
pub fn fit_multinomial(
    x: &Array2<f64>,
    labels: &[usize],
    classes: &[String],
    features: &[String],
    spec: &PenaltySpec,
    seed: u64,
) -> Result<ClassifierModel> {
    spec.validate()?;
    let (n, p) = x.dim();
    if features.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} feature names for {p} columns",
            features.len()
        )));
    }
    check_labels(labels, classes.len(), n, spec.cv_folds)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix".into()));
    }
    let k = classes.len();

    let order: Vec<usize> = match spec.fold_scheme {
        FoldScheme::Seeded => (0..n).collect(),
        FoldScheme::ContentHash => {
            let digests: Vec<u64> = (0..n)
                .map(|i| digest_row(&x.row(i).to_vec(), labels[i] as f64))
                .collect();
            canonical_order(&digests)
        }
    };
    let xs = x.select(Axis(0), &order);
    let ys: Vec<usize> = order.iter().map(|&i| labels[i]).collect();

    let all: Vec<usize> = (0..n).collect();
    let std = Standardized::new(&xs, &all);
    let solver = Solver::new(&std, &ys, k);
    let lambdas = match &spec.lambda_path {
        LambdaPath::Auto { count, ratio } => {
            auto_path(solver.lambda_max(spec.alpha), *count, *ratio)
        }
        LambdaPath::Explicit(v) => v.clone(),
    };
    let path = solver.solve_path(spec.alpha, &lambdas, &spec.control, true);
    let lambdas: Vec<f64> = path.iter().map(|pt| pt.0).collect();

    let folds = assign_stratified_folds(&ys, k, spec.cv_folds, seed);
    let fold_dev: Vec<(Vec<f64>, bool)> = (0..spec.cv_folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
            let held: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
            let fold_std = Standardized::new(&xs, &train);
            let fold_labels: Vec<usize> = train.iter().map(|&i| ys[i]).collect();
            let fold_solver = Solver::new(&fold_std, &fold_labels, k);
            let solved = fold_solver.solve_path(spec.alpha, &lambdas, &spec.control, false);
            let rows: Vec<Vec<f64>> = held.iter().map(|&i| fold_std.standardize_row(&xs, i)).collect();
            let mut prob = vec![0.0; k];
            let devs = solved
                .iter()
                .map(|(_, state, _, _)| {
                    rows.iter()
                        .zip(&held)
                        .map(|(z, &i)| {
                            let eta: Vec<f64> = (0..k)
                                .map(|c| {
                                    state.intercepts[c]
                                        + z.iter().zip(&state.coef[c]).map(|(a, b)| a * b).sum::<f64>()
                                })
                                .collect();
                            softmax_into(&eta, &mut prob);
                            -2.0 * prob[ys[i]].clamp(PROB_FLOOR, 1.0).ln()
                        })
                        .sum::<f64>()
                })
                .collect();
            (devs, solved.iter().all(|s| s.3))
        })
        .collect();

    let fold_sizes: Vec<usize> = (0..spec.cv_folds).map(|f| folds.iter().filter(|&&g| g == f).count()).collect();
    let totals: Vec<&[f64]> = fold_dev.iter().map(|(d, _)| d.as_slice()).collect();
    let (cv, best) = cv_select(spec.lambda_rule, &totals, &fold_sizes);
    let (lambda, state, _, converged) = &path[best];

    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!("coordinate descent hit the sweep cap at lambda {lambda}"));
    }
    if fold_dev.iter().any(|(_, c)| !c) {
        warnings.push("some cross-validation fits hit the sweep cap".into());
    }
    let (intercepts, dense) = to_original(&std, state);
    let mut model = ClassifierModel::from_parts(classes.to_vec(), features.to_vec(), intercepts, dense)?;
    model.standardization = Standardization {
        means: std.means.clone(),
        scales: std.scales.clone(),
        constant: std.constant.clone(),
    };
    model.alpha = spec.alpha;
    model.lambda_selected = *lambda;
    model.cv_error = cv[best];
    model.diagnostics = FitDiagnostics {
        converged: *converged,
        sweeps: path.iter().map(|pt| pt.2).sum(),
        path_length: path.len(),
        warnings,
        cv_curve: lambdas.iter().copied().zip(cv.iter().copied()).collect(),
    };
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    fn classes(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("c{c}")).collect()
    }

    #[test]
    fn separable_classes_are_learned() {
        let n = 60;
        let x = Array2::from_shape_fn((n, 1), |(i, _)| if i < 30 { -1.0 - i as f64 * 0.01 } else { 1.0 + i as f64 * 0.01 });
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= 30)).collect();
        let model = fit_multinomial(&x, &labels, &classes(2), &names(1), &PenaltySpec::default(), 1).unwrap();
        for (v, expect) in [(-3.0, 0), (-0.8, 0), (0.9, 1), (4.0, 1)] {
            assert_eq!(model.predict_row(&[v]).index, expect, "at {v}");
        }
    }

    #[test]
    fn noise_features_give_uniform_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 300;
        let x = Array2::from_shape_fn((n, 4), |_| rng.sample(StandardNormal));
        let labels: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let model = fit_multinomial(&x, &labels, &classes(3), &names(4), &PenaltySpec::default(), 2).unwrap();
        let test = Array2::from_shape_fn((200, 4), |_| rng.sample::<f64, _>(StandardNormal));
        let mut avg = [0.0; 3];
        for row in test.outer_iter() {
            let p = model.probabilities_row(&row.to_vec());
            for c in 0..3 {
                avg[c] += p[c] / 200.0;
            }
        }
        for a in avg {
            assert!((a - 1.0 / 3.0).abs() < 0.05, "{avg:?}");
        }
    }

    #[test]
    fn zero_model_ties_go_to_first_class() {
        let m = ClassifierModel::from_parts(classes(2), names(1), vec![0.3, 0.3], vec![vec![0.0], vec![0.0]]).unwrap();
        let pred = m.predict_row(&[2.0]);
        assert_eq!(pred.index, 0);
        assert_eq!(pred.label, "c0");
        assert!((pred.probabilities["c0"] - 0.5).abs() < 1e-15);
        assert!((pred.probabilities["c1"] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn errors_on_single_or_thin_class() {
        let x = Array2::zeros((20, 1));
        let one = vec![0usize; 20];
        assert!(fit_multinomial(&x, &one, &classes(1), &names(1), &PenaltySpec::default(), 1).is_err());
        assert!(fit_multinomial(&x, &one, &classes(2), &names(1), &PenaltySpec::default(), 1).is_err());
        let mut thin = vec![0usize; 20];
        thin[0] = 1;
        assert!(matches!(
            fit_multinomial(&x, &thin, &classes(2), &names(1), &PenaltySpec::default(), 1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn classifier_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 120;
        let x = Array2::from_shape_fn((n, 3), |_| rng.sample(StandardNormal));
        let labels: Vec<usize> = (0..n).map(|i| usize::from(x[[i, 0]] + 0.3 * x[[i, 1]] > 0.0)).collect();
        let model = fit_multinomial(&x, &labels, &classes(2), &names(3), &PenaltySpec::default(), 3).unwrap();
        let text = model.to_json().unwrap();
        assert!(text.contains("\"kind\": \"classifier\""));
        let back = ClassifierModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        for row in x.outer_iter() {
            let a = model.probabilities_row(&row.to_vec());
            let b = back.probabilities_row(&row.to_vec());
            assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
        }
        assert!(crate::glmnet::RegressionModel::from_json(&text).is_err());
    }
}
