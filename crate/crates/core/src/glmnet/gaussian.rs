//! Gaussian elastic net via covariance-mode coordinate descent.
//!
//! Each fit works on the standardized Gram matrix `G = Z'Z / n` and
//! `c = Z'y / n`, so a coordinate update costs O(p) and a sweep over zero
//! coefficients costs O(1) per feature. Cross-validation folds reuse the
//! full-data cross products: a fold's sums are the full sums minus the
//! held-out rows' sums, taken on data centered at the global means. Several
//! responses regressed on the same design share all of the `X` work.

use indexmap::IndexMap;
use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    alpha_for_lambda_max, assign_folds, auto_path, canonical_order, cv_select, is_constant, soft_threshold,
    FitControl, FitDiagnostics, FoldScheme, LambdaPath, ModelArtifact, PenaltySpec,
    Standardization,
};
use crate::error::{Error, Result};
use crate::experiment::SummaryVector;

/// Raw sums of the design over a set of rows, on globally centered data.
struct DesignSums {
    n: usize,
    p: usize,
    xx: Vec<f64>,
    x: Vec<f64>,
}

impl DesignSums {
    fn from_rows(xc: ArrayView2<f64>) -> Self {
        let (n, p) = xc.dim();
        let gram = xc.t().dot(&xc);
        let mut xx = vec![0.0; p * p];
        for j in 0..p {
            for k in 0..p {
                // matrixmultiply may round (j,k) and (k,j) differently
                xx[j * p + k] = 0.5 * (gram[[j, k]] + gram[[k, j]]);
            }
        }
        Self {
            n,
            p,
            xx,
            x: xc.sum_axis(Axis(0)).to_vec(),
        }
    }

    fn minus(&self, other: &DesignSums) -> DesignSums {
        DesignSums {
            n: self.n - other.n,
            p: self.p,
            xx: sub(&self.xx, &other.xx),
            x: sub(&self.x, &other.x),
        }
    }

    fn standardize(&self, max_abs: &[f64]) -> StdDesign {
        let n = self.n as f64;
        let p = self.p;
        let mean: Vec<f64> = self.x.iter().map(|s| s / n).collect();
        let mut scale = vec![1.0; p];
        let mut constant = vec![false; p];
        for j in 0..p {
            let var = self.xx[j * p + j] / n - mean[j] * mean[j];
            if is_constant(var, max_abs[j]) {
                constant[j] = true;
            } else {
                scale[j] = var.sqrt();
            }
        }
        let mut gram = vec![0.0; p * p];
        for j in 0..p {
            if constant[j] {
                continue;
            }
            for k in 0..p {
                if constant[k] {
                    continue;
                }
                gram[j * p + k] =
                    (self.xx[j * p + k] / n - mean[j] * mean[k]) / (scale[j] * scale[k]);
            }
        }
        StdDesign {
            n: self.n,
            p,
            gram,
            mean,
            scale,
            constant,
        }
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Raw response sums over a set of rows, on globally centered data.
struct ResponseSums {
    xy: Vec<f64>,
    y: f64,
    yy: f64,
}

impl ResponseSums {
    fn from_rows(xc: ArrayView2<f64>, yc: &[f64]) -> Self {
        let mut xy = vec![0.0; xc.ncols()];
        for (row, &yv) in xc.outer_iter().zip(yc) {
            for (acc, &v) in xy.iter_mut().zip(row.iter()) {
                *acc += v * yv;
            }
        }
        Self {
            xy,
            y: yc.iter().sum(),
            yy: yc.iter().map(|v| v * v).sum(),
        }
    }

    fn minus(&self, other: &ResponseSums) -> ResponseSums {
        ResponseSums {
            xy: sub(&self.xy, &other.xy),
            y: self.y - other.y,
            yy: self.yy - other.yy,
        }
    }
}

/// Standardized design: Gram matrix plus the moments used to build it.
struct StdDesign {
    n: usize,
    p: usize,
    gram: Vec<f64>,
    /// Means in globally-centered coordinates.
    mean: Vec<f64>,
    scale: Vec<f64>,
    constant: Vec<bool>,
}

impl StdDesign {
    fn problem(&self, r: &ResponseSums) -> GramProblem<'_> {
        let n = self.n as f64;
        let y_mean = r.y / n;
        let xty = (0..self.p)
            .map(|j| {
                if self.constant[j] {
                    0.0
                } else {
                    (r.xy[j] / n - self.mean[j] * y_mean) / self.scale[j]
                }
            })
            .collect();
        GramProblem {
            d: self,
            xty,
            yvar: (r.yy / n - y_mean * y_mean).max(0.0),
            y_mean,
        }
    }
}

/// Standardized least-squares problem in sufficient-statistic form.
struct GramProblem<'a> {
    d: &'a StdDesign,
    xty: Vec<f64>,
    yvar: f64,
    y_mean: f64,
}

type Solved = Vec<(f64, Vec<f64>, usize, bool)>;

impl GramProblem<'_> {
    fn lambda_max(&self, alpha: f64) -> f64 {
        self.xty.iter().fold(0.0f64, |m, c| m.max(c.abs())) / alpha_for_lambda_max(alpha)
    }

    fn usable(&self) -> Vec<usize> {
        (0..self.d.p).filter(|&j| !self.d.constant[j]).collect()
    }

    /// Fraction of variance explained; `grad` must match `beta`.
    fn dev_ratio(&self, beta: &[f64], grad: &[f64]) -> f64 {
        if self.yvar <= 0.0 {
            return 0.0;
        }
        let cb: f64 = self.xty.iter().zip(beta).map(|(c, b)| c * b).sum();
        let gb: f64 = grad.iter().zip(beta).map(|(g, b)| g * b).sum();
        1.0 - (self.yvar - cb - gb) / self.yvar
    }

    /// One coordinate update; returns |change|.
    #[inline]
    fn update(&self, j: usize, l1: f64, l2: f64, beta: &mut [f64], grad: &mut [f64]) -> f64 {
        let p = self.d.p;
        let gjj = self.d.gram[j * p + j];
        let z = grad[j] + gjj * beta[j];
        let new = soft_threshold(z, l1) / (gjj + l2);
        let delta = new - beta[j];
        if delta != 0.0 {
            beta[j] = new;
            let row = &self.d.gram[j * p..(j + 1) * p];
            for (g, &gjk) in grad.iter_mut().zip(row) {
                *g -= gjk * delta;
            }
        }
        delta.abs()
    }

    /// Coordinate descent at one lambda, warm-started from `beta`.
    fn solve(
        &self,
        usable: &[usize],
        alpha: f64,
        lambda: f64,
        beta: &mut [f64],
        grad: &mut [f64],
        tol: f64,
        max_sweeps: usize,
    ) -> (usize, bool) {
        let l1 = lambda * alpha;
        let l2 = lambda * (1.0 - alpha);
        let tol = (tol * self.yvar).max(f64::MIN_POSITIVE);
        let mut sweeps = 0;
        let mut active = Vec::with_capacity(usable.len());
        loop {
            let mut dmax = 0.0f64;
            for &j in usable {
                dmax = dmax.max(self.update(j, l1, l2, beta, grad));
            }
            sweeps += 1;
            if dmax * dmax < tol {
                return (sweeps, true);
            }
            if sweeps >= max_sweeps {
                return (sweeps, false);
            }
            active.clear();
            active.extend(usable.iter().copied().filter(|&j| beta[j] != 0.0));
            loop {
                let mut dmax = 0.0f64;
                for &j in &active {
                    dmax = dmax.max(self.update(j, l1, l2, beta, grad));
                }
                sweeps += 1;
                if dmax * dmax < tol {
                    break;
                }
                if sweeps >= max_sweeps {
                    return (sweeps, false);
                }
            }
        }
    }

    /// Solves along `lambdas`; with `stop_early` the path may end early by
    /// the deviance rules in `control`.
    fn solve_path(
        &self,
        alpha: f64,
        lambdas: &[f64],
        control: &FitControl,
        stop_early: bool,
    ) -> Solved {
        let usable = self.usable();
        let mut beta = vec![0.0; self.d.p];
        let mut grad = self.xty.clone();
        let mut out = Vec::with_capacity(lambdas.len());
        let mut prev_dev = 0.0;
        for (i, &lambda) in lambdas.iter().enumerate() {
            let (sweeps, converged) = self.solve(
                &usable,
                alpha,
                lambda,
                &mut beta,
                &mut grad,
                control.tol,
                control.max_sweeps,
            );
            out.push((lambda, beta.clone(), sweeps, converged));
            if stop_early && i + 1 >= 5 {
                let dev = self.dev_ratio(&beta, &grad);
                if dev > control.path_max_dev_ratio
                    || dev - prev_dev < control.path_min_dev_change * dev
                {
                    break;
                }
                prev_dev = dev;
            } else if stop_early {
                prev_dev = self.dev_ratio(&beta, &grad);
            }
        }
        out
    }
}


/// One point on a fitted path.
#[derive(Clone, Debug)]
pub struct PathPoint {
    pub lambda: f64,
    pub intercept: f64,
    /// Original-scale coefficients, dense.
    pub coefficients: Vec<f64>,
    /// Coefficients on standardized features.
    pub beta_std: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct PathFit {
    pub standardization: Standardization,
    pub y_mean: f64,
    pub points: Vec<PathPoint>,
}


/// Design centered at its column means.
struct Prepared {
    xc: Array2<f64>,
    centers: Vec<f64>,
    max_abs: Vec<f64>,
}

/// Response centered at its mean.
struct Response {
    yc: Vec<f64>,
    center: f64,
}

impl Response {
    fn new(y: &[f64]) -> Self {
        let center = y.iter().sum::<f64>() / y.len() as f64;
        Self {
            yc: y.iter().map(|v| v - center).collect(),
            center,
        }
    }
}

fn prepare(x: ArrayView2<f64>, ys: &[&[f64]]) -> Result<Prepared> {
    let (n, p) = x.dim();
    if let Some(y) = ys.iter().find(|y| y.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "X has {n} rows but y has {} values",
            y.len()
        )));
    }
    if n == 0 || p == 0 {
        return Err(Error::Degenerate(format!("need n >= 1 and p >= 1, got {n}x{p}")));
    }
    if x.iter().chain(ys.iter().flat_map(|y| y.iter())).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("design matrix or response".into()));
    }
    let centers = x.mean_axis(Axis(0)).expect("n >= 1").to_vec();
    let max_abs = (0..p)
        .map(|j| x.column(j).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let mut xc = x.to_owned();
    for mut row in xc.outer_iter_mut() {
        for (v, c) in row.iter_mut().zip(&centers) {
            *v -= c;
        }
    }
    Ok(Prepared {
        xc,
        centers,
        max_abs,
    })
}

fn to_path_fit(prep: &Prepared, resp: &Response, prob: &GramProblem, solved: Solved) -> PathFit {
    let d = prob.d;
    let p = d.p;
    let means: Vec<f64> = (0..p).map(|j| prep.centers[j] + d.mean[j]).collect();
    let y_mean = resp.center + prob.y_mean;
    let points = solved
        .into_iter()
        .map(|(lambda, beta_std, sweeps, converged)| {
            let coefficients: Vec<f64> = (0..p).map(|j| beta_std[j] / d.scale[j]).collect();
            let intercept = y_mean
                - coefficients
                    .iter()
                    .zip(&means)
                    .map(|(b, m)| b * m)
                    .sum::<f64>();
            PathPoint {
                lambda,
                intercept,
                coefficients,
                beta_std,
                sweeps,
                converged,
            }
        })
        .collect();
    PathFit {
        standardization: Standardization {
            means,
            scales: d.scale.clone(),
            constant: d.constant.clone(),
        },
        y_mean,
        points,
    }
}

/// Fits the elastic net at each of `lambdas` (no cross-validation).
pub fn elastic_net_path(
    x: &Array2<f64>,
    y: &[f64],
    alpha: f64,
    lambdas: &[f64],
    control: &FitControl,
) -> Result<PathFit> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
    }
    super::validate_explicit_path(lambdas)?;
    let prep = prepare(x.view(), &[y])?;
    let resp = Response::new(y);
    let design = DesignSums::from_rows(prep.xc.view()).standardize(&prep.max_abs);
    let prob = design.problem(&ResponseSums::from_rows(prep.xc.view(), &resp.yc));
    let solved = prob.solve_path(alpha, lambdas, control, false);
    Ok(to_path_fit(&prep, &resp, &prob, solved))
}

/// Fitted elastic-net regression on the original feature scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RegressionRepr", into = "RegressionRepr")]
pub struct RegressionModel {
    pub features: Vec<String>,
    pub intercept: f64,
    /// Nonzero coefficients only, in feature order.
    pub coefficients: IndexMap<String, f64>,
    pub standardization: Standardization,
    pub alpha: f64,
    pub lambda_selected: f64,
    pub cv_error: f64,
    pub diagnostics: FitDiagnostics,
    /// In-sample residuals `y - prediction` in training row order.
    pub training_residuals: Vec<f64>,
    dense: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RegressionRepr {
    features: Vec<String>,
    alpha: f64,
    lambda: f64,
    intercept: f64,
    coefficients: IndexMap<String, f64>,
    standardization: Standardization,
    cv_error: f64,
    diagnostics: FitDiagnostics,
    #[serde(default)]
    training_residuals: Vec<f64>,
}

impl From<RegressionRepr> for RegressionModel {
    fn from(r: RegressionRepr) -> Self {
        Self::assemble(
            r.features,
            r.intercept,
            r.coefficients,
            r.standardization,
            r.alpha,
            r.lambda,
            r.cv_error,
            r.diagnostics,
            r.training_residuals,
        )
    }
}

impl From<RegressionModel> for RegressionRepr {
    fn from(m: RegressionModel) -> Self {
        Self {
            features: m.features,
            alpha: m.alpha,
            lambda: m.lambda_selected,
            intercept: m.intercept,
            coefficients: m.coefficients,
            standardization: m.standardization,
            cv_error: m.cv_error,
            diagnostics: m.diagnostics,
            training_residuals: m.training_residuals,
        }
    }
}

impl RegressionModel {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        features: Vec<String>,
        intercept: f64,
        coefficients: IndexMap<String, f64>,
        standardization: Standardization,
        alpha: f64,
        lambda_selected: f64,
        cv_error: f64,
        diagnostics: FitDiagnostics,
        training_residuals: Vec<f64>,
    ) -> Self {
        let dense = features
            .iter()
            .map(|f| coefficients.get(f).copied().unwrap_or(0.0))
            .collect();
        Self {
            features,
            intercept,
            coefficients,
            standardization,
            alpha,
            lambda_selected,
            cv_error,
            diagnostics,
            training_residuals,
            dense,
        }
    }

    /// A model with the given intercept and nonzero coefficients; features
    /// not listed get zero.
    pub fn from_coefficients(
        features: Vec<String>,
        intercept: f64,
        coefficients: IndexMap<String, f64>,
    ) -> Result<Self> {
        if let Some(name) = coefficients.keys().find(|k| !features.contains(k)) {
            return Err(Error::MissingFeature(name.clone()));
        }
        let p = features.len();
        let coefficients = features
            .iter()
            .filter_map(|f| coefficients.get(f).filter(|v| **v != 0.0).map(|v| (f.clone(), *v)))
            .collect();
        Ok(Self::assemble(
            features,
            intercept,
            coefficients,
            Standardization {
                means: vec![0.0; p],
                scales: vec![1.0; p],
                constant: vec![false; p],
            },
            1.0,
            0.0,
            0.0,
            FitDiagnostics {
                converged: true,
                ..FitDiagnostics::default()
            },
            Vec::new(),
        ))
    }

    pub fn coefficient(&self, feature: &str) -> f64 {
        self.coefficients.get(feature).copied().unwrap_or(0.0)
    }

    pub fn dense_coefficients(&self) -> &[f64] {
        &self.dense
    }

    /// Prediction for values already in model feature order.
    pub fn predict_row(&self, values: &[f64]) -> f64 {
        self.intercept
            + self
                .dense
                .iter()
                .zip(values)
                .filter(|(b, _)| **b != 0.0)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    pub fn predict(&self, s: &SummaryVector) -> Result<f64> {
        if s.names() == self.features.as_slice() {
            return Ok(self.predict_row(s.values()));
        }
        // only referenced features need to be present
        let mut acc = self.intercept;
        for (name, coef) in &self.coefficients {
            let v = s.get(name).ok_or_else(|| Error::MissingFeature(name.clone()))?;
            acc += coef * v;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelArtifact::Regression(self.clone()))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text)? {
            ModelArtifact::Regression(m) => Ok(m),
            ModelArtifact::Classifier(_) => Err(Error::InvalidArgument(
                "artifact holds a classifier, expected a regression".into(),
            )),
        }
    }
}

/// Cross-validated elastic-net regression of `y` on the columns of `x`.
pub fn fit_elastic_net(
    x: &Array2<f64>,
    y: &[f64],
    features: &[String],
    spec: &PenaltySpec,
    seed: u64,
) -> Result<RegressionModel> {
    let mut models = fit_elastic_net_many(x, &[y], features, spec, seed)?;
    Ok(models.pop().expect("one response"))
}

/// Separate cross-validated fits of each response on the same design.
///
/// Equivalent to calling [`fit_elastic_net`] once per response (with
/// [`FoldScheme::ContentHash`] the canonical row order then depends on all
/// responses), but the design's cross products are formed only once.
pub fn fit_elastic_net_many(
    x: &Array2<f64>,
    ys: &[&[f64]],
    features: &[String],
    spec: &PenaltySpec,
    seed: u64,
) -> Result<Vec<RegressionModel>> {
    spec.validate()?;
    let (n, p) = x.dim();
    if features.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} feature names for {p} columns",
            features.len()
        )));
    }
    if n < spec.cv_folds {
        return Err(Error::Degenerate(format!(
            "{n} rows cannot fill {} cv folds",
            spec.cv_folds
        )));
    }
    if ys.is_empty() {
        return Ok(Vec::new());
    }
    prepare(x.view(), ys)?;

    let order: Option<Vec<usize>> = match spec.fold_scheme {
        FoldScheme::Seeded => None,
        FoldScheme::ContentHash => {
            let digests: Vec<u64> = (0..n)
                .map(|i| {
                    let targets: Vec<f64> = ys.iter().map(|y| y[i]).collect();
                    crate::experiment::row_digest(None, &targets, &x.row(i).to_vec())
                })
                .collect();
            Some(canonical_order(&digests))
        }
    };
    let (xs, yss): (Array2<f64>, Vec<Vec<f64>>) = match &order {
        Some(o) => (
            x.select(Axis(0), o),
            ys.iter().map(|y| o.iter().map(|&i| y[i]).collect()).collect(),
        ),
        None => (x.clone(), ys.iter().map(|y| y.to_vec()).collect()),
    };

    let prep = prepare(xs.view(), &[])?;
    let full_x = DesignSums::from_rows(prep.xc.view());
    let design = full_x.standardize(&prep.max_abs);
    let responses: Vec<Response> = yss.iter().map(|y| Response::new(y)).collect();
    let full_y: Vec<ResponseSums> = responses
        .iter()
        .map(|r| ResponseSums::from_rows(prep.xc.view(), &r.yc))
        .collect();
    let paths: Vec<PathFit> = responses
        .par_iter()
        .zip(&full_y)
        .map(|(resp, sums)| {
            let prob = design.problem(sums);
            let lambdas = match &spec.lambda_path {
                LambdaPath::Auto { count, ratio } => {
                    auto_path(prob.lambda_max(spec.alpha), *count, *ratio)
                }
                LambdaPath::Explicit(v) => v.clone(),
            };
            let solved = prob.solve_path(spec.alpha, &lambdas, &spec.control, true);
            to_path_fit(&prep, resp, &prob, solved)
        })
        .collect();
    drop(design);

    let folds = assign_folds(n, spec.cv_folds, seed);
    let fold_sizes: Vec<usize> = (0..spec.cv_folds).map(|f| folds.iter().filter(|&&g| g == f).count()).collect();
    // per fold, per response: (sse along the path, all fits converged)
    let fold_sse: Vec<Vec<(Vec<f64>, bool)>> = (0..spec.cv_folds)
        .into_par_iter()
        .map(|f| {
            let held: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
            let xh = prep.xc.select(Axis(0), &held);
            let fold_design = full_x
                .minus(&DesignSums::from_rows(xh.view()))
                .standardize(&prep.max_abs);
            responses
                .iter()
                .zip(&full_y)
                .zip(&paths)
                .map(|((resp, sums), path)| {
                    let yh: Vec<f64> = held.iter().map(|&i| resp.yc[i]).collect();
                    let prob =
                        fold_design.problem(&sums.minus(&ResponseSums::from_rows(xh.view(), &yh)));
                    let lambdas: Vec<f64> = path.points.iter().map(|pt| pt.lambda).collect();
                    let solved = prob.solve_path(spec.alpha, &lambdas, &spec.control, false);
                    let all_converged = solved.iter().all(|s| s.3);
                    let sse = solved
                        .iter()
                        .map(|(_, beta, _, _)| held_out_sse(&prob, beta, &xh, &yh))
                        .collect();
                    (sse, all_converged)
                })
                .collect()
        })
        .collect();

    let models = paths
        .into_iter()
        .enumerate()
        .map(|(r, path)| {
            let runs: Vec<&(Vec<f64>, bool)> = fold_sse.iter().map(|f| &f[r]).collect();
            select_model(x, ys[r], features, spec, path, &runs, &fold_sizes)
        })
        .collect();
    Ok(models)
}

fn held_out_sse(prob: &GramProblem, beta: &[f64], xh: &Array2<f64>, yh: &[f64]) -> f64 {
    let d = prob.d;
    let nz: Vec<usize> = (0..d.p).filter(|&j| beta[j] != 0.0).collect();
    xh.outer_iter()
        .zip(yh)
        .map(|(row, &yv)| {
            let pred = prob.y_mean
                + nz.iter()
                    .map(|&j| (row[j] - d.mean[j]) / d.scale[j] * beta[j])
                    .sum::<f64>();
            (yv - pred).powi(2)
        })
        .sum()
}

/// Picks lambda by the configured rule and builds the model there.
fn select_model(
    x: &Array2<f64>,
    y: &[f64],
    features: &[String],
    spec: &PenaltySpec,
    path: PathFit,
    folds: &[&(Vec<f64>, bool)],
    fold_sizes: &[usize],
) -> RegressionModel {
    let lambdas: Vec<f64> = path.points.iter().map(|pt| pt.lambda).collect();
    let totals: Vec<&[f64]> = folds.iter().map(|(sse, _)| sse.as_slice()).collect();
    let (cv, best) = cv_select(spec.lambda_rule, &totals, fold_sizes);
    let point = &path.points[best];

    let mut warnings = Vec::new();
    if !point.converged {
        warnings.push(format!(
            "coordinate descent hit the sweep cap at lambda {}",
            point.lambda
        ));
    }
    if folds.iter().any(|(_, c)| !c) {
        warnings.push("some cross-validation fits hit the sweep cap".into());
    }

    let coefficients: IndexMap<String, f64> = features
        .iter()
        .zip(&point.coefficients)
        .filter(|(_, b)| **b != 0.0)
        .map(|(f, b)| (f.clone(), *b))
        .collect();
    let diagnostics = FitDiagnostics {
        converged: point.converged,
        sweeps: path.points.iter().map(|pt| pt.sweeps).sum(),
        path_length: path.points.len(),
        warnings,
        cv_curve: lambdas.iter().copied().zip(cv.iter().copied()).collect(),
    };
    let mut model = RegressionModel::assemble(
        features.to_vec(),
        point.intercept,
        coefficients,
        path.standardization.clone(),
        spec.alpha,
        point.lambda,
        cv[best],
        diagnostics,
        Vec::new(),
    );
    model.training_residuals = (0..y.len())
        .map(|i| {
            let row = x.row(i);
            y[i] - model.predict_row(row.as_slice().unwrap_or(&row.to_vec()))
        })
        .collect();
    model
}
