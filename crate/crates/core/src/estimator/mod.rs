//! Parameter estimation by regression.
//!
//! One elastic net per parameter maps (optionally expanded) summary
//! statistics to that parameter. The estimate at observed statistics is
//! the vector of the regressions' predictions.

mod expansion;
mod metrics;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentTable, Parameter, ParameterSpace, SummaryVector};
use crate::glmnet::{align_features, fit_elastic_net_many, ModelArtifact, PenaltySpec, RegressionModel};
use crate::SCHEMA_VERSION;

pub use expansion::FeatureExpansion;
pub use metrics::{bias, predictivity, rmse};

/// One regression per parameter, in parameter-space order.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedEstimator {
    pub space: ParameterSpace,
    /// Statistics the estimator expects, before expansion.
    pub statistics: Vec<String>,
    pub expansion: FeatureExpansion,
    pub models: Vec<RegressionModel>,
    /// Row digests of the training table.
    pub training_digests: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct EstimatorBundle {
    schema_version: u32,
    kind: String,
    space: Vec<Parameter>,
    statistics: Vec<String>,
    expansion: FeatureExpansion,
    models: Vec<ModelArtifact>,
    #[serde(default)]
    training_digests: Vec<u64>,
}

const BUNDLE_KIND: &str = "estimator";

pub fn train_estimator(
    table: &ExperimentTable,
    expansion: &FeatureExpansion,
    spec: &PenaltySpec,
    seed: u64,
) -> Result<FittedEstimator> {
    if table.is_empty() {
        return Err(Error::Degenerate("empty training table".into()));
    }
    let x = expansion.expand_matrix(&table.stats_matrix());
    let features = expansion.expanded_names(table.statistic_names());
    let thetas: Vec<Vec<f64>> = (0..table.space().len()).map(|k| table.theta_column(k)).collect();
    let ys: Vec<&[f64]> = thetas.iter().map(Vec::as_slice).collect();
    let models = fit_elastic_net_many(&x, &ys, &features, spec, seed)?;
    Ok(FittedEstimator {
        space: table.space().clone(),
        statistics: table.statistic_names().to_vec(),
        expansion: expansion.clone(),
        models,
        training_digests: table.digests(),
    })
}

/// Point estimate plus a flag for each coordinate outside its sampled bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub out_of_bounds: Vec<bool>,
}

impl Estimate {
    pub fn warnings(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(&self.values)
            .zip(&self.out_of_bounds)
            .filter(|(_, out)| **out)
            .map(|((n, v), _)| format!("estimate of `{n}` = {v} lies outside its sampled bounds"))
            .collect()
    }
}

impl FittedEstimator {
    fn predict_values(&self, base: &[f64]) -> Vec<f64> {
        let expanded = self.expansion.expand_values(base);
        self.models.iter().map(|m| m.predict_row(&expanded)).collect()
    }

    pub fn estimate(&self, s_star: &SummaryVector) -> Result<Estimate> {
        let base = align_features(&self.statistics, s_star)?;
        let values = self.predict_values(&base);
        let out_of_bounds = self
            .space
            .params()
            .iter()
            .zip(&values)
            .map(|(p, v)| !p.contains(*v))
            .collect();
        Ok(Estimate {
            names: self.space.names(),
            values,
            out_of_bounds,
        })
    }

    /// Estimates for every row of `table`, in row order.
    pub fn predict_table(&self, table: &ExperimentTable) -> Result<Vec<Vec<f64>>> {
        self.check_statistics(table.statistic_names())?;
        let x = self.expansion.expand_matrix(&table.stats_matrix());
        Ok(x.outer_iter()
            .map(|row| {
                let row = row.to_vec();
                self.models.iter().map(|m| m.predict_row(&row)).collect()
            })
            .collect())
    }

    fn check_statistics(&self, names: &[String]) -> Result<()> {
        for (i, expected) in self.statistics.iter().enumerate() {
            match names.get(i) {
                Some(n) if n == expected => {}
                Some(n) => {
                    return Err(Error::SchemaMismatch {
                        column: format!("S.{n}"),
                        detail: format!("expected `S.{expected}`"),
                    })
                }
                None => {
                    return Err(Error::SchemaMismatch {
                        column: format!("S.{expected}"),
                        detail: "column missing".into(),
                    })
                }
            }
        }
        if let Some(extra) = names.get(self.statistics.len()) {
            return Err(Error::SchemaMismatch {
                column: format!("S.{extra}"),
                detail: "statistic not known to the estimator".into(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let bundle = EstimatorBundle {
            schema_version: SCHEMA_VERSION,
            kind: BUNDLE_KIND.into(),
            space: self.space.params().to_vec(),
            statistics: self.statistics.clone(),
            expansion: self.expansion.clone(),
            models: self.models.iter().cloned().map(ModelArtifact::Regression).collect(),
            training_digests: self.training_digests.clone(),
        };
        Ok(serde_json::to_string_pretty(&bundle)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let bundle: EstimatorBundle = serde_json::from_str(text)?;
        if bundle.kind != BUNDLE_KIND {
            return Err(Error::SchemaMismatch {
                column: "kind".into(),
                detail: format!("expected `{BUNDLE_KIND}`, found `{}`", bundle.kind),
            });
        }
        if bundle.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                column: "schema_version".into(),
                detail: format!("found {}, expected {SCHEMA_VERSION}", bundle.schema_version),
            });
        }
        let space = ParameterSpace::new(bundle.space)?;
        let features = bundle.expansion.expanded_names(&bundle.statistics);
        let models = bundle
            .models
            .into_iter()
            .map(|m| match m {
                ModelArtifact::Regression(r) if r.features == features => Ok(r),
                ModelArtifact::Regression(_) => Err(Error::SchemaMismatch {
                    column: "models".into(),
                    detail: "model features do not match the expanded statistics".into(),
                }),
                ModelArtifact::Classifier(_) => Err(Error::SchemaMismatch {
                    column: "models".into(),
                    detail: "estimator bundle contains a classifier".into(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if models.len() != space.len() {
            return Err(Error::SchemaMismatch {
                column: "models".into(),
                detail: format!("{} models for {} parameters", models.len(), space.len()),
            });
        }
        Ok(Self {
            space,
            statistics: bundle.statistics,
            expansion: bundle.expansion,
            models,
            training_digests: bundle.training_digests,
        })
    }
}

/// Errors with [`Error::SharedRows`] if `test` contains any training row.
pub(crate) fn check_disjoint(training: &[u64], test: &[u64]) -> Result<()> {
    let seen: HashSet<u64> = training.iter().copied().collect();
    let shared = test.iter().filter(|d| seen.contains(d)).count();
    if shared > 0 {
        return Err(Error::SharedRows(shared));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterReport {
    pub name: String,
    pub low: f64,
    pub high: f64,
    /// Mean of `real - estimate`.
    pub bias: f64,
    pub rmse: f64,
    /// `None` when the real parameter does not vary over the test table.
    pub predictivity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub parameters: Vec<ParameterReport>,
    pub n_test: usize,
}

impl EstimationReport {
    pub fn from_predictions(space: &ParameterSpace, real: &[Vec<f64>], estimated: &[Vec<f64>]) -> Result<Self> {
        if real.is_empty() || real.len() != estimated.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} real rows and {} estimated rows",
                real.len(),
                estimated.len()
            )));
        }
        let parameters = space
            .params()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let r: Vec<f64> = real.iter().map(|row| row[k]).collect();
                let e: Vec<f64> = estimated.iter().map(|row| row[k]).collect();
                ParameterReport {
                    name: p.name.clone(),
                    low: p.low,
                    high: p.high,
                    bias: bias(&r, &e),
                    rmse: rmse(&r, &e),
                    predictivity: predictivity(&r, &e),
                }
            })
            .collect();
        Ok(Self {
            parameters,
            n_test: real.len(),
        })
    }

    pub fn get(&self, name: &str) -> Option<&ParameterReport> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// CSV with columns `parameter,low,high,bias,rmse,predictivity`; a
    /// missing predictivity is an empty field.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["parameter", "low", "high", "bias", "rmse", "predictivity"])?;
        for p in &self.parameters {
            w.write_record([
                p.name.clone(),
                p.low.to_string(),
                p.high.to_string(),
                p.bias.to_string(),
                p.rmse.to_string(),
                p.predictivity.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Scores the estimator on a held-out table.
pub fn evaluate(est: &FittedEstimator, test: &ExperimentTable) -> Result<EstimationReport> {
    Ok(evaluate_with_predictions(est, test)?.0)
}

/// Like [`evaluate`], also returning the per-row estimates.
pub fn evaluate_with_predictions(
    est: &FittedEstimator,
    test: &ExperimentTable,
) -> Result<(EstimationReport, Vec<Vec<f64>>)> {
    if test.is_empty() {
        return Err(Error::Degenerate("empty test table".into()));
    }
    if test.space().names() != est.space.names() {
        return Err(Error::SchemaMismatch {
            column: "theta".into(),
            detail: format!(
                "test parameters {:?} differ from estimator parameters {:?}",
                test.space().names(),
                est.space.names()
            ),
        });
    }
    check_disjoint(&est.training_digests, &test.digests())?;
    let predictions = est.predict_table(test)?;
    let real: Vec<Vec<f64>> = test.rows().iter().map(|r| r.theta.clone()).collect();
    let report = EstimationReport::from_predictions(&est.space, &real, &predictions)?;
    Ok((report, predictions))
}
