use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentTable, SummaryVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    Identity,
    /// `W = diag(var)^-1` with per-statistic sample variances.
    InverseVariance,
    /// Row-major symmetric positive semidefinite matrix over the used
    /// statistics.
    Custom(Vec<Vec<f64>>),
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Weighting::Identity),
            "inverse-variance" => Ok(Weighting::InverseVariance),
            other => Err(Error::InvalidArgument(format!(
                "unknown weighting `{other}` (expected identity or inverse-variance)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub weighting: Weighting,
    /// Statistics to compare; all of them when `None`.
    pub subset: Option<Vec<String>>,
}

impl DistanceSpec {
    pub fn identity() -> Self {
        Self {
            weighting: Weighting::Identity,
            subset: None,
        }
    }

    pub fn inverse_variance() -> Self {
        Self {
            weighting: Weighting::InverseVariance,
            subset: None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.weighting {
            Weighting::Identity => "identity",
            Weighting::InverseVariance => "inverse-variance",
            Weighting::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Form {
    Diagonal(Vec<f64>),
    Full(DMatrix<f64>),
}

/// A quadratic form `d' W d` bound to a statistic schema.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDistance {
    names: Vec<String>,
    used: Vec<usize>,
    form: Form,
    warnings: Vec<String>,
}

impl WeightedDistance {
    /// `sample` holds one row per simulation over `names`; it is only read
    /// for inverse-variance weighting.
    pub fn new(spec: &DistanceSpec, names: &[String], sample: Option<&Array2<f64>>) -> Result<Self> {
        let used = match &spec.subset {
            None => (0..names.len()).collect(),
            Some(subset) => subset
                .iter()
                .map(|s| {
                    names
                        .iter()
                        .position(|n| n == s)
                        .ok_or_else(|| Error::MissingFeature(s.clone()))
                })
                .collect::<Result<Vec<usize>>>()?,
        };
        if used.is_empty() {
            return Err(Error::InvalidArgument("distance over no statistics".into()));
        }
        let mut warnings = Vec::new();
        let form = match &spec.weighting {
            Weighting::Identity => Form::Diagonal(vec![1.0; used.len()]),
            Weighting::InverseVariance => {
                let sample = sample.ok_or_else(|| {
                    Error::InvalidArgument("inverse-variance weighting needs a variance table".into())
                })?;
                if sample.ncols() != names.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "variance table has {} statistics, expected {}",
                        sample.ncols(),
                        names.len()
                    )));
                }
                if sample.nrows() < 2 {
                    return Err(Error::Degenerate("variance table needs at least 2 rows".into()));
                }
                let weights = used
                    .iter()
                    .map(|&j| {
                        let col = sample.column(j);
                        let first = col[0];
                        if col.iter().all(|v| *v == first) {
                            warnings.push(format!(
                                "statistic `{}` has zero variance; its weight is set to 0",
                                names[j]
                            ));
                            return 0.0;
                        }
                        let n = col.len() as f64;
                        let mean = col.sum() / n;
                        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                        1.0 / var
                    })
                    .collect();
                Form::Diagonal(weights)
            }
            Weighting::Custom(rows) => Form::Full(checked_matrix(rows, used.len())?),
        };
        Ok(Self {
            names: names.to_vec(),
            used,
            form,
            warnings,
        })
    }

    pub fn for_table(spec: &DistanceSpec, table: &ExperimentTable) -> Result<Self> {
        Self::new(spec, table.statistic_names(), Some(&table.stats_matrix()))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Diagonal weights, or `None` for a full matrix.
    pub fn diagonal(&self) -> Option<&[f64]> {
        match &self.form {
            Form::Diagonal(w) => Some(w),
            Form::Full(_) => None,
        }
    }

    /// Distance between two raw vectors laid out like [`Self::names`].
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.form {
            Form::Diagonal(w) => self
                .used
                .iter()
                .zip(w)
                .map(|(&j, w)| w * (a[j] - b[j]).powi(2))
                .sum(),
            Form::Full(m) => {
                let d: Vec<f64> = self.used.iter().map(|&j| a[j] - b[j]).collect();
                let mut total = 0.0;
                for (r, dr) in d.iter().enumerate() {
                    for (c, dc) in d.iter().enumerate() {
                        total += dr * m[(r, c)] * dc;
                    }
                }
                total
            }
        }
    }

    pub fn between(&self, s1: &SummaryVector, s2: &SummaryVector) -> Result<f64> {
        self.check(s1)?;
        self.check(s2)?;
        Ok(self.eval(s1.values(), s2.values()))
    }

    pub fn check(&self, s: &SummaryVector) -> Result<()> {
        if s.names() == self.names.as_slice() {
            return Ok(());
        }
        let column = s
            .names()
            .iter()
            .zip(&self.names)
            .find(|(a, b)| a != b)
            .map(|(a, _)| a.clone())
            .unwrap_or_else(|| format!("{} statistics vs {}", s.len(), self.names.len()));
        Err(Error::SchemaMismatch {
            column,
            detail: "statistics differ from the distance's schema".into(),
        })
    }
}

fn checked_matrix(rows: &[Vec<f64>], dim: usize) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "weight matrix must be {dim}x{dim}"
        )));
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| rows[r][c]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weight matrix".into()));
    }
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    for r in 0..dim {
        for c in 0..r {
            if (m[(r, c)] - m[(c, r)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "weight matrix is not symmetric at ({r}, {c})"
                )));
            }
        }
    }
    let min = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if min < -1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "weight matrix is not positive semidefinite (eigenvalue {min})"
        )));
    }
    Ok(m)
}

/// `(s1 - s2)' W (s1 - s2)`, estimating variances from `table` when needed.
pub fn distance(
    s1: &SummaryVector,
    s2: &SummaryVector,
    spec: &DistanceSpec,
    table: Option<&ExperimentTable>,
) -> Result<f64> {
    let d = match table {
        Some(t) => WeightedDistance::for_table(spec, t)?,
        None => WeightedDistance::new(spec, s1.names(), None)?,
    };
    d.between(s1, s2)
}
