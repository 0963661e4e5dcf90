//! Time-series panels and the summary statistics computed from them.
//!
//! Every extractor is a pure function of the panel. Statistic names:
//!
//! * `xcorr.<target>.<other>.lag<k>`: correlation of `target_t` with
//!   `other_{t+k}`, `k = -max_lag..=max_lag`, each lag normalized by the
//!   moments of its own overlapping window.
//! * `cov.<a>.<b>`: sample covariance (denominator `T - 1`), lower triangle
//!   including the diagonal, `b` at or before `a` in panel order.
//! * `aux.<spec>.<term>`: OLS coefficients; `const` is the intercept and
//!   `<series>.lag<k>` the coefficient on `series_{t-k}`.

use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::SummaryVector;

/// Named, equal-length series.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesPanel {
    names: Vec<String>,
    series: Vec<Vec<f64>>,
}

impl TimeSeriesPanel {
    pub fn new(names: Vec<String>, series: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != series.len() || names.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} series",
                names.len(),
                series.len()
            )));
        }
        let t = series[0].len();
        if t < 2 {
            return Err(Error::InvalidArgument("panel needs at least 2 observations".into()));
        }
        if let Some(i) = series.iter().position(|s| s.len() != t) {
            return Err(Error::DimensionMismatch(format!(
                "series `{}` has {} observations, expected {t}",
                names[i],
                series[i].len()
            )));
        }
        for (name, s) in names.iter().zip(&series) {
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("series `{name}`")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidArgument(format!("duplicate series `{dup}`")));
        }
        Ok(Self { names, series })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn series(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.series[i].as_slice())
            .ok_or_else(|| Error::MissingFeature(name.to_string()))
    }

    /// Writes a `t` column followed by one column per series.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(std::iter::once("t").chain(self.names.iter().map(String::as_str)))?;
        for t in 0..self.len() {
            w.write_record(
                std::iter::once(t.to_string()).chain(self.series.iter().map(|s| s[t].to_string())),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(Error::SchemaMismatch {
                column: header.first().cloned().unwrap_or_default(),
                detail: "first column must be `t`".into(),
            });
        }
        let mut series = vec![Vec::new(); header.len() - 1];
        for (line, record) in r.records().enumerate() {
            let record = record?;
            for (j, field) in record.iter().enumerate().skip(1) {
                let v = field.trim().parse::<f64>().map_err(|_| Error::SchemaMismatch {
                    column: header[j].clone(),
                    detail: format!("row {line}: `{field}` is not a number"),
                })?;
                series[j - 1].push(v);
            }
        }
        Self::new(header[1..].to_vec(), series)
    }
}

/// Named statistics plus any non-fatal issues met while computing them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Extraction {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Extraction {
    fn push(&mut self, name: String, value: f64) {
        self.names.push(name);
        self.values.push(value);
    }

    pub fn extend(&mut self, other: Extraction) {
        self.names.extend(other.names);
        self.values.extend(other.values);
        self.warnings.extend(other.warnings);
    }

    pub fn into_summary(self) -> Result<SummaryVector> {
        SummaryVector::new(self.names, self.values)
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Pearson correlation, or `None` when either side is constant.
fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa > 0.0 && sbb > 0.0 {
        Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
    } else {
        None
    }
}

fn sample_cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
}

pub fn cross_correlations(
    panel: &TimeSeriesPanel,
    target: &str,
    others: &[&str],
    max_lag: usize,
) -> Result<Extraction> {
    let t = panel.len();
    if t <= 2 * max_lag + 2 {
        return Err(Error::InvalidArgument(format!(
            "{t} observations are too few for cross-correlations up to lag {max_lag}"
        )));
    }
    let x = panel.series(target)?;
    let mut out = Extraction::default();
    for other in others {
        let y = panel.series(other)?;
        for k in -(max_lag as isize)..=max_lag as isize {
            let shift = k.unsigned_abs();
            let (a, b) = if k >= 0 {
                (&x[..t - shift], &y[shift..])
            } else {
                (&x[shift..], &y[..t - shift])
            };
            let name = format!("xcorr.{target}.{other}.lag{k}");
            let value = pearson(a, b).unwrap_or_else(|| {
                out.warnings.push(format!("{name}: zero variance in window, set to 0"));
                0.0
            });
            out.push(name, value);
        }
    }
    Ok(out)
}

pub fn covariance_lower_triangle(panel: &TimeSeriesPanel) -> Extraction {
    let mut out = Extraction::default();
    for (i, a) in panel.names.iter().enumerate() {
        for (j, b) in panel.names.iter().enumerate().take(i + 1) {
            out.push(format!("cov.{a}.{b}"), sample_cov(&panel.series[i], &panel.series[j]));
        }
    }
    out
}

/// Regressor `series_{t - lag}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagTerm {
    pub series: String,
    pub lag: usize,
}

impl LagTerm {
    pub fn new(series: &str, lag: usize) -> Self {
        Self {
            series: series.to_string(),
            lag,
        }
    }
}

/// OLS of `target_t` on an intercept and the listed terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxRegression {
    pub name: String,
    pub target: String,
    pub terms: Vec<LagTerm>,
}

impl AuxRegression {
    /// `target` on its own lags `1..=order`.
    pub fn autoregression(name: &str, target: &str, order: usize) -> Self {
        Self {
            name: name.to_string(),
            target: target.to_string(),
            terms: (1..=order).map(|k| LagTerm::new(target, k)).collect(),
        }
    }

    pub fn max_lag(&self) -> usize {
        self.terms.iter().map(|t| t.lag).max().unwrap_or(0)
    }

    pub fn statistic_names(&self) -> Vec<String> {
        std::iter::once(format!("aux.{}.const", self.name))
            .chain(
                self.terms
                    .iter()
                    .map(|t| format!("aux.{}.{}.lag{}", self.name, t.series, t.lag)),
            )
            .collect()
    }
}

pub fn auxiliary_ols(panel: &TimeSeriesPanel, spec: &AuxRegression) -> Result<Extraction> {
    let t = panel.len();
    let start = spec.max_lag();
    let q = spec.terms.len() + 1;
    if t <= start || t - start <= q {
        return Err(Error::InvalidArgument(format!(
            "regression `{}` needs more than {} usable observations, has {}",
            spec.name,
            q,
            t.saturating_sub(start)
        )));
    }
    let rows = t - start;
    let y = panel.series(&spec.target)?;
    let columns = spec
        .terms
        .iter()
        .map(|term| panel.series(&term.series).map(|s| (s, term.lag)))
        .collect::<Result<Vec<_>>>()?;
    let x = DMatrix::from_fn(rows, q, |i, j| {
        if j == 0 {
            1.0
        } else {
            let (s, lag) = columns[j - 1];
            s[start + i - lag]
        }
    });
    let yv = DVector::from_iterator(rows, y[start..].iter().copied());
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * yv;

    let mut out = Extraction::default();
    let coef = match xtx.clone().cholesky() {
        Some(ch) => ch.solve(&xty),
        None => {
            let jitter = 1e-10 * xtx.trace() / q as f64;
            out.warnings.push(format!(
                "regression `{}`: singular design, ridge jitter {jitter:e} added",
                spec.name
            ));
            let ridged = xtx + DMatrix::identity(q, q) * jitter;
            match ridged.cholesky() {
                Some(ch) => ch.solve(&xty),
                None => {
                    return Err(Error::Degenerate(format!(
                        "regression `{}`: design is singular",
                        spec.name
                    )))
                }
            }
        }
    };
    for (name, value) in spec.statistic_names().into_iter().zip(coef.iter()) {
        out.push(name, *value);
    }
    Ok(out)
}

/// Series of the surrogate macro panel, in panel order.
pub const MACRO_SERIES: [&str; 5] = ["Y", "r", "I", "C", "L"];

/// `Y` on `Y_{t-1}, X_t, X_{t-1}` for `X` in `I, C, r, L`, then `Y` on `C, r`.
pub fn macro_auxiliary_specs() -> Vec<AuxRegression> {
    let mut specs: Vec<AuxRegression> = ["I", "C", "r", "L"]
        .iter()
        .map(|x| AuxRegression {
            name: format!("Y_on_{x}"),
            target: "Y".into(),
            terms: vec![LagTerm::new("Y", 1), LagTerm::new(x, 0), LagTerm::new(x, 1)],
        })
        .collect();
    specs.push(AuxRegression {
        name: "Y_on_Cr".into(),
        target: "Y".into(),
        terms: vec![LagTerm::new("C", 0), LagTerm::new("r", 0)],
    });
    specs
}

/// Named statistic families selectable by `--stats`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatPreset {
    /// Cross-correlations of `Y` with `r, I, C, L` at lags -5..=5 (44).
    Xcorr,
    /// Covariance lower triangle of the five series (15).
    Cov,
    /// The five auxiliary regressions of [`macro_auxiliary_specs`] (19).
    Aux,
    /// AR(5) fit on `Y` (6).
    Ar5,
}

impl StatPreset {
    pub const ALL: [StatPreset; 4] = [StatPreset::Xcorr, StatPreset::Cov, StatPreset::Aux, StatPreset::Ar5];

    pub fn name(self) -> &'static str {
        match self {
            StatPreset::Xcorr => "xcorr",
            StatPreset::Cov => "cov",
            StatPreset::Aux => "aux",
            StatPreset::Ar5 => "ar5",
        }
    }

    pub fn extract(self, panel: &TimeSeriesPanel) -> Result<Extraction> {
        match self {
            StatPreset::Xcorr => cross_correlations(panel, "Y", &["r", "I", "C", "L"], 5),
            StatPreset::Cov => Ok(covariance_lower_triangle(panel)),
            StatPreset::Aux => {
                let mut out = Extraction::default();
                for spec in macro_auxiliary_specs() {
                    out.extend(auxiliary_ols(panel, &spec)?);
                }
                Ok(out)
            }
            StatPreset::Ar5 => auxiliary_ols(panel, &AuxRegression::autoregression("ar5", "Y", 5)),
        }
    }

    /// Parses a comma-separated list such as `xcorr,cov`.
    pub fn parse_list(text: &str) -> Result<Vec<StatPreset>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let preset = item.parse()?;
            if out.contains(&preset) {
                return Err(Error::InvalidArgument(format!("statistic preset `{item}` listed twice")));
            }
            out.push(preset);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no statistic presets given".into()));
        }
        Ok(out)
    }
}

impl FromStr for StatPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown statistic preset `{s}` (valid: xcorr, cov, aux, ar5)"
                ))
            })
    }
}

/// Concatenation of the presets' statistics, in the given order.
pub fn extract(panel: &TimeSeriesPanel, presets: &[StatPreset]) -> Result<Extraction> {
    let mut out = Extraction::default();
    for p in presets {
        out.extend(p.extract(panel)?);
    }
    Ok(out)
}
