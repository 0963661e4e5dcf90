//! Model selection by classification.
//!
//! Simulations from every candidate model are pooled into one labeled
//! table; a multinomial elastic net trained on it predicts which candidate
//! produced a given summary vector.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{check_disjoint, FeatureExpansion};
use crate::experiment::io::STAT_PREFIX;
use crate::experiment::{
    derive_seed, row_digest, sample_parameters, split_indices, ParameterSpace, Simulator,
    SummaryVector,
};
use crate::glmnet::{align_features, fit_multinomial, ClassPrediction, ClassifierModel, PenaltySpec};
use crate::SCHEMA_VERSION;

/// Where a candidate's parameters come from.
#[derive(Clone, Debug)]
pub enum CandidateParameters {
    Fixed(Vec<f64>),
    /// Drawn fresh for every row, e.g. nuisance inputs.
    Sampled(ParameterSpace),
}

#[derive(Clone)]
pub struct Candidate {
    pub label: String,
    pub simulator: Arc<dyn Simulator>,
    pub parameters: CandidateParameters,
}

impl Candidate {
    pub fn new(label: impl Into<String>, simulator: Arc<dyn Simulator>, parameters: CandidateParameters) -> Self {
        Self {
            label: label.into(),
            simulator,
            parameters,
        }
    }
}

#[derive(Clone)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn new(candidates: Vec<Candidate>) -> Result<Self> {
        if candidates.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "model selection needs at least 2 candidates, got {}",
                candidates.len()
            )));
        }
        for (i, c) in candidates.iter().enumerate() {
            if c.label.is_empty() {
                return Err(Error::InvalidArgument("empty candidate label".into()));
            }
            if candidates[..i].iter().any(|d| d.label == c.label) {
                return Err(Error::InvalidArgument(format!("duplicate candidate label `{}`", c.label)));
            }
        }
        Ok(Self { candidates })
    }

    pub fn labels(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.label.clone()).collect()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledRow {
    /// Index into the table's classes.
    pub label: usize,
    pub stats: Vec<f64>,
}

/// Summary vectors tagged with the candidate that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTable {
    classes: Vec<String>,
    statistic_names: Arc<[String]>,
    rows: Vec<LabeledRow>,
    lineage: String,
}

impl LabeledTable {
    pub fn from_rows(classes: Vec<String>, statistic_names: Vec<String>, rows: Vec<LabeledRow>) -> Result<Self> {
        let m = statistic_names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.label >= classes.len() {
                return Err(Error::InvalidArgument(format!("row {i}: label index {} out of range", r.label)));
            }
            if r.stats.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} statistics, expected {m}",
                    r.stats.len()
                )));
            }
            if r.stats.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {i}")));
            }
        }
        Ok(Self {
            classes,
            statistic_names: statistic_names.into(),
            rows,
            lineage: String::new(),
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn statistic_names(&self) -> &[String] {
        &self.statistic_names
    }

    pub fn rows(&self) -> &[LabeledRow] {
        &self.rows
    }

    pub fn lineage(&self) -> &str {
        &self.lineage
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn label_of(&self, row: usize) -> &str {
        &self.classes[self.rows[row].label]
    }

    pub fn summary(&self, row: usize) -> SummaryVector {
        SummaryVector::new(Arc::clone(&self.statistic_names), self.rows[row].stats.clone())
            .expect("validated at construction")
    }

    pub fn counts(&self) -> IndexMap<String, usize> {
        let mut counts: IndexMap<String, usize> = self.classes.iter().map(|c| (c.clone(), 0)).collect();
        for r in &self.rows {
            counts[r.label] += 1;
        }
        counts
    }

    pub fn stats_matrix(&self) -> Array2<f64> {
        let m = self.statistic_names.len();
        Array2::from_shape_fn((self.rows.len(), m), |(i, j)| self.rows[i].stats[j])
    }

    /// Row digests over label and statistics.
    pub fn digests(&self) -> Vec<u64> {
        self.rows
            .iter()
            .map(|r| row_digest(Some(&self.classes[r.label]), &[], &r.stats))
            .collect()
    }

    /// Writes `label` followed by `S.<name>` columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(
            std::iter::once("label".to_string())
                .chain(self.statistic_names.iter().map(|s| format!("{STAT_PREFIX}{s}"))),
        )?;
        for r in &self.rows {
            w.write_record(
                std::iter::once(self.classes[r.label].clone()).chain(r.stats.iter().map(|v| v.to_string())),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`LabeledTable::write_csv`]; classes are
    /// listed in order of first appearance.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("label") {
            return Err(Error::SchemaMismatch {
                column: header.first().cloned().unwrap_or_default(),
                detail: "first column must be `label`".into(),
            });
        }
        let mut names = Vec::with_capacity(header.len() - 1);
        for col in &header[1..] {
            match col.strip_prefix(STAT_PREFIX) {
                Some(n) if !n.is_empty() => names.push(n.to_string()),
                _ => {
                    return Err(Error::SchemaMismatch {
                        column: col.clone(),
                        detail: format!("expected a `{STAT_PREFIX}<name>` statistic column"),
                    })
                }
            }
        }
        let mut classes: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let label = record.get(0).unwrap_or_default().to_string();
            let index = match classes.iter().position(|c| *c == label) {
                Some(i) => i,
                None => {
                    classes.push(label);
                    classes.len() - 1
                }
            };
            let stats = record
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, field)| {
                    field.trim().parse::<f64>().map_err(|_| Error::SchemaMismatch {
                        column: header[j].clone(),
                        detail: format!("row {line}: `{field}` is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(LabeledRow { label: index, stats });
        }
        let mut table = Self::from_rows(classes, names, rows)?;
        table.lineage = format!("file({})", path.display());
        Ok(table)
    }
}

/// Runs every candidate `n_per_model` times; rows are grouped by candidate
/// in candidate order.
pub fn build_selection_table(cands: &CandidateSet, n_per_model: usize, seed: u64) -> Result<LabeledTable> {
    if n_per_model == 0 {
        return Err(Error::InvalidArgument("need at least one run per model".into()));
    }
    let mut jobs: Vec<(usize, Vec<f64>, u64)> = Vec::with_capacity(n_per_model * cands.candidates.len());
    for (c, cand) in cands.candidates.iter().enumerate() {
        let cand_seed = derive_seed(seed, c as u64);
        let thetas = match &cand.parameters {
            CandidateParameters::Fixed(theta) => vec![theta.clone(); n_per_model],
            CandidateParameters::Sampled(space) => sample_parameters(space, n_per_model, cand_seed),
        };
        jobs.extend(
            thetas
                .into_iter()
                .enumerate()
                .map(|(i, theta)| (c, theta, derive_seed(cand_seed, i as u64))),
        );
    }
    let outputs: Vec<Result<SummaryVector>> = jobs
        .par_iter()
        .map(|(c, theta, run_seed)| cands.candidates[*c].simulator.run(theta, *run_seed))
        .collect();

    let mut names: Option<Arc<[String]>> = None;
    let mut rows = Vec::with_capacity(jobs.len());
    for (row, ((c, theta, run_seed), out)) in jobs.into_iter().zip(outputs).enumerate() {
        let fail = |reason: String| Error::Simulation {
            row,
            theta: theta.clone(),
            seed: run_seed,
            reason: format!("candidate `{}`: {reason}", cands.candidates[c].label),
        };
        let sv = out.map_err(|e| fail(e.to_string()))?;
        match &names {
            None => names = Some(sv.shared_names()),
            Some(expected) if **expected != *sv.names() => {
                return Err(fail("statistic names differ from other candidates".into()))
            }
            Some(_) => {}
        }
        rows.push(LabeledRow {
            label: c,
            stats: sv.into_values(),
        });
    }
    Ok(LabeledTable {
        classes: cands.labels(),
        statistic_names: names.expect("at least one run"),
        rows,
        lineage: format!("selection(n_per_model={n_per_model},seed={seed})"),
    })
}

/// Disjoint split into `floor(fraction * n)` training rows and the rest,
/// both in original order.
pub fn split_labeled(table: &LabeledTable, fraction: f64, seed: u64) -> Result<(LabeledTable, LabeledTable)> {
    let (train, test) = split_indices(table.len(), fraction, seed)?;
    let pick = |idx: &[usize], side: &str| LabeledTable {
        classes: table.classes.clone(),
        statistic_names: Arc::clone(&table.statistic_names),
        rows: idx.iter().map(|&i| table.rows[i].clone()).collect(),
        lineage: format!("{}/split({fraction},seed={seed})/{side}", table.lineage),
    };
    Ok((pick(&train, "train"), pick(&test, "test")))
}

/// A classifier together with the statistics and expansion it was trained on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSelector {
    pub schema_version: u32,
    pub statistics: Vec<String>,
    pub expansion: FeatureExpansion,
    pub classifier: ClassifierModel,
}

impl ModelSelector {
    pub fn classes(&self) -> &[String] {
        &self.classifier.classes
    }

    fn predict_base(&self, base: &[f64]) -> ClassPrediction {
        self.classifier.predict_row(&self.expansion.expand_values(base))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                column: "schema_version".into(),
                detail: format!("found {}, expected {SCHEMA_VERSION}", s.schema_version),
            });
        }
        Ok(s)
    }
}

/// Multinomial classifier on the raw statistics.
pub fn train_selector(table: &LabeledTable, spec: &PenaltySpec, seed: u64) -> Result<ModelSelector> {
    train_selector_with(table, &FeatureExpansion::default(), spec, seed)
}

pub fn train_selector_with(
    table: &LabeledTable,
    expansion: &FeatureExpansion,
    spec: &PenaltySpec,
    seed: u64,
) -> Result<ModelSelector> {
    let x = expansion.expand_matrix(&table.stats_matrix());
    let features = expansion.expanded_names(table.statistic_names());
    let labels: Vec<usize> = table.rows.iter().map(|r| r.label).collect();
    let mut classifier = fit_multinomial(&x, &labels, &table.classes, &features, spec, seed)?;
    classifier.training_digests = table.digests();
    Ok(ModelSelector {
        schema_version: SCHEMA_VERSION,
        statistics: table.statistic_names().to_vec(),
        expansion: expansion.clone(),
        classifier,
    })
}

pub fn select_model(selector: &ModelSelector, s_star: &SummaryVector) -> Result<ClassPrediction> {
    let base = align_features(&selector.statistics, s_star)?;
    Ok(selector.predict_base(&base))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub labels: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Share of each label's test rows classified correctly; `None` when
    /// the label has no test rows.
    pub per_label: IndexMap<String, Option<f64>>,
    pub accuracy: f64,
}

impl SelectionReport {
    pub fn from_confusion(labels: Vec<String>, confusion: Vec<Vec<usize>>) -> Self {
        let total: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();
        let per_label = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let n: usize = confusion[i].iter().sum();
                (l.clone(), (n > 0).then(|| confusion[i][i] as f64 / n as f64))
            })
            .collect();
        Self {
            labels,
            confusion,
            per_label,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        }
    }

    /// Rows are true labels, columns predicted labels.
    pub fn confusion_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("true\\predicted".to_string()).chain(self.labels.iter().cloned()))?;
        for (l, row) in self.labels.iter().zip(&self.confusion) {
            w.write_record(std::iter::once(l.clone()).chain(row.iter().map(|c| c.to_string())))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// `{"accuracy": .., "per_label": {..}}`
    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            accuracy: f64,
            per_label: &'a IndexMap<String, Option<f64>>,
        }
        Ok(serde_json::to_string_pretty(&Summary {
            accuracy: self.accuracy,
            per_label: &self.per_label,
        })?)
    }
}

/// Confusion matrix of the selector on held-out rows.
pub fn evaluate_selection(selector: &ModelSelector, test: &LabeledTable) -> Result<SelectionReport> {
    if test.is_empty() {
        return Err(Error::Degenerate("empty test table".into()));
    }
    let classes = selector.classes();
    let index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mapping = test
        .classes
        .iter()
        .map(|c| index.get(c.as_str()).copied().ok_or_else(|| Error::UnknownLabel(c.clone())))
        .collect::<Result<Vec<usize>>>()?;
    if test.statistic_names() != selector.statistics.as_slice() {
        let column = test
            .statistic_names()
            .iter()
            .zip(&selector.statistics)
            .find(|(a, b)| a != b)
            .map(|(a, _)| a.clone())
            .unwrap_or_else(|| "statistics".into());
        return Err(Error::SchemaMismatch {
            column: format!("{STAT_PREFIX}{column}"),
            detail: "statistics differ from the selector's training table".into(),
        });
    }
    check_disjoint(&selector.classifier.training_digests, &test.digests())?;

    let k = classes.len();
    let predicted: Vec<usize> = test.rows.par_iter().map(|r| selector.predict_base(&r.stats).index).collect();
    let mut confusion = vec![vec![0usize; k]; k];
    for (r, p) in test.rows.iter().zip(predicted) {
        confusion[mapping[r.label]][p] += 1;
    }
    Ok(SelectionReport::from_confusion(classes.to_vec(), confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LineModelConfig, LineSimulator};

    fn line_candidates(broken: LineModelConfig) -> CandidateSet {
        let straight = Arc::new(LineSimulator::new(LineModelConfig::straight()).unwrap());
        let broken = Arc::new(LineSimulator::new(broken).unwrap());
        CandidateSet::new(vec![
            Candidate::new("straight", straight, CandidateParameters::Fixed(vec![1.0])),
            Candidate::new("broken", broken, CandidateParameters::Fixed(vec![1.0])),
        ])
        .unwrap()
    }

    #[test]
    fn table_has_n_per_label() {
        let table = build_selection_table(&line_candidates(LineModelConfig::broken()), 50, 1).unwrap();
        assert_eq!(table.len(), 100);
        assert_eq!(table.counts().values().copied().collect::<Vec<_>>(), vec![50, 50]);
        assert_eq!(table, build_selection_table(&line_candidates(LineModelConfig::broken()), 50, 1).unwrap());
    }

    #[test]
    fn candidate_set_validation() {
        let sim: Arc<dyn Simulator> = Arc::new(LineSimulator::new(LineModelConfig::straight()).unwrap());
        let one = vec![Candidate::new("a", Arc::clone(&sim), CandidateParameters::Fixed(vec![1.0]))];
        assert!(CandidateSet::new(one.clone()).is_err());
        let dup = vec![one[0].clone(), one[0].clone()];
        assert!(CandidateSet::new(dup).is_err());
    }

    #[test]
    fn selector_separates_line_models() {
        let table = build_selection_table(&line_candidates(LineModelConfig::broken()), 300, 2).unwrap();
        let (train, test) = split_labeled(&table, 0.5, 3).unwrap();
        let selector = train_selector(&train, &PenaltySpec::default(), 4).unwrap();
        let report = evaluate_selection(&selector, &test).unwrap();
        assert!(report.accuracy > 0.9, "{}", report.accuracy);
        for (i, row) in report.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<usize>(), test.counts()[i]);
        }
        assert!(matches!(evaluate_selection(&selector, &train), Err(Error::SharedRows(_))));
    }

    #[test]
    fn unknown_test_label_rejected() {
        let table = build_selection_table(&line_candidates(LineModelConfig::broken()), 40, 2).unwrap();
        let selector = train_selector(&table, &PenaltySpec::default(), 4).unwrap();
        let other = build_selection_table(&line_candidates(LineModelConfig::broken()), 5, 9).unwrap();
        let renamed = LabeledTable::from_rows(
            vec!["straight".into(), "curved".into()],
            other.statistic_names().to_vec(),
            other.rows().to_vec(),
        )
        .unwrap();
        assert!(matches!(evaluate_selection(&selector, &renamed), Err(Error::UnknownLabel(l)) if l == "curved"));
    }

    #[test]
    fn csv_round_trip_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sel.csv");
        let table = build_selection_table(&line_candidates(LineModelConfig::broken()), 10, 5).unwrap();
        table.write_csv(&path).unwrap();
        let back = LabeledTable::read_csv(&path).unwrap();
        assert_eq!(back.rows(), table.rows());
        assert_eq!(back.digests(), table.digests());

        let report = SelectionReport::from_confusion(vec!["a".into(), "b".into()], vec![vec![3, 1], vec![0, 4]]);
        assert_eq!(report.accuracy, 7.0 / 8.0);
        assert_eq!(report.per_label["a"], Some(0.75));
        assert_eq!(report.confusion_csv().unwrap(), "true\\predicted,a,b\na,3,1\nb,0,4\n");
        assert!(report.summary_json().unwrap().contains("\"accuracy\": 0.875"));
    }
}
