use std::collections::HashMap;

use rayon::prelude::*;

use super::distance::{DistanceSpec, WeightedDistance};
use crate::error::{Error, Result};
use crate::experiment::SummaryVector;
use crate::selector::{LabeledTable, SelectionReport};

/// Picks the candidate whose average training statistics are closest to
/// the observed ones. Variances for inverse-variance weighting are pooled
/// over the whole training table.
#[derive(Clone, Debug, PartialEq)]
pub struct MinDistanceSelector {
    pub labels: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    pub distance: WeightedDistance,
}

impl MinDistanceSelector {
    pub fn fit(train: &LabeledTable, spec: &DistanceSpec) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Degenerate("empty training table".into()));
        }
        let distance = WeightedDistance::new(spec, train.statistic_names(), Some(&train.stats_matrix()))?;
        let k = train.classes().len();
        let m = train.statistic_names().len();
        let mut centroids = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for r in train.rows() {
            counts[r.label] += 1;
            for (c, v) in centroids[r.label].iter_mut().zip(&r.stats) {
                *c += v;
            }
        }
        for (c, n) in centroids.iter_mut().zip(&counts) {
            if *n == 0 {
                return Err(Error::Degenerate("a candidate has no training rows".into()));
            }
            c.iter_mut().for_each(|v| *v /= *n as f64);
        }
        Ok(Self {
            labels: train.classes().to_vec(),
            centroids,
            distance,
        })
    }

    fn nearest(&self, stats: &[f64]) -> usize {
        let d: Vec<f64> = self.centroids.iter().map(|c| self.distance.eval(stats, c)).collect();
        (0..d.len()).min_by(|a, b| d[*a].total_cmp(&d[*b])).expect("at least one candidate")
    }

    /// Index into [`Self::labels`].
    pub fn select(&self, s: &SummaryVector) -> Result<usize> {
        self.distance.check(s)?;
        Ok(self.nearest(s.values()))
    }

    pub fn evaluate(&self, test: &LabeledTable) -> Result<SelectionReport> {
        if test.is_empty() {
            return Err(Error::Degenerate("empty test table".into()));
        }
        if test.statistic_names() != self.distance.names() {
            return Err(Error::SchemaMismatch {
                column: test.statistic_names().first().cloned().unwrap_or_default(),
                detail: "statistics differ from the training table".into(),
            });
        }
        let index: HashMap<&str, usize> = self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mapping = test
            .classes()
            .iter()
            .map(|c| index.get(c.as_str()).copied().ok_or_else(|| Error::UnknownLabel(c.clone())))
            .collect::<Result<Vec<usize>>>()?;
        let predicted: Vec<usize> = test.rows().par_iter().map(|r| self.nearest(&r.stats)).collect();
        let k = self.labels.len();
        let mut confusion = vec![vec![0usize; k]; k];
        for (r, p) in test.rows().iter().zip(predicted) {
            confusion[mapping[r.label]][p] += 1;
        }
        Ok(SelectionReport::from_confusion(self.labels.clone(), confusion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::LabeledRow;

    #[test]
    fn nearest_centroid() {
        let rows = vec![
            LabeledRow { label: 0, stats: vec![0.0, 0.0] },
            LabeledRow { label: 0, stats: vec![0.2, 0.0] },
            LabeledRow { label: 1, stats: vec![1.0, 1.0] },
            LabeledRow { label: 1, stats: vec![1.2, 1.0] },
        ];
        let classes = vec!["a".to_string(), "b".to_string()];
        let names = vec!["x".to_string(), "y".to_string()];
        let train = LabeledTable::from_rows(classes.clone(), names.clone(), rows).unwrap();
        let sel = MinDistanceSelector::fit(&train, &DistanceSpec::identity()).unwrap();
        assert_eq!(sel.centroids[1], vec![1.1, 1.0]);
        let s = SummaryVector::new(names.clone(), vec![0.9, 0.8]).unwrap();
        assert_eq!(sel.select(&s).unwrap(), 1);
        let rep = sel.evaluate(&train).unwrap();
        assert_eq!(rep.accuracy, 1.0);

        let unseen = LabeledTable::from_rows(
            vec!["c".into()],
            names,
            vec![LabeledRow { label: 0, stats: vec![0.0, 0.0] }],
        )
        .unwrap();
        assert!(matches!(sel.evaluate(&unseen), Err(Error::UnknownLabel(_))));
    }
}
