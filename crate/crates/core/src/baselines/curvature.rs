use crate::error::{Error, Result};
use crate::estimator::FittedEstimator;
use crate::experiment::{ExperimentTable, SummaryVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvaturePoint {
    /// The reference row's true parameter.
    pub theta: f64,
    /// `|r(S*) - r(S)|` for the row's statistics `S`.
    pub value: f64,
}

/// How far the regression estimate moves between `s_star` and each
/// reference row's statistics.
pub fn curvature_profile(
    est: &FittedEstimator,
    reference: &ExperimentTable,
    s_star: &SummaryVector,
) -> Result<Vec<CurvaturePoint>> {
    if est.space.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "curvature profile needs a single-parameter estimator, got {} parameters",
            est.space.len()
        )));
    }
    let at_star = est.estimate(s_star)?.values[0];
    let predicted = est.predict_table(reference)?;
    Ok(reference
        .rows()
        .iter()
        .zip(predicted)
        .map(|(row, p)| CurvaturePoint {
            theta: row.theta[0],
            value: (at_star - p[0]).abs(),
        })
        .collect())
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| x[*a].total_cmp(&x[*b]));
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            out[o] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with ties given their average rank.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    cov / (va * vb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::FeatureExpansion;
    use crate::experiment::{ParameterSpace, Row};
    use crate::glmnet::RegressionModel;
    use indexmap::IndexMap;

    #[test]
    fn spearman_values() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 35.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        // ranks (1, 2.5, 2.5, 4) vs (1, 2, 3, 4)
        let r = spearman(&[1.0, 2.0, 2.0, 5.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!((r - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
    }

    fn estimator(coef: f64) -> FittedEstimator {
        let mut c = IndexMap::new();
        if coef != 0.0 {
            c.insert("s".to_string(), coef);
        }
        let model = RegressionModel::from_coefficients(vec!["s".into()], 0.5, c).unwrap();
        FittedEstimator {
            space: ParameterSpace::single("b", 0.0, 1.0).unwrap(),
            statistics: vec!["s".into()],
            expansion: FeatureExpansion::default(),
            models: vec![model],
            training_digests: vec![],
        }
    }

    fn reference() -> ExperimentTable {
        let rows = (0..5)
            .map(|i| Row {
                theta: vec![i as f64 / 4.0],
                stats: vec![i as f64],
            })
            .collect();
        ExperimentTable::from_rows(ParameterSpace::single("b", 0.0, 1.0).unwrap(), vec!["s".into()], rows, 0)
            .unwrap()
    }

    #[test]
    fn profile_zero_at_s_star_and_for_constant() {
        let table = reference();
        let prof = curvature_profile(&estimator(0.25), &table, &table.summary(2)).unwrap();
        assert_eq!(prof[2].value, 0.0);
        assert_eq!(prof[0].value, 0.5);
        let flat = curvature_profile(&estimator(0.0), &table, &table.summary(2)).unwrap();
        assert!(flat.iter().all(|p| p.value == 0.0));
    }
}
