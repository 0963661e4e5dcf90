use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::SummaryVector;

/// Polynomial features built from base statistics.
///
/// Order: base statistics, then `<name>^2`, then `<a>*<b>` for every pair
/// with `a` before `b` in base order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureExpansion {
    pub include_linear: bool,
    pub include_squares: bool,
    pub include_pairwise: bool,
}

impl Default for FeatureExpansion {
    fn default() -> Self {
        Self {
            include_linear: true,
            include_squares: false,
            include_pairwise: false,
        }
    }
}

impl FeatureExpansion {
    pub fn full() -> Self {
        Self {
            include_linear: true,
            include_squares: true,
            include_pairwise: true,
        }
    }

    pub fn expanded_len(&self, m: usize) -> usize {
        m * usize::from(self.include_linear)
            + m * usize::from(self.include_squares)
            + m * m.saturating_sub(1) / 2 * usize::from(self.include_pairwise)
    }

    pub fn expanded_names(&self, base: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(self.expanded_len(base.len()));
        if self.include_linear {
            out.extend(base.iter().cloned());
        }
        if self.include_squares {
            out.extend(base.iter().map(|n| format!("{n}^2")));
        }
        if self.include_pairwise {
            for (i, a) in base.iter().enumerate() {
                for b in &base[i + 1..] {
                    out.push(format!("{a}*{b}"));
                }
            }
        }
        out
    }

    pub fn expand_values(&self, base: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.expanded_len(base.len()));
        self.expand_into(base, &mut out);
        out
    }

    fn expand_into(&self, base: &[f64], out: &mut Vec<f64>) {
        if self.include_linear {
            out.extend_from_slice(base);
        }
        if self.include_squares {
            out.extend(base.iter().map(|v| v * v));
        }
        if self.include_pairwise {
            for (i, a) in base.iter().enumerate() {
                out.extend(base[i + 1..].iter().map(|b| a * b));
            }
        }
    }

    /// Expands every row of an `n x M` matrix.
    pub fn expand_matrix(&self, base: &Array2<f64>) -> Array2<f64> {
        let (n, m) = base.dim();
        let width = self.expanded_len(m);
        let mut data = Vec::with_capacity(n * width);
        for row in base.outer_iter() {
            self.expand_into(&row.to_vec(), &mut data);
        }
        Array2::from_shape_vec((n, width), data).expect("row widths agree")
    }

    pub fn expand_features(&self, s: &SummaryVector) -> Result<SummaryVector> {
        SummaryVector::new(self.expanded_names(s.names()), self.expand_values(s.values()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(FeatureExpansion::full().expanded_len(3), 9);
        assert_eq!(FeatureExpansion::full().expanded_len(59), 1829);
        assert_eq!(FeatureExpansion::full().expanded_len(40), 860);
        assert_eq!(FeatureExpansion::default().expanded_len(10), 10);
        let names: Vec<String> = (0..59).map(|i| format!("s{i}")).collect();
        assert_eq!(FeatureExpansion::full().expanded_names(&names).len(), 1829);
    }

    #[test]
    fn squares_and_products() {
        let s = SummaryVector::from_pairs([("x", 2.0), ("y", 3.0)]).unwrap();
        let e = FeatureExpansion::full().expand_features(&s).unwrap();
        assert_eq!(e.names(), ["x", "y", "x^2", "y^2", "x*y"]);
        assert_eq!(e.values(), [2.0, 3.0, 4.0, 9.0, 6.0]);
    }

    #[test]
    fn matrix_matches_rows() {
        let base = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0]).unwrap();
        let exp = FeatureExpansion::full();
        let m = exp.expand_matrix(&base);
        assert_eq!(m.dim(), (2, 9));
        assert_eq!(m.row(1).to_vec(), exp.expand_values(&[-1.0, 0.5, 4.0]));
    }
}
