//! Accuracy of estimates against the real parameters that produced them.

/// Mean of `real - estimate`.
pub fn bias(real: &[f64], estimate: &[f64]) -> f64 {
    real.iter().zip(estimate).map(|(r, e)| r - e).sum::<f64>() / real.len() as f64
}

pub fn rmse(real: &[f64], estimate: &[f64]) -> f64 {
    (sse(real, estimate) / real.len() as f64).sqrt()
}

fn sse(real: &[f64], estimate: &[f64]) -> f64 {
    real.iter().zip(estimate).map(|(r, e)| (r - e).powi(2)).sum()
}

/// Out-of-sample R-squared: 1 minus the squared error relative to always
/// predicting the mean real value. `None` when the real values are all equal.
pub fn predictivity(real: &[f64], estimate: &[f64]) -> Option<f64> {
    let mean = real.iter().sum::<f64>() / real.len() as f64;
    let total: f64 = real.iter().map(|r| (r - mean).powi(2)).sum();
    if total == 0.0 {
        return None;
    }
    Some((total - sse(real, estimate)) / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_estimate() {
        let real = [0.3, 1.1, 1.9];
        assert_eq!(predictivity(&real, &real), Some(1.0));
        assert_eq!(rmse(&real, &real), 0.0);
        assert_eq!(bias(&real, &real), 0.0);
    }

    #[test]
    fn mean_predictor_scores_zero() {
        let real = [1.0, 2.0, 3.0, 6.0];
        assert_eq!(predictivity(&real, &[3.0; 4]), Some(0.0));
    }

    #[test]
    fn worked_example() {
        let real = [1.0, 2.0, 3.0];
        let est = [1.5, 2.0, 2.5];
        assert_eq!(predictivity(&real, &est), Some(0.75));
        assert!((rmse(&real, &est) - (0.5f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(bias(&real, &est), 0.0);
        assert_eq!(bias(&[2.0], &[1.5]), 0.5);
    }

    #[test]
    fn constant_real_is_undefined() {
        assert_eq!(predictivity(&[2.0, 2.0], &[1.0, 3.0]), None);
    }
}
