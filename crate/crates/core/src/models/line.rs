//! Straight-line and broken-line toy models.
//!
//! Straight: `S_i = beta * i + e_i`. Broken: `S_i = e_i` below the break
//! index and `beta * i + e_i` from it on. Noise is i.i.d. `N(0, noise_sd^2)`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ParameterSpace, Simulator, SummaryVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Straight,
    Broken,
}

impl std::str::FromStr for LineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "straight" => Ok(LineKind::Straight),
            "broken" => Ok(LineKind::Broken),
            other => Err(Error::InvalidArgument(format!(
                "unknown line kind `{other}` (expected straight or broken)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineModelConfig {
    pub kind: LineKind,
    pub break_index: usize,
    pub n_points: usize,
    pub noise_sd: f64,
}

impl LineModelConfig {
    pub fn straight() -> Self {
        Self {
            kind: LineKind::Straight,
            break_index: 5,
            n_points: 10,
            noise_sd: 1.0,
        }
    }

    pub fn broken() -> Self {
        Self {
            kind: LineKind::Broken,
            ..Self::straight()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.break_index >= self.n_points {
            return Err(Error::InvalidArgument(format!(
                "break index {} must be below the number of points {}",
                self.break_index, self.n_points
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sd must be finite and >= 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }

    /// Noise-free value of statistic `i`.
    pub fn mean(&self, beta: f64, i: usize) -> f64 {
        match self.kind {
            LineKind::Broken if i < self.break_index => 0.0,
            _ => beta * i as f64,
        }
    }
}

/// Statistic names `0`, `1`, ... `n_points - 1`.
pub fn line_statistic_names(n_points: usize) -> Vec<String> {
    (0..n_points).map(|i| i.to_string()).collect()
}

pub fn simulate_line(cfg: &LineModelConfig, beta: f64, run_seed: u64) -> Result<SummaryVector> {
    cfg.validate()?;
    SummaryVector::new(line_statistic_names(cfg.n_points), draw(cfg, beta, run_seed))
}

fn draw(cfg: &LineModelConfig, beta: f64, run_seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let noise = Normal::new(0.0, cfg.noise_sd).expect("validated noise sd");
    (0..cfg.n_points)
        .map(|i| cfg.mean(beta, i) + noise.sample(&mut rng))
        .collect()
}

/// [`Simulator`] over the single parameter `beta`.
#[derive(Clone, Debug)]
pub struct LineSimulator {
    cfg: LineModelConfig,
    names: Arc<[String]>,
}

impl LineSimulator {
    pub fn new(cfg: LineModelConfig) -> Result<Self> {
        cfg.validate()?;
        let names = line_statistic_names(cfg.n_points).into();
        Ok(Self { cfg, names })
    }

    pub fn config(&self) -> &LineModelConfig {
        &self.cfg
    }

    /// `beta ~ U[0, 2]`.
    pub fn default_space() -> ParameterSpace {
        ParameterSpace::single("beta", 0.0, 2.0).expect("valid bounds")
    }
}

impl Simulator for LineSimulator {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector> {
        let [beta] = theta else {
            return Err(Error::DimensionMismatch(format!(
                "line model takes 1 parameter, got {}",
                theta.len()
            )));
        };
        SummaryVector::new(Arc::clone(&self.names), draw(&self.cfg, *beta, run_seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_means(cfg: &LineModelConfig, beta: f64, runs: u64) -> Vec<f64> {
        let mut sums = vec![0.0; cfg.n_points];
        for r in 0..runs {
            for (s, v) in sums.iter_mut().zip(simulate_line(cfg, beta, r).unwrap().values()) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / runs as f64).collect()
    }

    #[test]
    fn straight_zero_slope_is_noise() {
        let means = column_means(&LineModelConfig::straight(), 0.0, 4000);
        // 4 standard errors of a mean of 4000 unit normals
        assert!(means.iter().all(|m| m.abs() < 4.0 / 4000f64.sqrt()));
    }

    #[test]
    fn broken_expectations() {
        let means = column_means(&LineModelConfig::broken(), 2.0, 4000);
        let tol = 4.0 / 4000f64.sqrt();
        assert!(means[4].abs() < tol);
        assert!((means[5] - 10.0).abs() < tol);
    }

    #[test]
    fn straight_top_statistic_moments() {
        let cfg = LineModelConfig::straight();
        let draws: Vec<f64> = (0..4000)
            .map(|r| simulate_line(&cfg, 1.0, r).unwrap().values()[9])
            .collect();
        let mean = draws.iter().sum::<f64>() / 4000.0;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3999.0;
        assert!((mean - 9.0).abs() < 4.0 / 4000f64.sqrt());
        assert!((var - 1.0).abs() < 0.1);
    }

    #[test]
    fn simulator_is_reproducible() {
        let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
        assert_eq!(sim.run(&[1.3], 9).unwrap(), sim.run(&[1.3], 9).unwrap());
        assert_ne!(sim.run(&[1.3], 9).unwrap(), sim.run(&[1.3], 10).unwrap());
        assert!(sim.run(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn invalid_break_rejected() {
        let mut cfg = LineModelConfig::broken();
        cfg.break_index = 10;
        assert!(LineSimulator::new(cfg).is_err());
    }
}
