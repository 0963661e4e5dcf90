//! Synthetic linear-Gaussian macro panel.
//!
//! This is a stand-in generator for exercising the high-dimensional
//! statistic pipeline; it is not a structural macro model. With
//! `theta = (persistence, volatility, smoothing, accelerator, rate_loading,
//! labor_loading) = (rho, sigma, mu, delta, k_r, k_l)` and independent
//! standard normal shocks `e`:
//!
//! ```text
//! z_t = rho * z_{t-1} + sigma * e_t            latent shock
//! Y_t = z_t + 0.3 e_t
//! r_t = k_r * (z_t - z_{t-1}) + 0.2 e_t
//! I_t = (1 + delta) * z_t - delta * z_{t-1} + 0.3 e_t
//! C_t = mu * Y_t + (1 - mu) * C_{t-1} + 0.2 e_t
//! L_t = k_l * z_t + 0.3 e_t
//! ```
//!
//! Each series has its own shock. The recursion starts at zero and the
//! first [`BURN_IN`] steps are discarded.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::stats::{extract, StatPreset, TimeSeriesPanel, MACRO_SERIES};
use crate::error::{Error, Result};
use crate::experiment::{Parameter, ParameterSpace, Simulator, SummaryVector};

pub const BURN_IN: usize = 100;
pub const DEFAULT_LENGTH: usize = 150;

/// Parameter names in `theta` order.
pub const MACRO_PARAMETERS: [&str; 6] = [
    "persistence",
    "volatility",
    "smoothing",
    "accelerator",
    "rate_loading",
    "labor_loading",
];

const DEFAULTS: [f64; 6] = [0.7, 1.0, 0.5, 0.5, 1.0, 1.0];

/// Each parameter ranges over 20% below to 20% above its default.
pub fn macro_space() -> ParameterSpace {
    ParameterSpace::new(
        MACRO_PARAMETERS
            .iter()
            .zip(DEFAULTS)
            .map(|(name, d)| Parameter::new(*name, 0.8 * d, 1.2 * d))
            .collect(),
    )
    .expect("valid bounds")
}

pub fn simulate_surrogate_macro(theta: &[f64], length: usize, run_seed: u64) -> Result<TimeSeriesPanel> {
    let &[rho, sigma, mu, delta, k_r, k_l] = theta else {
        return Err(Error::DimensionMismatch(format!(
            "surrogate macro model takes 6 parameters, got {}",
            theta.len()
        )));
    };
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "persistence {rho} is not stationary (need |persistence| < 1)"
        )));
    }
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing {mu} is not stationary (need 0 < smoothing < 2)"
        )));
    }
    if theta.iter().any(|v| !v.is_finite()) || sigma < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid parameters {theta:?}")));
    }
    if length < 2 {
        return Err(Error::InvalidArgument("panel needs at least 2 observations".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut e = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut series: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(length)).collect();
    let (mut z_prev, mut c_prev) = (0.0, 0.0);
    for step in 0..BURN_IN + length {
        let z = rho * z_prev + sigma * e();
        let y = z + 0.3 * e();
        let r = k_r * (z - z_prev) + 0.2 * e();
        let i = (1.0 + delta) * z - delta * z_prev + 0.3 * e();
        let c = mu * y + (1.0 - mu) * c_prev + 0.2 * e();
        let l = k_l * z + 0.3 * e();
        if step >= BURN_IN {
            for (s, v) in series.iter_mut().zip([y, r, i, c, l]) {
                s.push(v);
            }
        }
        z_prev = z;
        c_prev = c;
    }
    TimeSeriesPanel::new(MACRO_SERIES.iter().map(|s| s.to_string()).collect(), series)
}

/// Simulates a panel and reduces it to the chosen statistic presets.
#[derive(Clone, Debug)]
pub struct SurrogateMacroSimulator {
    pub length: usize,
    pub presets: Vec<StatPreset>,
}

impl SurrogateMacroSimulator {
    pub fn new(presets: Vec<StatPreset>) -> Self {
        Self {
            length: DEFAULT_LENGTH,
            presets,
        }
    }
}

impl Simulator for SurrogateMacroSimulator {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector> {
        let panel = simulate_surrogate_macro(theta, self.length, run_seed)?;
        extract(&panel, &self.presets)?.into_summary()
    }
}
