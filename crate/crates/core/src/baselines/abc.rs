use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{DistanceSpec, WeightedDistance};
use crate::error::{Error, Result};
use crate::experiment::{derive_seed, sample_parameters, ExperimentTable, ParameterSpace, Simulator, SummaryVector};

#[derive(Clone, Debug, PartialEq)]
pub struct RejectionResult {
    /// Mean parameter vector of the retained rows.
    pub estimate: Vec<f64>,
    /// Retained row indices, closest first (ties by row index).
    pub retained: Vec<usize>,
    /// Distances of the retained rows, same order.
    pub distances: Vec<f64>,
}

impl RejectionResult {
    /// Largest retained distance.
    pub fn threshold(&self) -> f64 {
        *self.distances.last().expect("at least one row retained")
    }
}

/// Rejection ABC with variances for the distance estimated on `table`.
pub fn rejection_abc(
    table: &ExperimentTable,
    s_star: &SummaryVector,
    spec: &DistanceSpec,
    keep_fraction: f64,
) -> Result<RejectionResult> {
    if table.is_empty() {
        return Err(Error::Degenerate("empty reference table".into()));
    }
    let dist = WeightedDistance::for_table(spec, table)?;
    rejection_abc_with(table, s_star, &dist, keep_fraction)
}

/// Keeps the `ceil(keep_fraction * n)` rows closest to `s_star`.
pub fn rejection_abc_with(
    table: &ExperimentTable,
    s_star: &SummaryVector,
    dist: &WeightedDistance,
    keep_fraction: f64,
) -> Result<RejectionResult> {
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "keep fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    if table.is_empty() {
        return Err(Error::Degenerate("empty reference table".into()));
    }
    if dist.names() != table.statistic_names() {
        return Err(Error::SchemaMismatch {
            column: table.statistic_names().first().cloned().unwrap_or_default(),
            detail: "reference table statistics differ from the distance's schema".into(),
        });
    }
    dist.check(s_star)?;
    let target = s_star.values();
    let all: Vec<f64> = table.rows().par_iter().map(|r| dist.eval(&r.stats, target)).collect();
    let keep = ((keep_fraction * table.len() as f64).ceil() as usize).clamp(1, table.len());
    let mut order: Vec<usize> = (0..table.len()).collect();
    let by_distance = |a: &usize, b: &usize| all[*a].total_cmp(&all[*b]).then(a.cmp(b));
    if keep < order.len() {
        order.select_nth_unstable_by(keep - 1, by_distance);
        order.truncate(keep);
    }
    order.sort_unstable_by(by_distance);

    let k = table.space().len();
    let mut estimate = vec![0.0; k];
    for &i in &order {
        for (e, t) in estimate.iter_mut().zip(&table.rows()[i].theta) {
            *e += t;
        }
    }
    estimate.iter_mut().for_each(|e| *e /= keep as f64);
    Ok(RejectionResult {
        estimate,
        distances: order.iter().map(|&i| all[i]).collect(),
        retained: order,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbcMethod {
    Rejection,
    Mcmc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    pub method: AbcMethod,
    /// Reference table size (rejection) or pilot draws used to start the
    /// chain (mcmc).
    pub n_draws: usize,
    pub keep_fraction: f64,
    /// Acceptance threshold; `f64::INFINITY` accepts every move.
    pub epsilon: f64,
    /// Proposal standard deviation as a fraction of each parameter's range.
    pub proposal_scale: f64,
    pub chain_length: usize,
    /// Leading share of the chain dropped before averaging.
    pub burn_in: f64,
    pub seed: u64,
    /// Starting point; when absent the chain starts at the first pilot draw
    /// within epsilon, or the closest one.
    pub initial: Option<Vec<f64>>,
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            method: AbcMethod::Mcmc,
            n_draws: 1000,
            keep_fraction: 0.05,
            epsilon: f64::INFINITY,
            proposal_scale: 0.1,
            chain_length: 10_000,
            burn_in: 0.2,
            seed: 0,
            initial: None,
        }
    }
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.keep_fraction > 0.0 && self.keep_fraction <= 1.0) {
            return bad(format!("keep fraction must lie in (0, 1], got {}", self.keep_fraction));
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return bad(format!("proposal scale must be > 0, got {}", self.proposal_scale));
        }
        if self.chain_length == 0 {
            return bad("chain length must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return bad(format!("burn-in share must lie in [0, 1), got {}", self.burn_in));
        }
        if self.initial.is_none() && self.n_draws == 0 {
            return bad("mcmc needs an initial point or at least one pilot draw".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct McmcResult {
    /// Every state of the chain, starting point included.
    pub chain: Vec<Vec<f64>>,
    pub estimate: Vec<f64>,
    pub accepted: usize,
    pub acceptance_rate: f64,
}

/// Folds `x` back into `[low, high]` by mirroring at the bounds.
pub fn reflect(x: f64, low: f64, high: f64) -> f64 {
    let width = high - low;
    let period = 2.0 * width;
    let mut y = (x - low).rem_euclid(period);
    if y > width {
        y = period - y;
    }
    (low + y).clamp(low, high)
}

/// Likelihood-free Metropolis sampler under a uniform prior on `space`.
///
/// Proposal `t` is simulated with run seed `derive_seed(derive_seed(seed, 1), t)`.
pub fn mcmc_abc(
    sim: &dyn Simulator,
    space: &ParameterSpace,
    s_star: &SummaryVector,
    dist: &WeightedDistance,
    cfg: &AbcConfig,
) -> Result<McmcResult> {
    cfg.validate()?;
    dist.check(s_star)?;
    let target = s_star.values();
    let distance_at = |theta: &[f64], run_seed: u64| -> Result<f64> {
        let s = sim.run(theta, run_seed)?;
        dist.check(&s)?;
        Ok(dist.eval(s.values(), target))
    };

    let mut state = match &cfg.initial {
        Some(theta) => {
            if theta.len() != space.len() || !space.contains(theta) {
                return Err(Error::InvalidArgument(format!(
                    "initial point {theta:?} is outside the parameter space"
                )));
            }
            theta.clone()
        }
        None => {
            let pilot = sample_parameters(space, cfg.n_draws, derive_seed(cfg.seed, 2));
            let pilot_seed = derive_seed(cfg.seed, 3);
            let d = pilot
                .par_iter()
                .enumerate()
                .map(|(i, theta)| distance_at(theta, derive_seed(pilot_seed, i as u64)))
                .collect::<Result<Vec<f64>>>()?;
            let pick = d.iter().position(|v| *v < cfg.epsilon).unwrap_or_else(|| {
                (0..d.len()).min_by(|a, b| d[*a].total_cmp(&d[*b])).expect("n_draws >= 1")
            });
            pilot[pick].clone()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0));
    let run_root = derive_seed(cfg.seed, 1);
    let steps: Vec<f64> = space.params().iter().map(|p| cfg.proposal_scale * p.width()).collect();
    let mut chain = Vec::with_capacity(cfg.chain_length);
    chain.push(state.clone());
    let mut accepted = 0;
    for t in 1..cfg.chain_length {
        let proposal: Vec<f64> = space
            .params()
            .iter()
            .zip(&state)
            .zip(&steps)
            .map(|((p, x), s)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                reflect(x + s * z, p.low, p.high)
            })
            .collect();
        let d = if cfg.epsilon.is_infinite() {
            0.0
        } else {
            distance_at(&proposal, derive_seed(run_root, t as u64))?
        };
        if d < cfg.epsilon {
            state = proposal;
            accepted += 1;
        }
        chain.push(state.clone());
    }
    let proposals = cfg.chain_length - 1;
    if proposals > 0 && accepted == 0 {
        return Err(Error::NoAcceptance(format!(
            "none of {proposals} proposals came within epsilon = {}; try a larger epsilon",
            cfg.epsilon
        )));
    }

    let burn = ((cfg.burn_in * chain.len() as f64).floor() as usize).min(chain.len() - 1);
    let kept = &chain[burn..];
    let mut estimate = vec![0.0; space.len()];
    for theta in kept {
        for (e, t) in estimate.iter_mut().zip(theta) {
            *e += t;
        }
    }
    estimate.iter_mut().for_each(|e| *e /= kept.len() as f64);
    Ok(McmcResult {
        chain,
        estimate,
        accepted,
        acceptance_rate: if proposals == 0 { 0.0 } else { accepted as f64 / proposals as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, Row};
    use crate::models::{LineModelConfig, LineSimulator};

    #[test]
    fn reflection_stays_inside() {
        assert_eq!(reflect(0.5, 0.0, 1.0), 0.5);
        assert!((reflect(1.25, 0.0, 1.0) - 0.75).abs() < 1e-15);
        assert!((reflect(-0.25, 0.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((reflect(2.25, 0.0, 1.0) - 0.25).abs() < 1e-15);
        assert!((reflect(-3.5, 1.0, 2.0) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn keep_everything_is_table_mean() {
        let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
        let table = run_experiment(&sim, &LineSimulator::default_space(), 50, 3).unwrap();
        let res = rejection_abc(&table, &table.summary(0), &DistanceSpec::identity(), 1.0).unwrap();
        let mean = table.theta_column(0).iter().sum::<f64>() / 50.0;
        assert!((res.estimate[0] - mean).abs() < 1e-12);
        assert_eq!(res.retained.len(), 50);
    }

    #[test]
    fn exact_match_retained_first() {
        let space = ParameterSpace::single("b", 0.0, 1.0).unwrap();
        let rows = (0..20)
            .map(|i| {
                let b = i as f64 / 20.0;
                Row {
                    theta: vec![b],
                    stats: vec![b, 2.0 * b],
                }
            })
            .collect();
        let table = ExperimentTable::from_rows(space, vec!["a".into(), "c".into()], rows, 0).unwrap();
        let res = rejection_abc(&table, &table.summary(7), &DistanceSpec::identity(), 0.1).unwrap();
        assert_eq!(res.retained[0], 7);
        assert_eq!(res.distances[0], 0.0);
        assert_eq!(res.retained.len(), 2);
    }

    #[test]
    fn nothing_accepted_is_an_error() {
        let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
        let space = LineSimulator::default_space();
        let s_star = sim.run(&[1.0], 1).unwrap();
        let dist = WeightedDistance::new(&DistanceSpec::identity(), s_star.names(), None).unwrap();
        let cfg = AbcConfig {
            epsilon: 1e-9,
            chain_length: 50,
            n_draws: 10,
            ..AbcConfig::default()
        };
        let err = mcmc_abc(&sim, &space, &s_star, &dist, &cfg).unwrap_err();
        assert!(matches!(err, Error::NoAcceptance(_)));
        assert!(err.to_string().contains("larger epsilon"));
    }

    #[test]
    fn chain_is_reproducible() {
        let sim = LineSimulator::new(LineModelConfig::straight()).unwrap();
        let space = LineSimulator::default_space();
        let s_star = sim.run(&[1.0], 1).unwrap();
        let dist = WeightedDistance::new(&DistanceSpec::identity(), s_star.names(), None).unwrap();
        let cfg = AbcConfig {
            epsilon: 40.0,
            chain_length: 500,
            n_draws: 50,
            seed: 4,
            ..AbcConfig::default()
        };
        let a = mcmc_abc(&sim, &space, &s_star, &dist, &cfg).unwrap();
        let b = mcmc_abc(&sim, &space, &s_star, &dist, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.chain.len(), 500);
        assert!(a.acceptance_rate > 0.0 && a.acceptance_rate < 1.0);
        assert!((a.estimate[0] - 1.0).abs() < 0.3);
    }
}
