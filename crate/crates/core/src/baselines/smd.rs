use rayon::prelude::*;

use super::distance::WeightedDistance;
use crate::error::{Error, Result};
use crate::experiment::{derive_seed, ParameterSpace, Simulator, SummaryVector};

/// Simulation replicates averaged per evaluated point.
pub const SMD_REPLICATES: usize = 3;

const GOLDEN_STEPS: usize = 20;
const REFINE_PASSES: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct SmdResult {
    pub theta: Vec<f64>,
    /// Mean distance at `theta` over the replicates.
    pub distance: f64,
    /// Number of points evaluated (each costs `SMD_REPLICATES` runs).
    pub evaluations: usize,
}

/// Mean distance to `s_star` over replicates that share run seeds across
/// points, so the objective is a deterministic function of `theta`.
fn objective(
    sim: &dyn Simulator,
    s_star: &SummaryVector,
    dist: &WeightedDistance,
    seed: u64,
    theta: &[f64],
) -> Result<f64> {
    let mut total = 0.0;
    for r in 0..SMD_REPLICATES {
        let s = sim.run(theta, derive_seed(seed, r as u64))?;
        dist.check(&s)?;
        total += dist.eval(s.values(), s_star.values());
    }
    Ok(total / SMD_REPLICATES as f64)
}

fn grid_side(budget: usize, k: usize) -> usize {
    let mut g = 1usize;
    while (g + 1).checked_pow(k as u32).is_some_and(|n| n <= budget) {
        g += 1;
    }
    g
}

/// Simulated minimum distance: the best point of a cell-centred grid with
/// about `budget` points, then golden-section search along each coordinate
/// within the neighbouring cells. Budgets below 10 skip the refinement, so
/// `budget = 1` returns the centre of the space.
pub fn smd_estimate(
    sim: &dyn Simulator,
    space: &ParameterSpace,
    s_star: &SummaryVector,
    dist: &WeightedDistance,
    budget: usize,
    seed: u64,
) -> Result<SmdResult> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    dist.check(s_star)?;
    let k = space.len();
    let g = grid_side(budget, k);
    let axes: Vec<Vec<f64>> = space
        .params()
        .iter()
        .map(|p| (0..g).map(|i| p.low + (i as f64 + 0.5) * p.width() / g as f64).collect())
        .collect();
    let points: Vec<Vec<f64>> = (0..g.pow(k as u32))
        .map(|mut idx| {
            axes.iter()
                .map(|axis| {
                    let v = axis[idx % g];
                    idx /= g;
                    v
                })
                .collect()
        })
        .collect();
    let values = points
        .par_iter()
        .map(|theta| objective(sim, s_star, dist, seed, theta))
        .collect::<Result<Vec<f64>>>()?;
    let best = (0..values.len())
        .min_by(|a, b| values[*a].total_cmp(&values[*b]).then(a.cmp(b)))
        .expect("grid is non-empty");
    let mut theta = points[best].clone();
    let mut value = values[best];
    let mut evaluations = points.len();

    if budget >= 10 {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..REFINE_PASSES {
            for (j, p) in space.params().iter().enumerate() {
                let cell = p.width() / g as f64;
                let mut a = (theta[j] - cell).max(p.low);
                let mut b = (theta[j] + cell).min(p.high);
                let mut at = |x: f64| -> Result<f64> {
                    let mut t = theta.clone();
                    t[j] = x;
                    evaluations += 1;
                    objective(sim, s_star, dist, seed, &t)
                };
                let mut c = b - phi * (b - a);
                let mut d = a + phi * (b - a);
                let mut fc = at(c)?;
                let mut fd = at(d)?;
                for _ in 0..GOLDEN_STEPS {
                    if fc <= fd {
                        b = d;
                        d = c;
                        fd = fc;
                        c = b - phi * (b - a);
                        fc = at(c)?;
                    } else {
                        a = c;
                        c = d;
                        fc = fd;
                        d = a + phi * (b - a);
                        fd = at(d)?;
                    }
                }
                let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
                if fx < value {
                    theta[j] = x;
                    value = fx;
                }
            }
        }
    }
    Ok(SmdResult {
        theta,
        distance: value,
        evaluations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePoint {
    pub theta: Vec<f64>,
    /// Mean distance over the replicates.
    pub mean: f64,
    /// Sample variance of the distance across replicates.
    pub variance: f64,
}

/// Distance to `s_star` at each point of `thetas`, replicate `r` using run
/// seed `derive_seed(seed, r)` at every point.
pub fn distance_profile(
    sim: &dyn Simulator,
    thetas: &[Vec<f64>],
    s_star: &SummaryVector,
    dist: &WeightedDistance,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint>> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    dist.check(s_star)?;
    thetas
        .par_iter()
        .map(|theta| {
            let d = (0..replicates)
                .map(|r| {
                    let s = sim.run(theta, derive_seed(seed, r as u64))?;
                    dist.check(&s)?;
                    Ok(dist.eval(s.values(), s_star.values()))
                })
                .collect::<Result<Vec<f64>>>()?;
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let variance = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(ProfilePoint {
                theta: theta.clone(),
                mean,
                variance,
            })
        })
        .collect()
}

/// Average replicate variance relative to the variance of the mean profile
/// across points. Scale free, so profiles under different weightings can be
/// compared.
pub fn noise_to_signal(profile: &[ProfilePoint]) -> f64 {
    let n = profile.len() as f64;
    let noise = profile.iter().map(|p| p.variance).sum::<f64>() / n;
    let centre = profile.iter().map(|p| p.mean).sum::<f64>() / n;
    let signal = profile.iter().map(|p| (p.mean - centre).powi(2)).sum::<f64>() / (n - 1.0);
    noise / signal
}
