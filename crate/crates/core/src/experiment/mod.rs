//! Parameter spaces, simulator runs and the design table they produce.
//!
//! An [`ExperimentTable`] is the training set for every estimator in this
//! crate: one row per simulator run, holding the parameter draw that was fed
//! in and the summary statistics that came out.

pub mod io;

use std::collections::HashSet;
use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use io::{read_table, write_table, TableManifest};

/// A named model input sampled uniformly in `[low, high]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, low: f64, high: f64) -> Self {
        Self {
            name: name.into(),
            low,
            high,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.low && value <= self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Parameter>", into = "Vec<Parameter>")]
pub struct ParameterSpace {
    params: Vec<Parameter>,
}

impl ParameterSpace {
    pub fn new(params: Vec<Parameter>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("no parameters".into()));
        }
        let mut seen = HashSet::new();
        for p in &params {
            if p.name.is_empty() {
                return Err(Error::InvalidSpace("empty parameter name".into()));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate parameter `{}`", p.name)));
            }
            if !(p.low.is_finite() && p.high.is_finite() && p.low < p.high) {
                return Err(Error::InvalidSpace(format!(
                    "parameter `{}` needs finite low < high, got [{}, {}]",
                    p.name, p.low, p.high
                )));
            }
        }
        Ok(Self { params })
    }

    /// Convenience for a one-parameter space.
    pub fn single(name: impl Into<String>, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![Parameter::new(name, low, high)])
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.params.len()
            && self.params.iter().zip(theta).all(|(p, &v)| p.contains(v))
    }
}

impl TryFrom<Vec<Parameter>> for ParameterSpace {
    type Error = Error;

    fn try_from(params: Vec<Parameter>) -> Result<Self> {
        Self::new(params)
    }
}

impl From<ParameterSpace> for Vec<Parameter> {
    fn from(space: ParameterSpace) -> Self {
        space.params
    }
}

/// Named summary statistics produced by one simulator run (or observed in
/// the real world).
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryVector {
    names: Arc<[String]>,
    values: Vec<f64>,
}

impl SummaryVector {
    /// Builds a vector, rejecting length mismatches and non-finite values.
    pub fn new(names: impl Into<Arc<[String]>>, values: Vec<f64>) -> Result<Self> {
        let names = names.into();
        if names.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} statistic names but {} values",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "statistic `{}` = {}",
                names[i], values[i]
            )));
        }
        Ok(Self { names, values })
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let (names, values): (Vec<String>, Vec<f64>) =
            pairs.into_iter().map(|(n, v)| (n.into(), v)).unzip();
        Self::new(names, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shared_names(&self) -> Arc<[String]> {
        Arc::clone(&self.names)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }
}

/// A black-box model mapping parameters to summary statistics.
///
/// Implementations must be callable from several worker threads at once and
/// must take all of their randomness from `run_seed`, so that the same
/// `(theta, run_seed)` always produces the same output.
pub trait Simulator: Send + Sync {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector>;
}

impl<S: Simulator + ?Sized> Simulator for Arc<S> {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector> {
        (**self).run(theta, run_seed)
    }
}

impl<S: Simulator + ?Sized> Simulator for &S {
    fn run(&self, theta: &[f64], run_seed: u64) -> Result<SummaryVector> {
        (**self).run(theta, run_seed)
    }
}

const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th member of the stream rooted at `seed`.
///
/// For a fixed root the map `index -> seed` is injective: the splitmix
/// finalizer is a bijection and `(index + 1) * SEED_GAMMA` is distinct for
/// every index since the multiplier is odd.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let root = splitmix64(seed ^ 0x5851_F42D_4C95_7F2D);
    splitmix64(root.wrapping_add(index.wrapping_add(1).wrapping_mul(SEED_GAMMA)))
}

pub fn sample_parameters(space: &ParameterSpace, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            space
                .params()
                .iter()
                .map(|p| {
                    let u: f64 = rng.random();
                    (p.low + p.width() * u).min(p.high)
                })
                .collect()
        })
        .collect()
}

/// One simulation: the parameter draw and the statistics it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub theta: Vec<f64>,
    pub stats: Vec<f64>,
}

/// Stable 64-bit fingerprint of a row's contents.
pub fn row_digest(label: Option<&str>, theta: &[f64], stats: &[f64]) -> u64 {
    let mut hasher = Sha256::new();
    if let Some(label) = label {
        hasher.update(label.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update((theta.len() as u64).to_le_bytes());
    for v in theta.iter().chain(stats) {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentTable {
    space: ParameterSpace,
    statistic_names: Arc<[String]>,
    rows: Vec<Row>,
    seed: u64,
    lineage: String,
}

impl ExperimentTable {
    /// Assembles a table from existing rows, checking every invariant.
    pub fn from_rows(
        space: ParameterSpace,
        statistic_names: Vec<String>,
        rows: Vec<Row>,
        seed: u64,
    ) -> Result<Self> {
        let k = space.len();
        let m = statistic_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.theta.len() != k || row.stats.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "row {i}: expected {k} parameters and {m} statistics, got {} and {}",
                    row.theta.len(),
                    row.stats.len()
                )));
            }
            if !space.contains(&row.theta) {
                return Err(Error::InvalidArgument(format!(
                    "row {i}: theta {:?} outside the parameter space",
                    row.theta
                )));
            }
            if let Some(j) = row.stats.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "row {i}: statistic `{}` = {}",
                    statistic_names[j], row.stats[j]
                )));
            }
        }
        Ok(Self {
            space,
            statistic_names: statistic_names.into(),
            rows,
            seed,
            lineage: format!("rows(seed={seed})"),
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn statistic_names(&self) -> &[String] {
        &self.statistic_names
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Human-readable record of how the table was produced.
    pub fn lineage(&self) -> &str {
        &self.lineage
    }

    pub(crate) fn with_lineage(mut self, lineage: String) -> Self {
        self.lineage = lineage;
        self
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn summary(&self, row: usize) -> SummaryVector {
        SummaryVector {
            names: Arc::clone(&self.statistic_names),
            values: self.rows[row].stats.clone(),
        }
    }

    /// The `index`-th parameter across all rows.
    pub fn theta_column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.theta[index]).collect()
    }

    pub fn stat_column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.stats[index]).collect()
    }

    pub fn stats_matrix(&self) -> Array2<f64> {
        let m = self.statistic_names.len();
        Array2::from_shape_fn((self.rows.len(), m), |(i, j)| self.rows[i].stats[j])
    }

    pub fn digests(&self) -> Vec<u64> {
        self.rows
            .iter()
            .map(|r| row_digest(None, &r.theta, &r.stats))
            .collect()
    }
}

/// Runs `sim` once per parameter draw.
///
/// Row `i` uses run seed `derive_seed(seed, i)`; rows are computed on the
/// rayon pool and assembled in draw order, so the result does not depend on
/// the number of workers.
pub fn run_experiment(
    sim: &dyn Simulator,
    space: &ParameterSpace,
    n: usize,
    seed: u64,
) -> Result<ExperimentTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("experiment needs at least one run".into()));
    }
    let thetas = sample_parameters(space, n, seed);
    let outputs: Vec<Result<SummaryVector>> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, theta)| sim.run(theta, derive_seed(seed, i as u64)))
        .collect();

    let mut names: Option<Arc<[String]>> = None;
    let mut rows = Vec::with_capacity(n);
    for (i, (theta, out)) in thetas.into_iter().zip(outputs).enumerate() {
        let fail = |reason: String, theta: Vec<f64>| Error::Simulation {
            row: i,
            theta,
            seed: derive_seed(seed, i as u64),
            reason,
        };
        let sv = match out {
            Ok(sv) => sv,
            Err(e) => return Err(fail(e.to_string(), theta)),
        };
        match &names {
            None => names = Some(sv.shared_names()),
            Some(expected) if **expected != *sv.names() => {
                return Err(fail(
                    "statistic names differ from earlier runs".into(),
                    theta,
                ))
            }
            Some(_) => {}
        }
        if let Some(j) = sv.values().iter().position(|v| !v.is_finite()) {
            return Err(fail(
                format!("statistic `{}` is {}", sv.names()[j], sv.values()[j]),
                theta,
            ));
        }
        rows.push(Row {
            theta,
            stats: sv.into_values(),
        });
    }
    Ok(ExperimentTable {
        space: space.clone(),
        statistic_names: names.expect("n >= 1"),
        rows,
        seed,
        lineage: format!("experiment(n={n},seed={seed})"),
    })
}

/// Partitions rows into `floor(fraction * n)` training rows and the rest.
///
/// Both halves keep the original row order.
pub fn split_table(
    table: &ExperimentTable,
    fraction: f64,
    seed: u64,
) -> Result<(ExperimentTable, ExperimentTable)> {
    let (train_idx, test_idx) = split_indices(table.len(), fraction, seed)?;
    let pick = |idx: &[usize], side: &str| {
        ExperimentTable {
            space: table.space.clone(),
            statistic_names: Arc::clone(&table.statistic_names),
            rows: idx.iter().map(|&i| table.rows[i].clone()).collect(),
            seed: table.seed,
            lineage: format!("{}/split({fraction},seed={seed})/{side}", table.lineage),
        }
    };
    Ok((pick(&train_idx, "train"), pick(&test_idx, "test")))
}

pub(crate) fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n_train = (fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
