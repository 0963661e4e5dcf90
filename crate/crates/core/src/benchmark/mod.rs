//! Seeded comparisons of the regression method against the baselines on
//! the demo models.
//!
//! Every preset draws its data from `design_seed` and all fitting and
//! sampling randomness from `fit_seed`, so a rerun with the same config
//! reproduces every output except the wall-clock columns.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::baselines::{
    curvature_profile, distance_profile, mcmc_abc, noise_to_signal, rejection_abc_with, smd_estimate, spearman,
    AbcConfig, AbcMethod, DistanceSpec, MinDistanceSelector, ProfilePoint, WeightedDistance,
};
use crate::error::{Error, Result};
use crate::estimator::{evaluate_with_predictions, rmse, train_estimator, EstimationReport, FeatureExpansion, FittedEstimator};
use crate::experiment::{derive_seed, run_experiment, Simulator};
use crate::glmnet::PenaltySpec;
use crate::models::{macro_space, LineKind, LineModelConfig, LineSimulator, StatPreset, SurrogateMacroSimulator};
use crate::selector::{
    build_selection_table, evaluate_selection, train_selector, Candidate, CandidateParameters, CandidateSet,
    ModelSelector, SelectionReport,
};

/// Columns holding wall-clock measurements; everything else is
/// reproducible.
pub const WALL_CLOCK_COLUMNS: [&str; 2] = ["runtime", "runtime_scaled"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Straight,
    Broken,
    Selection,
    Surrogate,
    Curvature,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Straight,
        Preset::Broken,
        Preset::Selection,
        Preset::Surrogate,
        Preset::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Straight => "straight",
            Preset::Broken => "broken",
            Preset::Selection => "selection",
            Preset::Surrogate => "surrogate",
            Preset::Curvature => "curvature",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let valid: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidArgument(format!("unknown preset `{s}` (valid: {})", valid.join(", ")))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub preset: Preset,
    /// Training rows; per candidate for the selection preset.
    pub n_train: usize,
    /// Test rows; per candidate for the selection preset.
    pub n_test: usize,
    pub design_seed: u64,
    pub fit_seed: u64,
    pub penalty: PenaltySpec,
    /// Distance used by both ABC samplers.
    pub abc_distance: DistanceSpec,
    pub keep_fraction: f64,
    /// MCMC epsilon as a quantile of the distances to the reference table.
    pub epsilon_quantile: f64,
    pub proposal_scale: f64,
    pub chain_length: usize,
    pub burn_in: f64,
    /// Slope at which the selection candidates and the curvature target are
    /// simulated.
    pub beta: f64,
    pub surrogate_stats: Vec<StatPreset>,
    /// Statistic set the surrogate run compares against.
    pub surrogate_baseline: Vec<StatPreset>,
    pub surrogate_expansion: FeatureExpansion,
    pub curvature_grid: usize,
    pub curvature_replicates: usize,
    pub smd_budget: usize,
}

impl BenchmarkConfig {
    pub fn new(preset: Preset) -> Self {
        let (n_train, n_test) = match preset {
            Preset::Surrogate => (2000, 2000),
            _ => (1000, 1000),
        };
        Self {
            preset,
            n_train,
            n_test,
            design_seed: 1,
            fit_seed: 2,
            penalty: PenaltySpec::default(),
            abc_distance: DistanceSpec::inverse_variance(),
            keep_fraction: 0.05,
            epsilon_quantile: 0.05,
            proposal_scale: 0.1,
            chain_length: 10_000,
            burn_in: 0.2,
            beta: 1.0,
            surrogate_stats: vec![StatPreset::Aux, StatPreset::Ar5, StatPreset::Cov],
            surrogate_baseline: vec![StatPreset::Xcorr],
            surrogate_expansion: FeatureExpansion::full(),
            curvature_grid: 41,
            curvature_replicates: 20,
            smd_budget: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train < 2 || self.n_test == 0 {
            return Err(Error::InvalidArgument("need at least 2 training and 1 test row".into()));
        }
        if !(self.epsilon_quantile > 0.0 && self.epsilon_quantile <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon quantile must lie in (0, 1], got {}",
                self.epsilon_quantile
            )));
        }
        if self.curvature_grid < 2 {
            return Err(Error::InvalidArgument("curvature grid needs at least 2 points".into()));
        }
        self.penalty.validate()?;
        self.abc_config(0, None, 1.0).validate()
    }

    fn abc_config(&self, seed: u64, initial: Option<Vec<f64>>, epsilon: f64) -> AbcConfig {
        AbcConfig {
            method: AbcMethod::Mcmc,
            n_draws: 0,
            keep_fraction: self.keep_fraction,
            epsilon,
            proposal_scale: self.proposal_scale,
            chain_length: self.chain_length,
            burn_in: self.burn_in,
            seed,
            initial: Some(initial.unwrap_or_else(|| vec![1.0])),
        }
    }

    fn train_seed(&self) -> u64 {
        derive_seed(self.design_seed, 0)
    }

    fn test_seed(&self) -> u64 {
        derive_seed(self.design_seed, 1)
    }

    fn target_seed(&self) -> u64 {
        derive_seed(self.design_seed, 2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodResult {
    pub method: String,
    pub rmse: f64,
    pub runtime: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub method: String,
    pub parameter: String,
    pub truth: f64,
    pub estimate: f64,
}

#[derive(Clone, Debug)]
pub struct LineOutcome {
    pub kind: LineKind,
    /// Regression, rejection ABC, MCMC ABC, in that order.
    pub methods: Vec<MethodResult>,
    pub points: Vec<PointEstimate>,
    pub estimator: FittedEstimator,
    /// Per test row: MCMC epsilon and acceptance rate.
    pub mcmc: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct SelectionMethod {
    pub method: String,
    pub report: SelectionReport,
    pub runtime: Duration,
}

#[derive(Clone, Debug)]
pub struct SelectionOutcome {
    /// Classifier first, then min-distance under each weighting.
    pub methods: Vec<SelectionMethod>,
    pub selector: ModelSelector,
}

#[derive(Clone, Debug)]
pub struct SurrogateSet {
    pub statistics: Vec<StatPreset>,
    pub base_statistics: usize,
    pub features: usize,
    pub report: EstimationReport,
    pub predictions: Vec<Vec<f64>>,
    pub truth: Vec<Vec<f64>>,
    pub runtime: Duration,
}

#[derive(Clone, Debug)]
pub struct SurrogateOutcome {
    /// The configured set first, then the baseline set.
    pub sets: Vec<SurrogateSet>,
}

#[derive(Clone, Debug)]
pub struct WeightingProfile {
    pub weighting: String,
    pub profile: Vec<ProfilePoint>,
    pub spearman: f64,
    pub noise_to_signal: f64,
    pub mean_replicate_variance: f64,
    pub smd_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct CurvatureLine {
    pub kind: LineKind,
    pub target_beta: f64,
    /// `(true beta of the reference row, |r(S*) - r(S)|)`.
    pub regression: Vec<(f64, f64)>,
    pub regression_spearman: f64,
    pub profiles: Vec<WeightingProfile>,
}

#[derive(Clone, Debug)]
pub struct CurvatureOutcome {
    /// Straight line, then broken line.
    pub lines: Vec<CurvatureLine>,
}

#[derive(Clone, Debug)]
pub enum BenchmarkOutcome {
    Line(LineOutcome),
    Selection(SelectionOutcome),
    Surrogate(SurrogateOutcome),
    Curvature(CurvatureOutcome),
}

pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkOutcome> {
    cfg.validate()?;
    Ok(match cfg.preset {
        Preset::Straight => BenchmarkOutcome::Line(line_benchmark(cfg, LineKind::Straight)?),
        Preset::Broken => BenchmarkOutcome::Line(line_benchmark(cfg, LineKind::Broken)?),
        Preset::Selection => BenchmarkOutcome::Selection(selection_benchmark(cfg)?),
        Preset::Surrogate => BenchmarkOutcome::Surrogate(surrogate_benchmark(cfg)?),
        Preset::Curvature => BenchmarkOutcome::Curvature(curvature_benchmark(cfg)?),
    })
}

fn line_config(kind: LineKind) -> LineModelConfig {
    match kind {
        LineKind::Straight => LineModelConfig::straight(),
        LineKind::Broken => LineModelConfig::broken(),
    }
}

/// Nearest-rank quantile.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

fn closest(d: &[f64]) -> usize {
    (0..d.len()).min_by(|a, b| d[*a].total_cmp(&d[*b])).expect("non-empty")
}

/// Regression, rejection ABC and MCMC ABC on one line model. The training
/// table doubles as the ABC reference table; its simulation time is charged
/// to every method.
pub fn line_benchmark(cfg: &BenchmarkConfig, kind: LineKind) -> Result<LineOutcome> {
    let sim = LineSimulator::new(line_config(kind))?;
    let space = LineSimulator::default_space();
    let test = run_experiment(&sim, &space, cfg.n_test, cfg.test_seed())?;
    let truth = test.theta_column(0);

    let started = Instant::now();
    let train = run_experiment(&sim, &space, cfg.n_train, cfg.train_seed())?;
    let simulation = started.elapsed();

    let started = Instant::now();
    let estimator = train_estimator(&train, &FeatureExpansion::default(), &cfg.penalty, cfg.fit_seed)?;
    let regression: Vec<f64> = estimator.predict_table(&test)?.into_iter().map(|p| p[0]).collect();
    let regression_time = simulation + started.elapsed();

    let started = Instant::now();
    let dist = WeightedDistance::for_table(&cfg.abc_distance, &train)?;
    let rejection = (0..test.len())
        .into_par_iter()
        .map(|i| Ok(rejection_abc_with(&train, &test.summary(i), &dist, cfg.keep_fraction)?.estimate[0]))
        .collect::<Result<Vec<f64>>>()?;
    let rejection_time = simulation + started.elapsed();

    let started = Instant::now();
    let mcmc_seed = derive_seed(cfg.fit_seed, 1);
    let chains = (0..test.len())
        .into_par_iter()
        .map(|i| {
            let s_star = test.summary(i);
            let d: Vec<f64> = train.rows().iter().map(|r| dist.eval(&r.stats, s_star.values())).collect();
            let epsilon = quantile(&d, cfg.epsilon_quantile);
            let initial = train.rows()[closest(&d)].theta.clone();
            let abc = cfg.abc_config(derive_seed(mcmc_seed, i as u64), Some(initial), epsilon);
            let res = mcmc_abc(&sim, &space, &s_star, &dist, &abc)?;
            Ok((res.estimate[0], epsilon, res.acceptance_rate))
        })
        .collect::<Result<Vec<(f64, f64, f64)>>>()?;
    let mcmc_time = simulation + started.elapsed();
    let mcmc: Vec<f64> = chains.iter().map(|c| c.0).collect();

    let name = &space.params()[0].name;
    let mut methods = Vec::new();
    let mut points = Vec::new();
    for (method, est, runtime) in [
        ("regression", &regression, regression_time),
        ("rejection-abc", &rejection, rejection_time),
        ("mcmc-abc", &mcmc, mcmc_time),
    ] {
        methods.push(MethodResult {
            method: method.into(),
            rmse: rmse(&truth, est),
            runtime,
        });
        points.extend(truth.iter().zip(est).map(|(t, e)| PointEstimate {
            method: method.into(),
            parameter: name.clone(),
            truth: *t,
            estimate: *e,
        }));
    }
    Ok(LineOutcome {
        kind,
        methods,
        points,
        estimator,
        mcmc: chains.iter().map(|c| (c.1, c.2)).collect(),
    })
}

fn line_candidates(beta: f64) -> Result<CandidateSet> {
    let make = |kind: LineKind| -> Result<Candidate> {
        let sim: Arc<dyn Simulator> = Arc::new(LineSimulator::new(line_config(kind))?);
        let label = match kind {
            LineKind::Straight => "straight",
            LineKind::Broken => "broken",
        };
        Ok(Candidate::new(label, sim, CandidateParameters::Fixed(vec![beta])))
    };
    CandidateSet::new(vec![make(LineKind::Straight)?, make(LineKind::Broken)?])
}

/// Classifier versus nearest-centroid selection between the two line models.
pub fn selection_benchmark(cfg: &BenchmarkConfig) -> Result<SelectionOutcome> {
    let cands = line_candidates(cfg.beta)?;
    let train = build_selection_table(&cands, cfg.n_train, cfg.train_seed())?;
    let test = build_selection_table(&cands, cfg.n_test, cfg.test_seed())?;

    let started = Instant::now();
    let selector = train_selector(&train, &cfg.penalty, cfg.fit_seed)?;
    let report = evaluate_selection(&selector, &test)?;
    let mut methods = vec![SelectionMethod {
        method: "classifier".into(),
        report,
        runtime: started.elapsed(),
    }];
    for spec in [DistanceSpec::identity(), DistanceSpec::inverse_variance()] {
        let started = Instant::now();
        let sel = MinDistanceSelector::fit(&train, &spec)?;
        let report = sel.evaluate(&test)?;
        methods.push(SelectionMethod {
            method: format!("min-distance-{}", spec.label()),
            report,
            runtime: started.elapsed(),
        });
    }
    Ok(SelectionOutcome { methods, selector })
}

fn set_label(set: &[StatPreset]) -> String {
    set.iter().map(|p| p.name()).collect::<Vec<_>>().join("+")
}

/// The regression method on the surrogate macro model under two statistic
/// sets. Both sets see the same parameter draws and run seeds.
pub fn surrogate_benchmark(cfg: &BenchmarkConfig) -> Result<SurrogateOutcome> {
    let space = macro_space();
    let mut sets = Vec::new();
    for stats in [&cfg.surrogate_stats, &cfg.surrogate_baseline] {
        let sim = SurrogateMacroSimulator::new(stats.clone());
        let test = run_experiment(&sim, &space, cfg.n_test, cfg.test_seed())?;
        let started = Instant::now();
        let train = run_experiment(&sim, &space, cfg.n_train, cfg.train_seed())?;
        let est = train_estimator(&train, &cfg.surrogate_expansion, &cfg.penalty, cfg.fit_seed)?;
        let (report, predictions) = evaluate_with_predictions(&est, &test)?;
        let runtime = started.elapsed();
        sets.push(SurrogateSet {
            statistics: stats.clone(),
            base_statistics: train.statistic_names().len(),
            features: est.models[0].features.len(),
            report,
            predictions,
            truth: test.rows().iter().map(|r| r.theta.clone()).collect(),
            runtime,
        });
    }
    Ok(SurrogateOutcome { sets })
}

fn curvature_line(cfg: &BenchmarkConfig, kind: LineKind) -> Result<CurvatureLine> {
    let sim = LineSimulator::new(line_config(kind))?;
    let space = LineSimulator::default_space();
    let train = run_experiment(&sim, &space, cfg.n_train, cfg.train_seed())?;
    let reference = run_experiment(&sim, &space, cfg.n_test, cfg.test_seed())?;
    let s_star = sim.run(&[cfg.beta], cfg.target_seed())?;

    let est = train_estimator(&train, &FeatureExpansion::default(), &cfg.penalty, cfg.fit_seed)?;
    let regression: Vec<(f64, f64)> = curvature_profile(&est, &reference, &s_star)?
        .into_iter()
        .map(|p| (p.theta, p.value))
        .collect();
    let gap = |thetas: &mut dyn Iterator<Item = f64>| -> Vec<f64> { thetas.map(|t| (t - cfg.beta).abs()).collect() };
    let regression_spearman = spearman(
        &gap(&mut regression.iter().map(|p| p.0)),
        &regression.iter().map(|p| p.1).collect::<Vec<_>>(),
    );

    let p = &space.params()[0];
    let step = p.width() / (cfg.curvature_grid - 1) as f64;
    let grid: Vec<Vec<f64>> = (0..cfg.curvature_grid).map(|i| vec![p.low + i as f64 * step]).collect();
    let profile_seed = derive_seed(cfg.fit_seed, 2);
    let mut profiles = Vec::new();
    for spec in [DistanceSpec::identity(), DistanceSpec::inverse_variance()] {
        let dist = WeightedDistance::for_table(&spec, &train)?;
        let profile = distance_profile(&sim, &grid, &s_star, &dist, cfg.curvature_replicates, profile_seed)?;
        let means: Vec<f64> = profile.iter().map(|q| q.mean).collect();
        let smd = smd_estimate(&sim, &space, &s_star, &dist, cfg.smd_budget, derive_seed(cfg.fit_seed, 3))?;
        profiles.push(WeightingProfile {
            weighting: spec.label().into(),
            spearman: spearman(&gap(&mut grid.iter().map(|t| t[0])), &means),
            noise_to_signal: noise_to_signal(&profile),
            mean_replicate_variance: profile.iter().map(|q| q.variance).sum::<f64>() / profile.len() as f64,
            smd_estimate: smd.theta[0],
            profile,
        });
    }
    Ok(CurvatureLine {
        kind,
        target_beta: cfg.beta,
        regression,
        regression_spearman,
        profiles,
    })
}

/// Regression curvature and distance profiles on both line models.
pub fn curvature_benchmark(cfg: &BenchmarkConfig) -> Result<CurvatureOutcome> {
    Ok(CurvatureOutcome {
        lines: vec![
            curvature_line(cfg, LineKind::Straight)?,
            curvature_line(cfg, LineKind::Broken)?,
        ],
    })
}

fn kind_name(kind: LineKind) -> &'static str {
    match kind {
        LineKind::Straight => "straight",
        LineKind::Broken => "broken",
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

impl BenchmarkOutcome {
    /// `(file name, CSV contents)` for every output of the preset.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut files = Vec::new();
        match self {
            BenchmarkOutcome::Line(out) => {
                let base = secs(out.methods[0].runtime).max(f64::MIN_POSITIVE);
                let mut s = String::from("method,rmse,runtime,runtime_scaled\n");
                for m in &out.methods {
                    let _ = writeln!(s, "{},{},{},{}", m.method, m.rmse, secs(m.runtime), secs(m.runtime) / base);
                }
                files.push(("methods.csv".into(), s));
                files.push(("points.csv".into(), points_csv(&out.points)));
                let model = &out.estimator.models[0];
                let mut s = String::from("term,estimate\n");
                let _ = writeln!(s, "(intercept),{}", model.intercept);
                for (f, c) in model.features.iter().zip(model.dense_coefficients()) {
                    let _ = writeln!(s, "{f},{c}");
                }
                files.push(("coefficients.csv".into(), s));
                let mut s = String::from("test_row,epsilon,acceptance_rate\n");
                for (i, (eps, rate)) in out.mcmc.iter().enumerate() {
                    let _ = writeln!(s, "{i},{eps},{rate}");
                }
                files.push(("mcmc.csv".into(), s));
            }
            BenchmarkOutcome::Selection(out) => {
                let mut s = String::from("method,accuracy,runtime\n");
                for m in &out.methods {
                    let _ = writeln!(s, "{},{},{}", m.method, m.report.accuracy, secs(m.runtime));
                }
                files.push(("selection.csv".into(), s));
                let mut s = String::from("method,true,predicted,count\n");
                for m in &out.methods {
                    let r = &m.report;
                    for (t, row) in r.labels.iter().zip(&r.confusion) {
                        for (p, c) in r.labels.iter().zip(row) {
                            let _ = writeln!(s, "{},{t},{p},{c}", m.method);
                        }
                    }
                }
                files.push(("confusion.csv".into(), s));
                let clf = &out.selector.classifier;
                let mut s = String::from("class,term,estimate\n");
                for (k, class) in clf.classes.iter().enumerate() {
                    let _ = writeln!(s, "{class},(intercept),{}", clf.intercepts[k]);
                    for (f, c) in clf.features.iter().zip(&clf.dense_coefficients()[k]) {
                        let _ = writeln!(s, "{class},{f},{c}");
                    }
                }
                files.push(("coefficients.csv".into(), s));
            }
            BenchmarkOutcome::Surrogate(out) => {
                let mut s = String::from("statistics,base_statistics,features,runtime\n");
                for set in &out.sets {
                    let _ = writeln!(
                        s,
                        "{},{},{},{}",
                        set_label(&set.statistics),
                        set.base_statistics,
                        set.features,
                        secs(set.runtime)
                    );
                }
                files.push(("sets.csv".into(), s));
                let mut s = String::from("statistics,parameter,bias,rmse,predictivity\n");
                let mut pts = Vec::new();
                for set in &out.sets {
                    let label = set_label(&set.statistics);
                    for (k, p) in set.report.parameters.iter().enumerate() {
                        let pred = p.predictivity.map(|v| v.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{label},{},{},{},{pred}", p.name, p.bias, p.rmse);
                        pts.extend(set.truth.iter().zip(&set.predictions).map(|(t, e)| PointEstimate {
                            method: label.clone(),
                            parameter: p.name.clone(),
                            truth: t[k],
                            estimate: e[k],
                        }));
                    }
                }
                files.push(("parameters.csv".into(), s));
                files.push(("points.csv".into(), points_csv(&pts)));
            }
            BenchmarkOutcome::Curvature(out) => {
                let mut s = String::from("line,method,theta,value,replicate_variance\n");
                let mut summary =
                    String::from("line,method,spearman,noise_to_signal,mean_replicate_variance,smd_estimate\n");
                for line in &out.lines {
                    let kind = kind_name(line.kind);
                    for (t, v) in &line.regression {
                        let _ = writeln!(s, "{kind},regression,{t},{v},");
                    }
                    let _ = writeln!(summary, "{kind},regression,{},,,", line.regression_spearman);
                    for w in &line.profiles {
                        for q in &w.profile {
                            let _ = writeln!(s, "{kind},{},{},{},{}", w.weighting, q.theta[0], q.mean, q.variance);
                        }
                        let _ = writeln!(
                            summary,
                            "{kind},{},{},{},{},{}",
                            w.weighting, w.spearman, w.noise_to_signal, w.mean_replicate_variance, w.smd_estimate
                        );
                    }
                }
                files.push(("curvature.csv".into(), s));
                files.push(("curvature_summary.csv".into(), summary));
            }
        }
        files
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<String>> {
        std::fs::create_dir_all(dir)?;
        let files = self.files();
        for (name, body) in &files {
            std::fs::write(dir.join(name), body)?;
        }
        Ok(files.into_iter().map(|f| f.0).collect())
    }
}

fn points_csv(points: &[PointEstimate]) -> String {
    let mut s = String::from("method,parameter,theta_true,theta_hat\n");
    for p in points {
        let _ = writeln!(s, "{},{},{},{}", p.method, p.parameter, p.truth, p.estimate);
    }
    s
}

/// Drops [`WALL_CLOCK_COLUMNS`] from a CSV so runs can be compared byte
/// for byte.
pub fn strip_wall_clock(csv_text: &str) -> String {
    let mut lines = csv_text.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let keep: Vec<bool> = header.split(',').map(|c| !WALL_CLOCK_COLUMNS.contains(&c)).collect();
    let filter = |line: &str| -> String {
        line.split(',')
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(v, _)| v)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = filter(header);
    out.push('\n');
    for line in lines {
        out.push_str(&filter(line));
        out.push('\n');
    }
    out
}
