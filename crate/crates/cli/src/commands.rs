use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use regcal::benchmark::{run_benchmark, BenchmarkConfig, Preset};
use regcal::estimator::{evaluate_with_predictions, train_estimator, FittedEstimator};
use regcal::experiment::{
    derive_seed, read_table, run_experiment, write_table, ParameterSpace, Simulator, SummaryVector,
};
use regcal::experiment::io::STAT_PREFIX;
use regcal::models::{macro_space, LineKind, LineModelConfig, LineSimulator, StatPreset, SurrogateMacroSimulator};
use regcal::selector::{
    build_selection_table, evaluate_selection, train_selector_with, Candidate, CandidateParameters, CandidateSet,
    LabeledTable,
};
use regcal::Error;

use crate::config::{ModelChoice, RunConfig};
use crate::external::CommandSimulator;

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration, arguments or input files (exit 2).
    Usage(String),
    /// A simulator or sampler failed while running (exit 3).
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_runtime() {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn io_context(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
        other => other.into(),
    }
}

fn write_file(path: &Path, body: &str) -> Outcome {
    fs::write(path, body).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))
}

fn line_space(cfg: &RunConfig) -> Result<ParameterSpace, Failure> {
    let default = LineSimulator::default_space();
    if cfg.params.is_empty() {
        return Ok(default);
    }
    let space = ParameterSpace::new(cfg.params.clone())?;
    if space.names() != default.names() {
        return Err(Failure::Usage(format!(
            "line models take parameters {:?}, config gives {:?}",
            default.names(),
            space.names()
        )));
    }
    Ok(space)
}

fn line_config(kind: LineKind) -> LineModelConfig {
    match kind {
        LineKind::Straight => LineModelConfig::straight(),
        LineKind::Broken => LineModelConfig::broken(),
    }
}

fn simulator(cfg: &RunConfig) -> Result<(Arc<dyn Simulator>, ParameterSpace), Failure> {
    Ok(match cfg.model {
        ModelChoice::Line(kind) => (Arc::new(LineSimulator::new(line_config(kind))?), line_space(cfg)?),
        ModelChoice::Surrogate => {
            let space = macro_space();
            if !cfg.params.is_empty() {
                return Err(Failure::Usage("the surrogate model has fixed parameter bounds".into()));
            }
            let presets = cfg
                .stats
                .clone()
                .unwrap_or_else(|| vec![StatPreset::Aux, StatPreset::Ar5, StatPreset::Cov]);
            (Arc::new(SurrogateMacroSimulator::new(presets)), space)
        }
        ModelChoice::Command => (
            Arc::new(CommandSimulator::new(&cfg.command, cfg.statistics.clone())),
            ParameterSpace::new(cfg.params.clone())?,
        ),
    })
}

pub fn simulate(cfg: &RunConfig) -> Outcome {
    let (sim, space) = simulator(cfg)?;
    create_dir(&cfg.output)?;
    for (name, n, index) in [("train.csv", cfg.n_train(), 0), ("test.csv", cfg.n_test(), 1)] {
        let table = run_experiment(&sim, &space, n, derive_seed(cfg.design_seed, index))?;
        let path = cfg.output.join(name);
        write_table(&table, &path).map_err(io_context(&path))?;
        eprintln!(
            "wrote {} ({} rows, {} columns)",
            path.display(),
            table.len(),
            space.len() + table.statistic_names().len()
        );
    }
    Ok(())
}

pub fn train(cfg: &RunConfig, table: Option<PathBuf>, out: Option<PathBuf>) -> Outcome {
    let path = table.unwrap_or_else(|| cfg.output.join("train.csv"));
    let table = read_table(&path).map_err(io_context(&path))?;
    let est = train_estimator(&table, &cfg.expansion(), &cfg.penalty, cfg.fit_seed)?;
    let out = out.unwrap_or_else(|| cfg.output.join("estimator.json"));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_file(&out, &(est.to_json()? + "\n"))?;
    for (p, m) in est.space.params().iter().zip(&est.models) {
        eprintln!(
            "{}: {} of {} features kept, lambda {:.4e}",
            p.name,
            m.coefficients.len(),
            m.features.len(),
            m.lambda_selected
        );
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn load_estimator(path: &Path) -> Result<FittedEstimator, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(FittedEstimator::from_json(&text)?)
}

/// One-row CSV of observed statistics; `S.` prefixes are optional.
fn read_observed(path: &Path, expected: &[String]) -> Result<SummaryVector, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().strip_prefix(STAT_PREFIX).unwrap_or(h.trim()).to_string())
        .collect();
    for (i, name) in expected.iter().enumerate() {
        match header.get(i) {
            Some(h) if h == name => {}
            Some(h) => {
                return Err(Error::SchemaMismatch {
                    column: format!("{STAT_PREFIX}{h}"),
                    detail: format!("expected `{STAT_PREFIX}{name}`"),
                }
                .into())
            }
            None => {
                return Err(Error::SchemaMismatch {
                    column: format!("{STAT_PREFIX}{name}"),
                    detail: "column missing".into(),
                }
                .into())
            }
        }
    }
    if let Some(extra) = header.get(expected.len()) {
        return Err(Error::SchemaMismatch {
            column: format!("{STAT_PREFIX}{extra}"),
            detail: "statistic not known to the estimator".into(),
        }
        .into());
    }
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let [record] = &records[..] else {
        return Err(Failure::Usage(format!(
            "{}: expected exactly one row of observed statistics, found {}",
            path.display(),
            records.len()
        )));
    };
    let values = record
        .iter()
        .zip(&header)
        .map(|(f, h)| {
            f.trim().parse::<f64>().map_err(|_| {
                Failure::from(Error::SchemaMismatch {
                    column: format!("{STAT_PREFIX}{h}"),
                    detail: format!("`{f}` is not a number"),
                })
            })
        })
        .collect::<Result<Vec<f64>, Failure>>()?;
    Ok(SummaryVector::new(header, values)?)
}

pub fn estimate(cfg: &RunConfig, model: Option<PathBuf>, observed: &Path) -> Outcome {
    let est = load_estimator(&model.unwrap_or_else(|| cfg.output.join("estimator.json")))?;
    let s_star = read_observed(observed, &est.statistics)?;
    let e = est.estimate(&s_star)?;
    let mut out = String::from("parameter,estimate,low,high,out_of_bounds\n");
    for ((p, v), flag) in est.space.params().iter().zip(&e.values).zip(&e.out_of_bounds) {
        let _ = writeln!(out, "{},{v},{},{},{flag}", p.name, p.low, p.high);
    }
    print!("{out}");
    for w in e.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

pub fn evaluate(cfg: &RunConfig, model: Option<PathBuf>, table: Option<PathBuf>) -> Outcome {
    let est = load_estimator(&model.unwrap_or_else(|| cfg.output.join("estimator.json")))?;
    let path = table.unwrap_or_else(|| cfg.output.join("test.csv"));
    let test = read_table(&path).map_err(io_context(&path))?;
    let (report, predictions) = evaluate_with_predictions(&est, &test)?;
    create_dir(&cfg.output)?;
    let csv = report.to_csv()?;
    write_file(&cfg.output.join("report.csv"), &csv)?;
    let mut points = String::from("parameter,theta_true,theta_hat\n");
    for (k, p) in est.space.params().iter().enumerate() {
        for (row, pred) in test.rows().iter().zip(&predictions) {
            let _ = writeln!(points, "{},{},{}", p.name, row.theta[k], pred[k]);
        }
    }
    write_file(&cfg.output.join("evaluation_points.csv"), &points)?;
    print!("{csv}");
    Ok(())
}

fn candidates(cfg: &RunConfig) -> Result<CandidateSet, Failure> {
    let space = line_space(cfg)?;
    let cands = cfg
        .candidates
        .iter()
        .map(|name| {
            let kind: LineKind = name.parse().map_err(|_| {
                Failure::Usage(format!("unknown candidate `{name}` (expected straight or broken)"))
            })?;
            let sim: Arc<dyn Simulator> = Arc::new(LineSimulator::new(line_config(kind))?);
            Ok(Candidate::new(name.clone(), sim, CandidateParameters::Sampled(space.clone())))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(CandidateSet::new(cands)?)
}

pub fn select(cfg: &RunConfig, train: Option<PathBuf>, test: Option<PathBuf>) -> Outcome {
    let (train, test) = match (train, test) {
        (Some(a), Some(b)) => (
            LabeledTable::read_csv(&a).map_err(io_context(&a))?,
            LabeledTable::read_csv(&b).map_err(io_context(&b))?,
        ),
        (None, None) => {
            let cands = candidates(cfg)?;
            let train = build_selection_table(&cands, cfg.n_train(), derive_seed(cfg.design_seed, 0))?;
            let test = build_selection_table(&cands, cfg.n_test(), derive_seed(cfg.design_seed, 1))?;
            create_dir(&cfg.output)?;
            for (name, t) in [("selection_train.csv", &train), ("selection_test.csv", &test)] {
                let path = cfg.output.join(name);
                t.write_csv(&path).map_err(io_context(&path))?;
            }
            (train, test)
        }
        _ => return Err(Failure::Usage("give both --train and --test, or neither".into())),
    };
    let selector = train_selector_with(&train, &cfg.expansion(), &cfg.penalty, cfg.fit_seed)?;
    let report = evaluate_selection(&selector, &test)?;
    create_dir(&cfg.output)?;
    write_file(&cfg.output.join("selector.json"), &(selector.to_json()? + "\n"))?;
    write_file(&cfg.output.join("confusion.csv"), &report.confusion_csv()?)?;
    write_file(&cfg.output.join("selection.json"), &(report.summary_json()? + "\n"))?;
    print!("{}", report.confusion_csv()?);
    println!("accuracy,{}", report.accuracy);
    Ok(())
}

pub fn benchmark(cfg: &RunConfig, preset: Option<String>) -> Outcome {
    let preset: Preset = match preset {
        Some(name) => name.parse()?,
        None => cfg.preset.ok_or_else(|| {
            let valid: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            Failure::Usage(format!("no benchmark preset given (valid: {})", valid.join(", ")))
        })?,
    };
    let mut b = BenchmarkConfig::new(preset);
    b.n_train = cfg.n_train.unwrap_or(b.n_train);
    b.n_test = cfg.n_test.unwrap_or(b.n_test);
    b.design_seed = cfg.design_seed;
    b.fit_seed = cfg.fit_seed;
    b.penalty = cfg.penalty.clone();
    if let Some(stats) = &cfg.stats {
        b.surrogate_stats = stats.clone();
    }
    if let Some(e) = &cfg.expansion {
        b.surrogate_expansion = e.clone();
    }
    let abc = &cfg.abc;
    if let Some(d) = &abc.distance {
        b.abc_distance = d.clone();
    }
    b.keep_fraction = abc.keep_fraction.unwrap_or(b.keep_fraction);
    b.epsilon_quantile = abc.epsilon_quantile.unwrap_or(b.epsilon_quantile);
    b.proposal_scale = abc.proposal_scale.unwrap_or(b.proposal_scale);
    b.chain_length = abc.chain_length.unwrap_or(b.chain_length);
    b.burn_in = abc.burn_in.unwrap_or(b.burn_in);

    let outcome = run_benchmark(&b)?;
    create_dir(&cfg.output)?;
    let files = outcome.files();
    for (name, body) in &files {
        write_file(&cfg.output.join(name), body)?;
        eprintln!("wrote {}", cfg.output.join(name).display());
    }
    if let Some((_, body)) = files.first() {
        print!("{body}");
    }
    Ok(())
}
