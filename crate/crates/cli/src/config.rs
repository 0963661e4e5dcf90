//! Flat `key = value` run configuration.
//!
//! Blank lines and everything after a `#` are ignored. Each key may appear
//! once; `--set key=value` overrides replace file values. Unknown keys are
//! rejected.
//!
//! | key | value |
//! |-----|-------|
//! | `model` | `straight`, `broken`, `surrogate` or `command` |
//! | `command` | program and leading arguments of an external simulator |
//! | `statistics` | comma-separated names of the external simulator's outputs |
//! | `param.<name>` | `<low> <high>`, one key per parameter, in order |
//! | `stats` | surrogate statistic families, e.g. `aux,ar5,cov` |
//! | `n_train`, `n_test` | table sizes (per candidate for `select`) |
//! | `expansion` | `linear`, `full`, or a list of `linear,squares,pairwise` |
//! | `alpha`, `lambda_count`, `lambda_ratio`, `cv_folds` | penalty |
//! | `fold_scheme` | `seeded` or `content-hash` |
//! | `lambda_rule` | `min` or `1se` |
//! | `design_seed`, `fit_seed` | the two seeds all randomness flows from |
//! | `output` | output directory |
//! | `candidates` | models compared by `select`, e.g. `straight,broken` |
//! | `preset` | benchmark name |
//! | `abc_distance`, `keep_fraction`, `epsilon_quantile`, `proposal_scale`, `chain_length`, `burn_in` | ABC baselines of `benchmark` |

use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;
use regcal::baselines::{DistanceSpec, Weighting};
use regcal::benchmark::Preset;
use regcal::estimator::FeatureExpansion;
use regcal::experiment::{Parameter, ParameterSpace};
use regcal::glmnet::{FoldScheme, LambdaPath, LambdaRule, PenaltySpec};
use regcal::models::{LineKind, StatPreset};

const KEYS: &[&str] = &[
    "model",
    "command",
    "statistics",
    "stats",
    "n_train",
    "n_test",
    "expansion",
    "alpha",
    "lambda_count",
    "lambda_ratio",
    "cv_folds",
    "fold_scheme",
    "lambda_rule",
    "design_seed",
    "fit_seed",
    "output",
    "candidates",
    "preset",
    "abc_distance",
    "keep_fraction",
    "epsilon_quantile",
    "proposal_scale",
    "chain_length",
    "burn_in",
];

#[derive(Clone, Debug, PartialEq)]
pub enum ModelChoice {
    Line(LineKind),
    Surrogate,
    Command,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AbcOverrides {
    pub distance: Option<DistanceSpec>,
    pub keep_fraction: Option<f64>,
    pub epsilon_quantile: Option<f64>,
    pub proposal_scale: Option<f64>,
    pub chain_length: Option<usize>,
    pub burn_in: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub command: Vec<String>,
    pub statistics: Option<Vec<String>>,
    pub params: Vec<Parameter>,
    pub stats: Option<Vec<StatPreset>>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub expansion: Option<FeatureExpansion>,
    pub penalty: PenaltySpec,
    pub design_seed: u64,
    pub fit_seed: u64,
    pub output: PathBuf,
    pub candidates: Vec<String>,
    pub preset: Option<Preset>,
    pub abc: AbcOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Line(LineKind::Straight),
            command: Vec::new(),
            statistics: None,
            params: Vec::new(),
            stats: None,
            n_train: None,
            n_test: None,
            expansion: None,
            penalty: PenaltySpec::default(),
            design_seed: 1,
            fit_seed: 2,
            output: PathBuf::from("out"),
            candidates: vec!["straight".into(), "broken".into()],
            preset: None,
            abc: AbcOverrides::default(),
        }
    }
}

/// `key = value` pairs in file order.
pub fn parse_pairs(text: &str) -> Result<IndexMap<String, String>, String> {
    let mut out = IndexMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = split_pair(line).map_err(|e| format!("line {}: {e}", n + 1))?;
        if out.insert(key.clone(), value).is_some() {
            return Err(format!("line {}: key `{key}` given twice", n + 1));
        }
    }
    Ok(out)
}

pub fn split_pair(text: &str) -> Result<(String, String), String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, got `{text}`"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("missing key in `{text}`"));
    }
    Ok((key.to_string(), value.trim().to_string()))
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}` as a number"))
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn expansion(value: &str) -> Result<FeatureExpansion, String> {
    if value == "full" {
        return Ok(FeatureExpansion::full());
    }
    let mut e = FeatureExpansion {
        include_linear: false,
        include_squares: false,
        include_pairwise: false,
    };
    for term in list(value) {
        match term.as_str() {
            "linear" => e.include_linear = true,
            "squares" => e.include_squares = true,
            "pairwise" => e.include_pairwise = true,
            other => {
                return Err(format!(
                    "`expansion`: unknown term `{other}` (expected linear, squares, pairwise or full)"
                ))
            }
        }
    }
    if !(e.include_linear || e.include_squares || e.include_pairwise) {
        return Err("`expansion` selects no features".into());
    }
    Ok(e)
}

impl RunConfig {
    pub fn from_pairs(pairs: &IndexMap<String, String>) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut lambda_count = None;
        let mut lambda_ratio = None;
        for (key, value) in pairs {
            let v = value.as_str();
            if let Some(name) = key.strip_prefix("param.") {
                let bounds: Vec<&str> = v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
                let [low, high] = bounds[..] else {
                    return Err(format!("`{key}`: expected `<low> <high>`, got `{v}`"));
                };
                cfg.params.push(Parameter::new(name, number(key, low)?, number(key, high)?));
                continue;
            }
            match key.as_str() {
                "model" => {
                    cfg.model = match v {
                        "surrogate" => ModelChoice::Surrogate,
                        "command" => ModelChoice::Command,
                        other => ModelChoice::Line(other.parse().map_err(|_| {
                            format!("`model`: unknown model `{other}` (expected straight, broken, surrogate or command)")
                        })?),
                    }
                }
                "command" => cfg.command = v.split_whitespace().map(str::to_string).collect(),
                "statistics" => cfg.statistics = Some(list(v)),
                "stats" => cfg.stats = Some(StatPreset::parse_list(v).map_err(|e| format!("`stats`: {e}"))?),
                "n_train" => cfg.n_train = Some(number(key, v)?),
                "n_test" => cfg.n_test = Some(number(key, v)?),
                "expansion" => cfg.expansion = Some(expansion(v)?),
                "alpha" => cfg.penalty.alpha = number(key, v)?,
                "lambda_count" => lambda_count = Some(number(key, v)?),
                "lambda_ratio" => lambda_ratio = Some(number(key, v)?),
                "cv_folds" => cfg.penalty.cv_folds = number(key, v)?,
                "fold_scheme" => {
                    cfg.penalty.fold_scheme = match v {
                        "seeded" => FoldScheme::Seeded,
                        "content-hash" => FoldScheme::ContentHash,
                        other => return Err(format!("`fold_scheme`: unknown scheme `{other}` (expected seeded or content-hash)")),
                    }
                }
                "lambda_rule" => cfg.penalty.lambda_rule = LambdaRule::from_str(v).map_err(|e| format!("`lambda_rule`: {e}"))?,
                "design_seed" => cfg.design_seed = number(key, v)?,
                "fit_seed" => cfg.fit_seed = number(key, v)?,
                "output" => cfg.output = PathBuf::from(v),
                "candidates" => cfg.candidates = list(v),
                "preset" => cfg.preset = Some(v.parse().map_err(|e| format!("`preset`: {e}"))?),
                "abc_distance" => {
                    let weighting = Weighting::from_str(v).map_err(|e| format!("`abc_distance`: {e}"))?;
                    if matches!(weighting, Weighting::Custom(_)) {
                        return Err("`abc_distance`: custom matrices are not configurable here".into());
                    }
                    cfg.abc.distance = Some(DistanceSpec { weighting, subset: None });
                }
                "keep_fraction" => cfg.abc.keep_fraction = Some(number(key, v)?),
                "epsilon_quantile" => cfg.abc.epsilon_quantile = Some(number(key, v)?),
                "proposal_scale" => cfg.abc.proposal_scale = Some(number(key, v)?),
                "chain_length" => cfg.abc.chain_length = Some(number(key, v)?),
                "burn_in" => cfg.abc.burn_in = Some(number(key, v)?),
                other => {
                    return Err(format!(
                        "unknown key `{other}` (known: {}, param.<name>)",
                        KEYS.join(", ")
                    ))
                }
            }
        }
        if lambda_count.is_some() || lambda_ratio.is_some() {
            let LambdaPath::Auto { count, ratio } = PenaltySpec::default().lambda_path else {
                unreachable!("default path is automatic")
            };
            cfg.penalty.lambda_path = LambdaPath::Auto {
                count: lambda_count.unwrap_or(count),
                ratio: lambda_ratio.unwrap_or(ratio),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        self.penalty.validate().map_err(|e| e.to_string())?;
        if !self.params.is_empty() {
            ParameterSpace::new(self.params.clone()).map_err(|e| e.to_string())?;
        }
        if self.model == ModelChoice::Command {
            if self.command.is_empty() {
                return Err("`model = command` needs a `command` key".into());
            }
            if self.params.is_empty() {
                return Err("`model = command` needs at least one `param.<name>` key".into());
            }
        }
        if self.n_train == Some(0) || self.n_test == Some(0) {
            return Err("`n_train` and `n_test` must be positive".into());
        }
        Ok(())
    }

    pub fn n_train(&self) -> usize {
        self.n_train.unwrap_or(1000)
    }

    pub fn n_test(&self) -> usize {
        self.n_test.unwrap_or(1000)
    }

    pub fn expansion(&self) -> FeatureExpansion {
        match (&self.expansion, &self.model) {
            (Some(e), _) => e.clone(),
            (None, ModelChoice::Surrogate) => FeatureExpansion::full(),
            (None, _) => FeatureExpansion::default(),
        }
    }
}
