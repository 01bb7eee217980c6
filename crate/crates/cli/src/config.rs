//! TOML run configuration.
//!
//! ```toml
//! population_size = 70
//! generations = 120
//! seed = 7
//! K = 3
//! objectives = "three"        # or "two": accuracy and latency only
//! lut_path = "lut.csv"        # omit to use the multiply-add proxy
//!
//! [weights]
//! acc = 0.4
//! lat = 0.4
//! params = 0.2
//!
//! [evaluator]
//! kind = "table"              # or "synthetic"
//! path = "accuracy.csv"
//! miss = "default"            # or "strict"
//! default = 0.5
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use lutnas_core::evaluator::AccuracyScore;
use lutnas_core::{
    Evaluator, LatencyTable, MissPolicy, ObjectiveMode, ObjectiveWeights, SearchConfig,
    SearchSpace, SyntheticEvaluator, TableEvaluator,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objectives {
    #[default]
    Three,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    #[default]
    Synthetic,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Miss {
    #[default]
    Strict,
    Default,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorConfig {
    #[serde(default)]
    pub kind: EvaluatorKind,
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub miss: Miss,
    pub default: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "defaults::population_size")]
    pub population_size: usize,
    #[serde(default = "defaults::generations")]
    pub generations: usize,
    #[serde(default)]
    pub weights: ObjectiveWeights,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::crossover_prob")]
    pub crossover_prob: f64,
    #[serde(default = "defaults::p_layer")]
    pub p_layer: f64,
    #[serde(default = "defaults::p_resample")]
    pub p_resample: f64,
    #[serde(rename = "K", alias = "k", default = "defaults::report_size")]
    pub report_size: usize,
    pub latency_cap_ms: Option<f64>,
    #[serde(default)]
    pub objectives: Objectives,
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "defaults::num_classes")]
    pub num_classes: u32,
    /// Mask such as `*,*,*,*,*,0,0,0,0,0,0,0,0,0`; all layers free if absent.
    pub space: Option<String>,
    pub lut_path: Option<PathBuf>,
    #[serde(default)]
    pub evaluator: EvaluatorConfig,
}

mod defaults {
    use lutnas_core::SearchConfig;

    pub fn population_size() -> usize {
        SearchConfig::default().population_size
    }
    pub fn generations() -> usize {
        SearchConfig::default().generations
    }
    pub fn crossover_prob() -> f64 {
        SearchConfig::default().crossover_prob
    }
    pub fn p_layer() -> f64 {
        SearchConfig::default().p_layer
    }
    pub fn p_resample() -> f64 {
        SearchConfig::default().p_resample
    }
    pub fn report_size() -> usize {
        SearchConfig::default().report_size
    }
    pub fn num_classes() -> u32 {
        SearchConfig::default().num_classes
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("every field has a default")
    }
}

/// A config with its inputs loaded and checked.
pub struct LoadedRun {
    pub config: RunConfig,
    pub search: SearchConfig,
    pub lut: LatencyTable,
    pub evaluator: Box<dyn Evaluator>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p.to_path_buf()
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> CliResult<Self> {
        toml::from_str(text)
            .map_err(|e| CliError::Validation(format!("{}: {}", origin.display(), e.message())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        RunConfig::parse(&text, path)
    }

    pub fn search_config(&self, origin: &Path) -> CliResult<SearchConfig> {
        let space = match &self.space {
            Some(mask) => mask
                .parse::<SearchSpace>()
                .map_err(|e| CliError::Validation(format!("{}: space: {e}", origin.display())))?,
            None => SearchSpace::full(),
        };
        let cfg = SearchConfig {
            population_size: self.population_size,
            generations: self.generations,
            weights: self.weights,
            seed: self.seed,
            crossover_prob: self.crossover_prob,
            p_layer: self.p_layer,
            p_resample: self.p_resample,
            report_size: self.report_size,
            latency_cap_ms: self.latency_cap_ms,
            objectives: match self.objectives {
                Objectives::Three => ObjectiveMode::Three,
                Objectives::Two => ObjectiveMode::AccuracyLatency,
            },
            space,
            num_classes: self.num_classes,
            workers: self.workers,
        };
        cfg.validate().map_err(|e| CliError::in_file(origin, e))?;
        Ok(cfg)
    }

    /// Validates the config and loads the latency table and evaluator it
    /// names. `origin` is the config file, used for messages and relative
    /// paths.
    pub fn into_run(self, origin: &Path) -> CliResult<LoadedRun> {
        let search = self.search_config(origin)?;
        let base = origin.parent().unwrap_or(Path::new("."));
        let lut = match &self.lut_path {
            Some(p) => {
                let p = resolve(base, p);
                LatencyTable::load(&p).map_err(|e| CliError::in_file(&p, e))?
            }
            None => LatencyTable::reference_proxy(),
        };
        let evaluator: Box<dyn Evaluator> = match self.evaluator.kind {
            EvaluatorKind::Synthetic => Box::new(SyntheticEvaluator),
            EvaluatorKind::Table => {
                let p = self.evaluator.path.as_ref().ok_or_else(|| {
                    CliError::Validation(format!(
                        "{}: evaluator: kind = \"table\" requires a path",
                        origin.display()
                    ))
                })?;
                let policy = match self.evaluator.miss {
                    Miss::Strict => MissPolicy::Strict,
                    Miss::Default => {
                        let v = self.evaluator.default.ok_or_else(|| {
                            CliError::Validation(format!(
                                "{}: evaluator: miss = \"default\" requires a default score",
                                origin.display()
                            ))
                        })?;
                        MissPolicy::Default(AccuracyScore::new(v).map_err(|e| {
                            CliError::Validation(format!(
                                "{}: evaluator: default: {e}",
                                origin.display()
                            ))
                        })?)
                    }
                };
                let p = resolve(base, p);
                Box::new(TableEvaluator::load(&p, policy).map_err(|e| CliError::in_file(&p, e))?)
            }
        };
        Ok(LoadedRun {
            config: self,
            search,
            lut,
            evaluator,
        })
    }
}
