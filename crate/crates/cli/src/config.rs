//! Run configuration files (TOML). Unknown keys are rejected everywhere;
//! the schema is validated before any computation starts.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use frontloop_core::dataset::{synthetic_uniform, Dataset};
use frontloop_core::error::Error;
use frontloop_core::genmodel::{AutoencoderConfig, GmmConfig, TrainingConfig, WeightingMode};
use frontloop_core::metrics::DiversityMetric;
use frontloop_core::objectives::{
    BuiltinObjective, EvaluatorOptions, ObjectiveSpec, Sense, Source, DEFAULT_TIMEOUT_SECS,
};
use frontloop_core::orchestrator::{LoopConfig, ModelConfig, RunOptions, Strategy, TieBreak};
use frontloop_core::Result;

/// Environment variable overriding the external-evaluator batch timeout.
pub const EVAL_TIMEOUT_ENV: &str = "FRONTLOOP_EVAL_TIMEOUT_SECS";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub dataset: DatasetSection,
    #[serde(rename = "loop", default)]
    pub loop_: LoopSection,
    pub model: ModelSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(rename = "objective")]
    pub objectives: Vec<ObjectiveSection>,
    #[serde(default)]
    pub evaluator: EvaluatorSection,
    #[serde(default)]
    pub metrics: MetricsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub n: usize,
    pub dim: usize,
    #[serde(default)]
    pub low: f64,
    #[serde(default = "default_high")]
    pub high: f64,
}

fn default_high() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopSection {
    pub k: f64,
    pub iterations: usize,
    pub n_random: usize,
    pub top_r: usize,
    pub subset_frac: f64,
    pub retrain_epochs: usize,
    pub baseline_epochs: usize,
    pub strategy: Strategy,
    pub bo_batch: usize,
    pub stats_sample: usize,
}

impl Default for LoopSection {
    fn default() -> Self {
        let d = LoopConfig::default();
        LoopSection {
            k: d.k,
            iterations: d.iterations,
            n_random: d.n_random,
            top_r: d.top_r,
            subset_frac: d.subset_frac,
            retrain_epochs: d.retrain_epochs,
            baseline_epochs: d.baseline_epochs,
            strategy: d.strategy,
            bo_batch: d.bo_batch,
            stats_sample: d.stats_sample,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    // weighted-gmm
    pub components: Option<usize>,
    pub cov_floor: Option<f64>,
    pub ll_tol: Option<f64>,
    // mini-autoencoder
    pub latent_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub beta: Option<f64>,
    pub sigma_dec: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weighting_mode: WeightingMode,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let d = TrainingConfig::default();
        TrainingSection {
            learning_rate: d.learning_rate,
            batch_size: d.batch_size,
            weighting_mode: d.weighting_mode,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    pub name: String,
    pub sense: Sense,
    pub builtin: Option<String>,
    pub command: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluatorSection {
    pub timeout_secs: u64,
}

impl Default for EvaluatorSection {
    fn default() -> Self {
        EvaluatorSection {
            timeout_secs: DEFAULT_TIMEOUT_SECS,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub diversity: DiversityKind,
}

#[derive(Debug, Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityKind {
    #[default]
    Euclidean,
    JaccardBinarized,
}

/// Everything a run needs, resolved and validated.
pub struct ResolvedConfig {
    pub loop_config: LoopConfig,
    pub model_config: ModelConfig,
    pub options: RunOptions,
    pub specs: Vec<ObjectiveSpec>,
    pub output_dir: PathBuf,
    pub diversity_kind: DiversityKind,
    dataset: DatasetSection,
    seed: u64,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfigFile =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{e}")))?;
        Ok(cfg)
    }

    pub fn resolve(self) -> Result<ResolvedConfig> {
        let loop_config = LoopConfig {
            k: self.loop_.k,
            iterations: self.loop_.iterations,
            n_random: self.loop_.n_random,
            top_r: self.loop_.top_r,
            subset_frac: self.loop_.subset_frac,
            retrain_epochs: self.loop_.retrain_epochs,
            baseline_epochs: self.loop_.baseline_epochs,
            strategy: self.loop_.strategy,
            bo_batch: self.loop_.bo_batch,
            stats_sample: self.loop_.stats_sample,
            seed: self.seed,
        };
        loop_config.validate()?;

        let model_config = self.model.resolve()?;

        let specs: Vec<ObjectiveSpec> = self
            .objectives
            .iter()
            .map(|o| o.resolve())
            .collect::<Result<_>>()?;
        frontloop_core::objectives::validate_specs(&specs)?;

        let timeout_secs = match std::env::var(EVAL_TIMEOUT_ENV) {
            Ok(v) => v.parse::<u64>().map_err(|_| {
                Error::Config(format!("{EVAL_TIMEOUT_ENV} must be an integer, got `{v}`"))
            })?,
            Err(_) => self.evaluator.timeout_secs,
        };

        let training = TrainingConfig {
            learning_rate: self.training.learning_rate,
            batch_size: self.training.batch_size,
            epochs: 1, // per-stage epoch counts come from the loop config
            weighting_mode: self.training.weighting_mode,
        };
        training.validate()?;

        let options = RunOptions {
            training,
            evaluator: EvaluatorOptions {
                timeout: Duration::from_secs(timeout_secs),
            },
            // Placeholder; swapped for binarized thresholds once D0 is known.
            diversity: DiversityMetric::Euclidean,
            tie_break: TieBreak::Crowding,
        };

        if self.dataset.path.is_none() && self.dataset.synthetic.is_none() {
            return Err(Error::Config(
                "dataset needs either `path` or `synthetic`".into(),
            ));
        }
        if self.dataset.path.is_some() && self.dataset.synthetic.is_some() {
            return Err(Error::Config(
                "dataset takes `path` or `synthetic`, not both".into(),
            ));
        }

        Ok(ResolvedConfig {
            loop_config,
            model_config,
            options,
            specs,
            output_dir: self.output_dir,
            diversity_kind: self.metrics.diversity,
            dataset: self.dataset,
            seed: self.seed,
        })
    }
}

impl ResolvedConfig {
    /// Load or synthesize the initial dataset.
    pub fn load_dataset(&self) -> Result<Dataset> {
        if let Some(path) = &self.dataset.path {
            let (ds, k) = crate::io::read_dataset(path)?;
            if k > 0 && k != self.specs.len() {
                return Err(Error::Config(format!(
                    "dataset has {k} objective columns but the config declares {}",
                    self.specs.len()
                )));
            }
            Ok(ds)
        } else {
            let synth = self.dataset.synthetic.as_ref().expect("validated");
            synthetic_uniform(synth.n, synth.dim, synth.low, synth.high, self.seed)
        }
    }

    /// Finalize the diversity metric, deriving thresholds from the initial
    /// dataset's per-dimension medians when the binarized option is chosen.
    pub fn finalize_diversity(&mut self, d0: &Dataset) {
        if self.diversity_kind == DiversityKind::JaccardBinarized {
            let mut thresholds = Vec::with_capacity(d0.dim);
            for j in 0..d0.dim {
                let mut column: Vec<f64> = d0.points.iter().map(|p| p[j]).collect();
                column.sort_by(|a, b| a.partial_cmp(b).unwrap());
                thresholds.push(column[column.len() / 2]);
            }
            self.options.diversity = DiversityMetric::JaccardBinarized { thresholds };
        }
    }
}

impl ModelSection {
    fn resolve(&self) -> Result<ModelConfig> {
        match self.kind.as_str() {
            "weighted-gmm" => {
                if self.latent_dim.is_some()
                    || self.hidden_dim.is_some()
                    || self.beta.is_some()
                    || self.sigma_dec.is_some()
                {
                    return Err(Error::Config(
                        "weighted-gmm does not take autoencoder keys".into(),
                    ));
                }
                let d = GmmConfig::default();
                Ok(ModelConfig::Gmm(GmmConfig {
                    components: self.components.unwrap_or(d.components),
                    cov_floor: self.cov_floor.unwrap_or(d.cov_floor),
                    ll_tol: self.ll_tol.unwrap_or(d.ll_tol),
                }))
            }
            "mini-autoencoder" => {
                if self.components.is_some() || self.cov_floor.is_some() || self.ll_tol.is_some()
                {
                    return Err(Error::Config(
                        "mini-autoencoder does not take gmm keys".into(),
                    ));
                }
                let d = AutoencoderConfig::default();
                Ok(ModelConfig::Autoencoder(AutoencoderConfig {
                    latent_dim: self.latent_dim.unwrap_or(d.latent_dim),
                    hidden_dim: self.hidden_dim.unwrap_or(d.hidden_dim),
                    beta: self.beta.unwrap_or(d.beta),
                    sigma_dec: self.sigma_dec.unwrap_or(d.sigma_dec),
                }))
            }
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

impl ObjectiveSection {
    fn resolve(&self) -> Result<ObjectiveSpec> {
        let source = match (&self.builtin, &self.command) {
            (Some(name), None) => Source::Builtin(name.parse::<BuiltinObjective>()?),
            (None, Some(command)) => Source::External {
                command: command.clone(),
            },
            _ => {
                return Err(Error::Config(format!(
                    "objective `{}` needs exactly one of `builtin` or `command`",
                    self.name
                )))
            }
        };
        Ok(ObjectiveSpec {
            name: self.name.clone(),
            sense: self.sense,
            source,
        })
    }
}
