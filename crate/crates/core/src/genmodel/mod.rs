//! Pluggable latent-variable generative models with weighted training.
//!
//! Two reference models implement the contract the retraining loop needs:
//! a weighted Gaussian mixture ([`gmm::GmmModel`], identity latent space,
//! fast) and a small weighted-ELBO autoencoder
//! ([`autoencoder::AutoencoderModel`], dense encoder/decoder, gradient
//! checked). Both train deterministically from a seeded RNG and serialize
//! to a JSON checkpoint whose float arrays round-trip bit-exactly.

pub mod autoencoder;
pub mod gmm;

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::weighting::WeightedDataset;
use crate::Result;

pub use autoencoder::{AutoencoderConfig, AutoencoderModel};
pub use gmm::{GmmConfig, GmmModel};

/// How per-sample weights enter training.
///
/// `Resample` draws minibatch indices proportionally to the normalized
/// weights; `LossMultiplier` draws uniformly and scales each example's loss
/// by `N * p_i`. Both give the same expected gradient. The Gaussian mixture
/// consumes weights analytically in its E/M steps, so the mode only affects
/// stochastic-gradient models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingMode {
    Resample,
    LossMultiplier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub weighting_mode: WeightingMode,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.0007,
            batch_size: 32,
            epochs: 1,
            weighting_mode: WeightingMode::Resample,
        }
    }
}

impl TrainingConfig {
    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid_parameter("learning_rate", "must be > 0"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid_parameter("batch_size", "must be >= 1"));
        }
        Ok(())
    }
}

/// Training bookkeeping carried inside every checkpoint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs_seen: usize,
    pub last_loss: Option<f64>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    WeightedGmm,
    MiniAutoencoder,
}

/// The training/inference contract the loop relies on.
pub trait LatentModel {
    fn data_dim(&self) -> usize;
    fn latent_dim(&self) -> usize;

    /// Train on weighted points for `config.epochs` passes. Weights must be
    /// nonnegative with a positive sum; only their relative sizes matter.
    /// Returns the final weighted training objective.
    fn fit_with_weights(
        &mut self,
        points: &[Vec<f64>],
        weights: &[f64],
        config: &TrainingConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64>;

    /// Deterministic embedding of a data point.
    fn encode(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Deterministic mapping from latent space back to data space.
    fn decode(&self, z: &[f64]) -> Result<Vec<f64>>;

    /// `n >= 1` i.i.d. draws from the model prior.
    fn sample_latent(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>>;
}

/// A serializable checkpoint wrapping either reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind")]
pub enum ModelCheckpoint {
    #[serde(rename = "weighted-gmm")]
    Gmm(GmmModel),
    #[serde(rename = "mini-autoencoder")]
    Autoencoder(AutoencoderModel),
}

impl ModelCheckpoint {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelCheckpoint::Gmm(_) => ModelKind::WeightedGmm,
            ModelCheckpoint::Autoencoder(_) => ModelKind::MiniAutoencoder,
        }
    }

    /// Train on a weighted dataset (ranks already turned into weights).
    pub fn fit_weighted(
        &mut self,
        dataset: &WeightedDataset,
        config: &TrainingConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        self.fit_with_weights(dataset.points(), dataset.weights(), config, rng)
    }

    pub fn train_meta(&self) -> &TrainMeta {
        match self {
            ModelCheckpoint::Gmm(m) => &m.train_meta,
            ModelCheckpoint::Autoencoder(m) => &m.train_meta,
        }
    }

    /// Flat view of every model parameter, used for change-norm diagnostics.
    pub fn flat_parameters(&self) -> Vec<f64> {
        match self {
            ModelCheckpoint::Gmm(m) => m.flat_parameters(),
            ModelCheckpoint::Autoencoder(m) => m.flat_parameters(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        crate::orchestrator::atomic_write(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl LatentModel for ModelCheckpoint {
    fn data_dim(&self) -> usize {
        match self {
            ModelCheckpoint::Gmm(m) => m.data_dim(),
            ModelCheckpoint::Autoencoder(m) => m.data_dim(),
        }
    }

    fn latent_dim(&self) -> usize {
        match self {
            ModelCheckpoint::Gmm(m) => m.latent_dim(),
            ModelCheckpoint::Autoencoder(m) => m.latent_dim(),
        }
    }

    fn fit_with_weights(
        &mut self,
        points: &[Vec<f64>],
        weights: &[f64],
        config: &TrainingConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        match self {
            ModelCheckpoint::Gmm(m) => m.fit_with_weights(points, weights, config, rng),
            ModelCheckpoint::Autoencoder(m) => m.fit_with_weights(points, weights, config, rng),
        }
    }

    fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ModelCheckpoint::Gmm(m) => m.encode(x),
            ModelCheckpoint::Autoencoder(m) => m.encode(x),
        }
    }

    fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        match self {
            ModelCheckpoint::Gmm(m) => m.decode(z),
            ModelCheckpoint::Autoencoder(m) => m.decode(z),
        }
    }

    fn sample_latent(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        match self {
            ModelCheckpoint::Gmm(m) => m.sample_latent(n, rng),
            ModelCheckpoint::Autoencoder(m) => m.sample_latent(n, rng),
        }
    }
}

/// Finite-difference verification of the trainer's analytic gradients; only
/// meaningful for the autoencoder (the GMM trains by EM, not gradients).
pub fn gradient_check(
    model: &ModelCheckpoint,
    points: &[Vec<f64>],
    weights: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    match model {
        ModelCheckpoint::Autoencoder(m) => autoencoder::gradient_check(m, points, weights, rng),
        ModelCheckpoint::Gmm(_) => Err(Error::invalid_parameter(
            "model",
            "gradient check requires a mini-autoencoder checkpoint",
        )),
    }
}

pub(crate) fn validate_fit_inputs(
    points: &[Vec<f64>],
    weights: &[f64],
    data_dim: usize,
) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput("training points"));
    }
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    for p in points {
        if p.len() != data_dim {
            return Err(Error::DimensionMismatch {
                expected: data_dim,
                got: p.len(),
            });
        }
    }
    let mut total = 0.0;
    for &w in weights {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::invalid_parameter(
                "weights",
                format!("must be nonnegative and finite, got {w}"),
            ));
        }
        total += w;
    }
    if !(total > 0.0) {
        return Err(Error::invalid_parameter("weights", "must not all be zero"));
    }
    Ok(())
}
