//! The iterative weighted-retraining loop.
//!
//! One iteration, in order: score any training points lacking objectives,
//! rank the training set into Pareto fronts and derive rank weights, retrain
//! the generative model on the weighted set, harvest candidates from the
//! latent space (random sampling with front-based top-`r` selection, or
//! GP/EI proposals), merge deduplicated candidates into the growing pool
//! `D_new`, re-draw a fresh random subset of the initial dataset and join it
//! with `D_new` to form the next training set, then snapshot distribution
//! statistics from fresh model samples.
//!
//! Every random decision derives from `(seed, iteration, role)` streams, so
//! a checkpoint of the loop state is sufficient to resume bit-identically.

use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Error;
use crate::genmodel::{
    AutoencoderConfig, AutoencoderModel, GmmConfig, GmmModel, LatentModel, ModelCheckpoint,
    TrainingConfig,
};
use crate::metrics::{self, DiversityMetric, IterationMetrics};
use crate::objectives::{
    self, EvaluatorOptions, ObjectiveSpec, StandardizationStats,
};
use crate::pareto::{self, ObjectiveVector};
use crate::rng::{stream, StreamRole};
use crate::surrogate::{self, HyperSpec};
use crate::weighting::{Origin, WeightedDataset};
use crate::Result;

/// Candidates are duplicates when no coordinate differs by more than this.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// GP training set cap: the best-scoring entries kept for the surrogate.
pub const GP_DATA_CAP: usize = 1000;

/// Margin factor for the BO proposal box around the training latents.
pub const BO_BOUNDS_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Bo,
}

/// How to break ties when the selection quota cuts through a front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    Crowding,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    pub k: f64,
    pub iterations: usize,
    /// Latent samples drawn per iteration under the random strategy.
    pub n_random: usize,
    /// Candidates kept per iteration under the random strategy.
    pub top_r: usize,
    /// Fraction of the initial dataset re-drawn into each training set.
    pub subset_frac: f64,
    pub retrain_epochs: usize,
    pub baseline_epochs: usize,
    pub strategy: Strategy,
    /// Proposals per iteration under the BO strategy.
    pub bo_batch: usize,
    /// Fresh model samples per statistics snapshot.
    pub stats_sample: usize,
    pub seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            k: 1e-3,
            iterations: 10,
            n_random: 250,
            top_r: 50,
            subset_frac: 0.10,
            retrain_epochs: 1,
            baseline_epochs: 30,
            strategy: Strategy::Random,
            bo_batch: 50,
            stats_sample: 1000,
            seed: 0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::invalid_parameter("k", "must be > 0"));
        }
        if self.n_random == 0 || self.top_r == 0 || self.bo_batch == 0 {
            return Err(Error::invalid_parameter(
                "n_random/top_r/bo_batch",
                "must be >= 1",
            ));
        }
        if self.top_r > self.n_random {
            return Err(Error::invalid_parameter(
                "top_r",
                format!("must be <= n_random ({} > {})", self.top_r, self.n_random),
            ));
        }
        if !(self.subset_frac > 0.0 && self.subset_frac <= 1.0) {
            return Err(Error::invalid_parameter(
                "subset_frac",
                "must be in (0, 1]",
            ));
        }
        if self.stats_sample < 2 {
            return Err(Error::invalid_parameter("stats_sample", "must be >= 2"));
        }
        if self.retrain_epochs == 0 || self.baseline_epochs == 0 {
            return Err(Error::invalid_parameter(
                "retrain_epochs/baseline_epochs",
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

/// Which reference model the loop trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ModelConfig {
    #[serde(rename = "weighted-gmm")]
    Gmm(GmmConfig),
    #[serde(rename = "mini-autoencoder")]
    Autoencoder(AutoencoderConfig),
}

impl ModelConfig {
    pub fn build(&self, data_dim: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ModelCheckpoint> {
        match self {
            ModelConfig::Gmm(cfg) => Ok(ModelCheckpoint::Gmm(GmmModel::new(data_dim, cfg, seed)?)),
            ModelConfig::Autoencoder(cfg) => {
                let mut model = AutoencoderModel::new(data_dim, cfg, rng);
                model.train_meta.rng_seed = seed;
                Ok(ModelCheckpoint::Autoencoder(model))
            }
        }
    }
}

/// Non-serialized knobs shared by every run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub training: TrainingConfig,
    pub evaluator: EvaluatorOptions,
    pub diversity: DiversityMetric,
    pub tie_break: TieBreak,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            training: TrainingConfig::default(),
            evaluator: EvaluatorOptions::default(),
            diversity: DiversityMetric::Euclidean,
            tie_break: TieBreak::Crowding,
        }
    }
}

/// A design point paired with its oriented objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPoint {
    pub features: Vec<f64>,
    pub objectives: ObjectiveVector,
}

/// Complete, serializable loop state; saving it after an iteration is enough
/// to resume the run bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopState {
    pub config: LoopConfig,
    pub d0: Dataset,
    pub d_new: Dataset,
    /// Indices of the current training subset of `d0`; the training set is
    /// this subset joined with all of `d_new`.
    pub d0_train_indices: Vec<usize>,
    pub model: ModelCheckpoint,
    /// Completed iterations (0 right after baseline training).
    pub iteration: usize,
    pub metrics_log: Vec<IterationMetrics>,
    /// Standardization frozen from the initial dataset.
    pub stats: StandardizationStats,
    /// Indices into `d_new` appended by the most recent iteration.
    pub last_selected: Vec<usize>,
}

impl LoopState {
    pub fn train_size(&self) -> usize {
        self.d0_train_indices.len() + self.d_new.len()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        atomic_write(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub iteration: usize,
    pub objective_mean: Vec<f64>,
    pub objective_top10_mean: Vec<f64>,
    pub diversity: f64,
    pub d_new_size: usize,
    pub d_train_size: usize,
    pub weighted_loss: f64,
    pub wall_time_s: f64,
}

impl LogRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("serializable record")
    }
}

/// Write-temp-then-rename so a crash never leaves a truncated file behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn ensure_scored(
    ds: &mut Dataset,
    specs: &[ObjectiveSpec],
    evaluator: &EvaluatorOptions,
) -> Result<()> {
    let missing = ds.unscored_indices();
    if missing.is_empty() {
        return Ok(());
    }
    let pts: Vec<Vec<f64>> = missing.iter().map(|&i| ds.points[i].clone()).collect();
    let raws = objectives::evaluate_batch(specs, &pts, evaluator).map_err(|e| match e {
        // Map batch-local indices back to dataset indices.
        Error::Evaluation {
            index: Some(j),
            message,
        } if j < missing.len() => Error::Evaluation {
            index: Some(missing[j]),
            message,
        },
        other => other,
    })?;
    for (&i, raw) in missing.iter().zip(raws) {
        ds.raw[i] = Some(raw);
    }
    Ok(())
}

/// NSGA-style crowding distance of `members` (indices into `objectives`),
/// computed within their front. Boundary points per objective get infinity.
pub fn crowding_distance(objectives: &[ObjectiveVector], members: &[usize]) -> Vec<f64> {
    let mut dist = vec![0.0f64; members.len()];
    if members.len() <= 2 {
        return vec![f64::INFINITY; members.len()];
    }
    let k = objectives[members[0]].len();
    for obj in 0..k {
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| {
            let (va, vb) = (
                objectives[members[a]].values()[obj],
                objectives[members[b]].values()[obj],
            );
            va.partial_cmp(&vb).unwrap().then(members[a].cmp(&members[b]))
        });
        let lo = objectives[members[order[0]]].values()[obj];
        let hi = objectives[members[*order.last().unwrap()]].values()[obj];
        dist[order[0]] = f64::INFINITY;
        dist[*order.last().unwrap()] = f64::INFINITY;
        if hi > lo {
            for w in 1..order.len() - 1 {
                let prev = objectives[members[order[w - 1]]].values()[obj];
                let next = objectives[members[order[w + 1]]].values()[obj];
                dist[order[w]] += (next - prev) / (hi - lo);
            }
        }
    }
    dist
}

/// Select `r` points by whole fronts, breaking the boundary front by
/// descending crowding distance (or randomly, behind the switch).
pub fn select_top(
    objectives: &[ObjectiveVector],
    r: usize,
    tie_break: TieBreak,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let partition = pareto::pareto_partition(objectives)?;
    let r = r.min(objectives.len());
    let mut selected = Vec::with_capacity(r);
    for front in partition.fronts() {
        let remaining = r - selected.len();
        if remaining == 0 {
            break;
        }
        if front.len() <= remaining {
            selected.extend_from_slice(front);
            continue;
        }
        let mut order: Vec<usize> = (0..front.len()).collect();
        match tie_break {
            TieBreak::Crowding => {
                let crowd = crowding_distance(objectives, front);
                order.sort_by(|&a, &b| {
                    crowd[b]
                        .partial_cmp(&crowd[a])
                        .unwrap()
                        .then(front[a].cmp(&front[b]))
                });
            }
            TieBreak::Random => {
                // Fisher-Yates on the local order.
                for i in (1..order.len()).rev() {
                    let j = rng.random_range(0..=i);
                    order.swap(i, j);
                }
            }
        }
        selected.extend(order[..remaining].iter().map(|&w| front[w]));
        break;
    }
    Ok(selected)
}

/// Result of removing the top-ranked portion of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationSplit {
    pub removed: Vec<usize>,
    pub kept: Vec<usize>,
}

/// Remove the best `ceil(frac * n)` points by whole fronts in rank order;
/// when the quota cuts through a front, the largest-crowding-distance
/// members go first. Returns both sides of the split, each ascending.
pub fn ablate_top(points: &[ScoredPoint], frac: f64) -> Result<AblationSplit> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::invalid_parameter("frac", "must be in (0, 1)"));
    }
    let objectives: Vec<ObjectiveVector> = points.iter().map(|p| p.objectives.clone()).collect();
    let partition = pareto::pareto_partition(&objectives)?;
    let needed = (frac * points.len() as f64).ceil() as usize;

    let mut removed = Vec::with_capacity(needed);
    for front in partition.fronts() {
        let remaining = needed - removed.len();
        if remaining == 0 {
            break;
        }
        if front.len() <= remaining {
            removed.extend_from_slice(front);
            continue;
        }
        let crowd = crowding_distance(&objectives, front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .unwrap()
                .then(front[a].cmp(&front[b]))
        });
        removed.extend(order[..remaining].iter().map(|&w| front[w]));
        break;
    }
    removed.sort_unstable();
    let removed_set: std::collections::HashSet<usize> = removed.iter().copied().collect();
    let kept: Vec<usize> = (0..points.len())
        .filter(|i| !removed_set.contains(i))
        .collect();
    Ok(AblationSplit { removed, kept })
}

/// Fit a fresh model on the initial dataset with uniform weights.
pub fn train_baseline(
    d0: &Dataset,
    model_config: &ModelConfig,
    training: &TrainingConfig,
    baseline_epochs: usize,
    seed: u64,
) -> Result<ModelCheckpoint> {
    if d0.is_empty() {
        return Err(Error::EmptyInput("initial dataset"));
    }
    let mut init_rng = stream(seed, 0, StreamRole::ModelInit);
    let mut model = model_config.build(d0.dim, seed, &mut init_rng)?;
    let mut rng = stream(seed, 0, StreamRole::Baseline);
    let uniform = vec![1.0; d0.len()];
    let cfg = training.clone().with_epochs(baseline_epochs);
    model.fit_with_weights(&d0.points, &uniform, &cfg, &mut rng)?;
    Ok(model)
}

fn snapshot(
    model: &ModelCheckpoint,
    specs: &[ObjectiveSpec],
    options: &RunOptions,
    n: usize,
    iteration: usize,
    rng: &mut ChaCha8Rng,
) -> Result<IterationMetrics> {
    let latents = model.sample_latent(n, rng)?;
    let decoded: Vec<Vec<f64>> = latents
        .iter()
        .map(|z| model.decode(z))
        .collect::<Result<_>>()?;
    let raws = objectives::evaluate_batch(specs, &decoded, &options.evaluator)?;
    let k = specs.len();
    let mut means = Vec::with_capacity(k);
    let mut tops = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for obj in 0..k {
        let column: Vec<f64> = raws
            .iter()
            .map(|raw| specs[obj].sense.sign() * raw[obj])
            .collect();
        let (mean, top) = metrics::summary(&column)?;
        let var =
            column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / column.len() as f64;
        means.push(mean);
        tops.push(top);
        stds.push(var.sqrt());
    }
    let diversity = metrics::diversity(&decoded, &options.diversity)?;
    Ok(IterationMetrics {
        iteration,
        objective_mean: means,
        objective_top10_mean: tops,
        objective_std: stds,
        diversity,
        sample_size: n,
    })
}

/// Train the baseline and take the iteration-0 snapshot.
pub fn initialize(
    config: LoopConfig,
    model_config: &ModelConfig,
    mut d0: Dataset,
    specs: &[ObjectiveSpec],
    options: &RunOptions,
) -> Result<(LoopState, LogRecord)> {
    let t0 = Instant::now();
    config.validate()?;
    objectives::validate_specs(specs)?;
    options.training.validate()?;
    if d0.is_empty() {
        return Err(Error::EmptyInput("initial dataset"));
    }
    ensure_scored(&mut d0, specs, &options.evaluator)?;
    let raws: Vec<Vec<f64>> = d0.raw.iter().map(|r| r.clone().expect("scored")).collect();
    let stats = StandardizationStats::from_raw(&raws)?;

    let model = train_baseline(
        &d0,
        model_config,
        &options.training,
        config.baseline_epochs,
        config.seed,
    )?;
    let baseline_loss = model.train_meta().last_loss.unwrap_or(f64::NAN);

    let mut rng_stats = stream(config.seed, 0, StreamRole::Stats);
    let metrics = snapshot(&model, specs, options, config.stats_sample, 0, &mut rng_stats)?;

    let dim = d0.dim;
    let n = d0.len();
    let state = LoopState {
        config,
        d0,
        d_new: Dataset::new(dim),
        d0_train_indices: (0..n).collect(),
        model,
        iteration: 0,
        metrics_log: vec![metrics.clone()],
        stats,
        last_selected: Vec::new(),
    };
    let record = LogRecord {
        iteration: 0,
        objective_mean: metrics.objective_mean.clone(),
        objective_top10_mean: metrics.objective_top10_mean.clone(),
        diversity: metrics.diversity,
        d_new_size: 0,
        d_train_size: state.train_size(),
        weighted_loss: baseline_loss,
        wall_time_s: t0.elapsed().as_secs_f64(),
    };
    Ok((state, record))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Execute one full loop iteration. The input state is untouched; on any
/// error (notably evaluator failures) the caller's state remains valid.
pub fn run_iteration(
    state: &LoopState,
    specs: &[ObjectiveSpec],
    options: &RunOptions,
) -> Result<(LoopState, LogRecord)> {
    let t0 = Instant::now();
    let mut next = state.clone();
    let cfg = next.config.clone();
    let iter = next.iteration as u64 + 1;

    // (1) Score whatever the training set references that lacks objectives.
    ensure_scored(&mut next.d0, specs, &options.evaluator)?;
    ensure_scored(&mut next.d_new, specs, &options.evaluator)?;

    // (2) Rank the training set and derive weights.
    let mut train_points: Vec<Vec<f64>> = Vec::with_capacity(next.train_size());
    let mut train_oriented: Vec<ObjectiveVector> = Vec::with_capacity(next.train_size());
    let mut train_raw: Vec<Vec<f64>> = Vec::with_capacity(next.train_size());
    let mut origin: Vec<Origin> = Vec::with_capacity(next.train_size());
    for &i in &next.d0_train_indices {
        let raw = next.d0.raw[i].as_ref().expect("scored");
        train_points.push(next.d0.points[i].clone());
        train_oriented.push(objectives::orient(raw, specs)?);
        train_raw.push(raw.clone());
        origin.push(Origin::Original);
    }
    for i in 0..next.d_new.len() {
        let raw = next.d_new.raw[i].as_ref().expect("scored");
        train_points.push(next.d_new.points[i].clone());
        train_oriented.push(objectives::orient(raw, specs)?);
        train_raw.push(raw.clone());
        origin.push(Origin::Candidate);
    }
    let weighted = WeightedDataset::build(train_points, train_oriented, origin, cfg.k)?;

    // (3) Weighted retraining.
    let mut rng_retrain = stream(cfg.seed, iter, StreamRole::Retrain);
    let train_cfg = options.training.clone().with_epochs(cfg.retrain_epochs);
    let loss = next
        .model
        .fit_weighted(&weighted, &train_cfg, &mut rng_retrain)?;

    // (4) Harvest candidates from the latent space.
    let mut rng_cand = stream(cfg.seed, iter, StreamRole::Candidates);
    let selected: Vec<(Vec<f64>, Vec<f64>)> = match cfg.strategy {
        Strategy::Random => {
            let latents = next.model.sample_latent(cfg.n_random, &mut rng_cand)?;
            let decoded: Vec<Vec<f64>> = latents
                .iter()
                .map(|z| next.model.decode(z))
                .collect::<Result<_>>()?;
            let raws = objectives::evaluate_batch(specs, &decoded, &options.evaluator)?;
            let oriented: Vec<ObjectiveVector> = raws
                .iter()
                .map(|raw| objectives::orient(raw, specs))
                .collect::<Result<_>>()?;
            let chosen = select_top(&oriented, cfg.top_r, options.tie_break, &mut rng_cand)?;
            chosen
                .into_iter()
                .map(|i| (decoded[i].clone(), raws[i].clone()))
                .collect()
        }
        Strategy::Bo => {
            // Surrogate over latent encodings of the training set with
            // scalarized targets, capped at the best-scoring entries.
            let latents: Vec<Vec<f64>> = weighted
                .points()
                .iter()
                .map(|p| next.model.encode(p))
                .collect::<Result<_>>()?;
            let scores: Vec<f64> = train_raw
                .iter()
                .map(|raw| objectives::scalarize(raw, specs, &next.stats))
                .collect::<Result<_>>()?;
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| {
                scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b))
            });
            order.truncate(GP_DATA_CAP);
            let gp_inputs: Vec<Vec<f64>> = order.iter().map(|&i| latents[i].clone()).collect();
            let gp_targets: Vec<f64> = order.iter().map(|&i| scores[i]).collect();
            let gp = surrogate::gp_fit(&gp_inputs, &gp_targets, HyperSpec::default())?;
            let bounds = surrogate::bounds_from_latents(&gp_inputs, BO_BOUNDS_MARGIN)?;
            let proposals = surrogate::propose_batch(&gp, &bounds, cfg.bo_batch, &mut rng_cand)?;
            let mut decoded: Vec<Vec<f64>> = Vec::with_capacity(proposals.len());
            for z in &proposals {
                let x = next.model.decode(z)?;
                // Keep only unique samples within the proposal batch.
                if !decoded.iter().any(|q| max_abs_diff(q, &x) <= DEDUP_TOLERANCE) {
                    decoded.push(x);
                }
            }
            let raws = objectives::evaluate_batch(specs, &decoded, &options.evaluator)?;
            decoded.into_iter().zip(raws).collect()
        }
    };

    // (5) Merge candidates into the pool, deduplicating against it.
    next.last_selected.clear();
    for (point, raw) in selected {
        let duplicate = next
            .d_new
            .points
            .iter()
            .any(|q| max_abs_diff(q, &point) <= DEDUP_TOLERANCE);
        if !duplicate {
            next.d_new.push(point, Some(raw))?;
            next.last_selected.push(next.d_new.len() - 1);
        }
    }

    // (6) Fresh uniform subset of the initial dataset.
    let n_sub = ((cfg.subset_frac * next.d0.len() as f64).ceil() as usize).max(1);
    let mut rng_subset = stream(cfg.seed, iter, StreamRole::Subset);
    let mut subset = rand::seq::index::sample(&mut rng_subset, next.d0.len(), n_sub).into_vec();
    subset.sort_unstable();
    next.d0_train_indices = subset;

    // (7) Statistics snapshot from fresh model samples.
    let mut rng_stats = stream(cfg.seed, iter, StreamRole::Stats);
    let metrics = snapshot(
        &next.model,
        specs,
        options,
        cfg.stats_sample,
        iter as usize,
        &mut rng_stats,
    )?;
    next.metrics_log.push(metrics.clone());

    // (8) Advance.
    next.iteration += 1;
    let record = LogRecord {
        iteration: next.iteration,
        objective_mean: metrics.objective_mean.clone(),
        objective_top10_mean: metrics.objective_top10_mean.clone(),
        diversity: metrics.diversity,
        d_new_size: next.d_new.len(),
        d_train_size: next.train_size(),
        weighted_loss: loss,
        wall_time_s: t0.elapsed().as_secs_f64(),
    };
    Ok((next, record))
}

/// Baseline plus `config.iterations` loop iterations. `on_iteration` fires
/// after the baseline (iteration 0) and after every iteration; it is the
/// hook for writing checkpoints and log lines.
pub fn run(
    config: LoopConfig,
    model_config: &ModelConfig,
    d0: Dataset,
    specs: &[ObjectiveSpec],
    options: &RunOptions,
    mut on_iteration: impl FnMut(&LoopState, &LogRecord) -> Result<()>,
) -> Result<LoopState> {
    let (state, record) = initialize(config, model_config, d0, specs, options)?;
    on_iteration(&state, &record)?;
    resume(state, specs, options, on_iteration)
}

/// Continue a (possibly restored) state to its configured iteration budget.
pub fn resume(
    mut state: LoopState,
    specs: &[ObjectiveSpec],
    options: &RunOptions,
    mut on_iteration: impl FnMut(&LoopState, &LogRecord) -> Result<()>,
) -> Result<LoopState> {
    while state.iteration < state.config.iterations {
        let (next, record) = run_iteration(&state, specs, options)?;
        state = next;
        on_iteration(&state, &record)?;
    }
    Ok(state)
}
