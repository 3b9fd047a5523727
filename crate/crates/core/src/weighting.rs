//! Rank-to-weight conversion and weighted minibatch sampling.
//!
//! A point with cumulative front rank `r` in a dataset of size `N` receives
//! the weight `1 / (k*N + r)`. The hyper-parameter `k > 0` controls how
//! sharply weights decay with rank: large `k` flattens the distribution
//! toward uniform, small `k` concentrates nearly all mass on the best
//! fronts. Weights are consumed by trainers either as a resampling
//! distribution over minibatch indices or as per-example loss multipliers.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pareto::{self, ObjectiveVector};
use crate::Result;

/// Whether a point came from the initial dataset or was generated by the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Original,
    Candidate,
}

/// A dataset ready for weighted training: feature vectors aligned with
/// oriented objectives, cumulative front ranks, and rank-derived weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedDataset {
    points: Vec<Vec<f64>>,
    objectives: Vec<ObjectiveVector>,
    ranks: Vec<usize>,
    weights: Vec<f64>,
    origin: Vec<Origin>,
}

impl WeightedDataset {
    /// Ranks the points by Pareto front and derives weights for the given `k`.
    pub fn build(
        points: Vec<Vec<f64>>,
        objectives: Vec<ObjectiveVector>,
        origin: Vec<Origin>,
        k: f64,
    ) -> Result<Self> {
        if points.len() != objectives.len() || points.len() != origin.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: objectives.len().min(origin.len()),
            });
        }
        let partition = pareto::pareto_partition(&objectives)?;
        let ranks = partition.ranks().to_vec();
        let weights = compute_weights(&ranks, k)?;
        Ok(WeightedDataset {
            points,
            objectives,
            ranks,
            weights,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn objectives(&self) -> &[ObjectiveVector] {
        &self.objectives
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn origin(&self) -> &[Origin] {
        &self.origin
    }
}

/// Weight of each rank: `w_i = 1 / (k*N + rank_i)` with `N = ranks.len()`.
///
/// No normalization is applied here; trainers normalize as needed.
pub fn compute_weights(ranks: &[usize], k: f64) -> Result<Vec<f64>> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid_parameter("k", format!("must be > 0, got {k}")));
    }
    if ranks.is_empty() {
        return Err(Error::EmptyInput("ranks"));
    }
    let n = ranks.len() as f64;
    Ok(ranks.iter().map(|&r| 1.0 / (k * n + r as f64)).collect())
}

/// Normalize positive weights into a probability vector.
pub fn sampling_distribution(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::EmptyInput("weights"));
    }
    for &w in weights {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::invalid_parameter(
                "weights",
                format!("must be positive and finite, got {w}"),
            ));
        }
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Draw `batch_size` indices i.i.d. from the given probability vector.
pub fn draw_minibatch_indices(
    probabilities: &[f64],
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if batch_size == 0 {
        return Err(Error::invalid_parameter("batch_size", "must be >= 1"));
    }
    if probabilities.is_empty() {
        return Err(Error::EmptyInput("probabilities"));
    }
    let dist = WeightedIndex::new(probabilities)
        .map_err(|e| Error::invalid_parameter("probabilities", e.to_string()))?;
    Ok((0..batch_size).map(|_| dist.sample(rng)).collect())
}
