//! In-memory datasets: feature vectors with lazily evaluated raw objectives.

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::{stream, StreamRole};
use crate::Result;

/// A set of design points plus a cache of raw (un-oriented) objective
/// vectors. `raw[i]` is `None` until point `i` has been evaluated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub raw: Vec<Option<Vec<f64>>>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset {
            dim,
            points: Vec::new(),
            raw: Vec::new(),
        }
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::evaluation(Some(i), "non-finite feature value"));
            }
        }
        let raw = vec![None; points.len()];
        Ok(Dataset { dim, points, raw })
    }

    /// Points with pre-computed raw objective vectors attached.
    pub fn from_scored(points: Vec<Vec<f64>>, raw: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() != raw.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: raw.len(),
            });
        }
        let mut ds = Dataset::from_points(points)?;
        ds.raw = raw.into_iter().map(Some).collect();
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: Vec<f64>, raw: Option<Vec<f64>>) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.points.push(point);
        self.raw.push(raw);
        Ok(())
    }

    /// Indices whose objectives have not been evaluated yet.
    pub fn unscored_indices(&self) -> Vec<usize> {
        self.raw
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.is_none().then_some(i))
            .collect()
    }
}

/// `n` points uniform in `[low, high]^dim`, reproducible from the seed.
pub fn synthetic_uniform(n: usize, dim: usize, low: f64, high: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid_parameter("n/dim", "must be >= 1"));
    }
    if !(low < high) {
        return Err(Error::invalid_parameter(
            "low/high",
            format!("need low < high, got [{low}, {high}]"),
        ));
    }
    let mut rng = stream(seed, 0, StreamRole::ModelInit);
    let points = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| low + (high - low) * rng.random::<f64>())
                .collect()
        })
        .collect();
    Dataset::from_points(points)
}
