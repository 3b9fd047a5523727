//! Weighted Gaussian mixture model fit by weighted EM.
//!
//! The latent space is the data space itself (encode/decode are the
//! identity), which makes this the fast reference model for the retraining
//! loop: one training "epoch" is one weighted EM iteration (a full E and M
//! pass), warm-started from the current parameters.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::genmodel::{validate_fit_inputs, LatentModel, TrainMeta, TrainingConfig};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub components: usize,
    /// Eigenvalue floor applied to every covariance update.
    pub cov_floor: f64,
    /// Early-stop threshold on the change in weighted log-likelihood.
    pub ll_tol: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 10,
            cov_floor: 1e-6,
            ll_tol: 1e-8,
        }
    }
}

/// Checkpointable weighted Gaussian mixture. Parameter arrays are flat and
/// row-major: `means[c*d + j]`, `covariances[c*d*d + row*d + col]`. Empty
/// arrays mean the model has not been initialized yet; the first fit seeds
/// means by weighted k-means++ and covariances from the weighted data
/// covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub data_dim: usize,
    pub latent_dim: usize,
    pub components: usize,
    pub cov_floor: f64,
    pub ll_tol: f64,
    pub mixture_weights: Vec<f64>,
    pub means: Vec<f64>,
    pub covariances: Vec<f64>,
    pub train_meta: TrainMeta,
}

impl GmmModel {
    pub fn new(data_dim: usize, config: &GmmConfig, rng_seed: u64) -> Result<Self> {
        if data_dim == 0 {
            return Err(Error::invalid_parameter("data_dim", "must be >= 1"));
        }
        if config.components == 0 {
            return Err(Error::invalid_parameter("components", "must be >= 1"));
        }
        if !(config.cov_floor > 0.0) {
            return Err(Error::invalid_parameter("cov_floor", "must be > 0"));
        }
        Ok(GmmModel {
            data_dim,
            latent_dim: data_dim,
            components: config.components,
            cov_floor: config.cov_floor,
            ll_tol: config.ll_tol,
            mixture_weights: Vec::new(),
            means: Vec::new(),
            covariances: Vec::new(),
            train_meta: TrainMeta {
                rng_seed,
                ..TrainMeta::default()
            },
        })
    }

    pub fn is_initialized(&self) -> bool {
        !self.mixture_weights.is_empty()
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        let mut out = self.mixture_weights.clone();
        out.extend_from_slice(&self.means);
        out.extend_from_slice(&self.covariances);
        out
    }

    fn mean_of(&self, c: usize) -> &[f64] {
        let d = self.data_dim;
        &self.means[c * d..(c + 1) * d]
    }

    fn cov_of(&self, c: usize) -> DMatrix<f64> {
        let d = self.data_dim;
        DMatrix::from_row_slice(d, d, &self.covariances[c * d * d..(c + 1) * d * d])
    }

    fn set_cov(&mut self, c: usize, cov: &DMatrix<f64>) {
        let d = self.data_dim;
        for row in 0..d {
            for col in 0..d {
                self.covariances[c * d * d + row * d + col] = cov[(row, col)];
            }
        }
    }

    /// Symmetrize and floor the eigenvalues at `cov_floor`.
    fn floor_cov(&self, cov: &DMatrix<f64>) -> DMatrix<f64> {
        let sym = (cov + cov.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let floored = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&l| l.max(self.cov_floor)),
        );
        let v = &eig.eigenvectors;
        let rebuilt = v * DMatrix::from_diagonal(&floored) * v.transpose();
        (&rebuilt + rebuilt.transpose()) * 0.5
    }

    /// Per-component Cholesky factors and log-normalizers for the E step.
    fn factorize(&self) -> Result<Vec<CompFactor>> {
        let d = self.data_dim;
        let mut out = Vec::with_capacity(self.components);
        for c in 0..self.components {
            let cov = self.cov_of(c);
            let chol = match cov.clone().cholesky() {
                Some(ch) => ch,
                None => self
                    .floor_cov(&cov)
                    .cholesky()
                    .ok_or_else(|| Error::Conditioning(format!("component {c} covariance")))?,
            };
            let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            out.push(CompFactor {
                log_pi: self.mixture_weights[c].ln(),
                mean: DVector::from_row_slice(self.mean_of(c)),
                chol,
                log_norm: -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det),
            });
        }
        Ok(out)
    }

    /// Responsibilities and weighted log-likelihood under current parameters.
    fn e_step(&self, points: &[Vec<f64>], norm_weights: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let comps = self.factorize()?;
        let mut resp = vec![vec![0.0; self.components]; points.len()];
        let mut ll = 0.0;
        let mut logp = vec![0.0; self.components];
        for (i, x) in points.iter().enumerate() {
            let xv = DVector::from_row_slice(x);
            for (c, comp) in comps.iter().enumerate() {
                let diff = &xv - &comp.mean;
                let sol = comp.chol.l().solve_lower_triangular(&diff).expect(
                    "lower-triangular solve with positive diagonal",
                );
                logp[c] = comp.log_pi + comp.log_norm - 0.5 * sol.norm_squared();
            }
            let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(Error::Conditioning(format!(
                    "log-density underflow at point {i}"
                )));
            }
            let lse = max + logp.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            for (r, &lp) in resp[i].iter_mut().zip(&logp) {
                *r = (lp - lse).exp();
            }
            ll += norm_weights[i] * lse;
        }
        Ok((ll, resp))
    }

    fn m_step(&mut self, points: &[Vec<f64>], norm_weights: &[f64], resp: &[Vec<f64>]) {
        let d = self.data_dim;
        for c in 0..self.components {
            let nc: f64 = points
                .iter()
                .enumerate()
                .map(|(i, _)| norm_weights[i] * resp[i][c])
                .sum();
            self.mixture_weights[c] = nc;
            if nc < 1e-300 {
                // Dead component: leave its shape parameters untouched.
                continue;
            }
            let mut mean = vec![0.0; d];
            for (i, x) in points.iter().enumerate() {
                let g = norm_weights[i] * resp[i][c] / nc;
                for (m, &v) in mean.iter_mut().zip(x) {
                    *m += g * v;
                }
            }
            let mut cov = DMatrix::<f64>::zeros(d, d);
            for (i, x) in points.iter().enumerate() {
                let g = norm_weights[i] * resp[i][c] / nc;
                for row in 0..d {
                    let dr = x[row] - mean[row];
                    for col in 0..d {
                        cov[(row, col)] += g * dr * (x[col] - mean[col]);
                    }
                }
            }
            let cov = self.floor_cov(&cov);
            self.means[c * d..(c + 1) * d].copy_from_slice(&mean);
            self.set_cov(c, &cov);
        }
    }

    /// Weighted k-means++ seeding: the first mean is drawn proportionally to
    /// the weights, later means proportionally to weight times squared
    /// distance to the nearest chosen mean.
    fn initialize(&mut self, points: &[Vec<f64>], norm_weights: &[f64], rng: &mut ChaCha8Rng) {
        let d = self.data_dim;
        let c_eff = self.components.min(points.len());
        self.components = c_eff;

        let mut centers: Vec<usize> = Vec::with_capacity(c_eff);
        let first = WeightedIndex::new(norm_weights)
            .expect("validated positive-sum weights")
            .sample(rng);
        centers.push(first);
        let mut dist2: Vec<f64> = points
            .iter()
            .map(|x| sq_dist(x, &points[first]))
            .collect();
        while centers.len() < c_eff {
            let scores: Vec<f64> = dist2
                .iter()
                .zip(norm_weights)
                .map(|(&d2, &w)| w * d2)
                .collect();
            let next = match WeightedIndex::new(&scores) {
                Ok(dist) => dist.sample(rng),
                // All remaining mass sits on already-chosen points.
                Err(_) => WeightedIndex::new(norm_weights).unwrap().sample(rng),
            };
            centers.push(next);
            for (d2, x) in dist2.iter_mut().zip(points) {
                *d2 = d2.min(sq_dist(x, &points[next]));
            }
        }

        // Global weighted covariance as the common initial shape.
        let mut mean = vec![0.0; d];
        for (x, &w) in points.iter().zip(norm_weights) {
            for (m, &v) in mean.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for (x, &w) in points.iter().zip(norm_weights) {
            for row in 0..d {
                for col in 0..d {
                    cov[(row, col)] += w * (x[row] - mean[row]) * (x[col] - mean[col]);
                }
            }
        }
        let cov = self.floor_cov(&cov);

        self.mixture_weights = vec![1.0 / c_eff as f64; c_eff];
        self.means = centers
            .iter()
            .flat_map(|&i| points[i].iter().copied())
            .collect();
        self.covariances = vec![0.0; c_eff * d * d];
        for c in 0..c_eff {
            self.set_cov(c, &cov);
        }
    }
}

struct CompFactor {
    log_pi: f64,
    mean: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    log_norm: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl LatentModel for GmmModel {
    fn data_dim(&self) -> usize {
        self.data_dim
    }

    fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    fn fit_with_weights(
        &mut self,
        points: &[Vec<f64>],
        weights: &[f64],
        config: &TrainingConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        config.validate()?;
        validate_fit_inputs(points, weights, self.data_dim)?;
        let total: f64 = weights.iter().sum();
        let norm: Vec<f64> = weights.iter().map(|w| w / total).collect();

        if !self.is_initialized() {
            self.initialize(points, &norm, rng);
        }

        let (mut ll, mut resp) = self.e_step(points, &norm)?;
        for epoch in 0..config.epochs {
            self.m_step(points, &norm, &resp);
            let (next_ll, next_resp) = self.e_step(points, &norm)?;
            if !next_ll.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            let delta = (next_ll - ll).abs();
            ll = next_ll;
            resp = next_resp;
            self.train_meta.epochs_seen += 1;
            if delta < self.ll_tol {
                break;
            }
        }
        let loss = -ll;
        self.train_meta.last_loss = Some(loss);
        Ok(loss)
    }

    fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.data_dim {
            return Err(Error::DimensionMismatch {
                expected: self.data_dim,
                got: x.len(),
            });
        }
        Ok(x.to_vec())
    }

    fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(Error::DimensionMismatch {
                expected: self.latent_dim,
                got: z.len(),
            });
        }
        Ok(z.to_vec())
    }

    fn sample_latent(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::invalid_parameter("n", "must be >= 1"));
        }
        if !self.is_initialized() {
            return Err(Error::invalid_parameter("model", "GMM has not been trained"));
        }
        let comp_dist = WeightedIndex::new(&self.mixture_weights)
            .map_err(|e| Error::invalid_parameter("mixture_weights", e.to_string()))?;
        let mut chols = Vec::with_capacity(self.components);
        for c in 0..self.components {
            let cov = self.cov_of(c);
            let chol = cov
                .clone()
                .cholesky()
                .or_else(|| self.floor_cov(&cov).cholesky())
                .ok_or_else(|| Error::Conditioning(format!("component {c} covariance")))?;
            chols.push(chol);
        }
        let d = self.data_dim;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let c = comp_dist.sample(rng);
            let eps = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let z = DVector::from_row_slice(self.mean_of(c)) + chols[c].l() * eps;
            out.push(z.iter().copied().collect());
        }
        Ok(out)
    }
}
