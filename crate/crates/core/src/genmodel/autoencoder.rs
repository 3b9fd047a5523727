//! Small weighted-ELBO autoencoder trained by plain SGD.
//!
//! Architecture: dense encoder `d -> hidden -> (m, m)` producing a posterior
//! mean and log-variance, reparameterized sample `z = mu + exp(lv/2) * eps`
//! with one noise draw per example per pass, and dense decoder
//! `m -> hidden -> d`; tanh nonlinearities. The per-example loss is
//!
//! ```text
//! |x - decode(z)|^2 / (2 sigma_dec^2) + beta * KL(q(z|x) || N(0, I))
//! ```
//!
//! with the KL in closed form. Gradients are computed analytically
//! (see [`gradient_check`] for the finite-difference verification).

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::genmodel::{validate_fit_inputs, LatentModel, TrainMeta, TrainingConfig, WeightingMode};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    pub hidden_dim: usize,
    /// KL weight in the ELBO loss.
    pub beta: f64,
    /// Decoder observation scale; the reconstruction term is
    /// `|x - xhat|^2 / (2 sigma_dec^2)`.
    pub sigma_dec: f64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            latent_dim: 4,
            hidden_dim: 32,
            beta: 0.1,
            sigma_dec: 1.0,
        }
    }
}

/// Parameter arrays are row-major `W[out * in_dim + in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderModel {
    pub data_dim: usize,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub beta: f64,
    pub sigma_dec: f64,
    pub enc_w1: Vec<f64>,
    pub enc_b1: Vec<f64>,
    pub enc_w_mu: Vec<f64>,
    pub enc_b_mu: Vec<f64>,
    pub enc_w_logvar: Vec<f64>,
    pub enc_b_logvar: Vec<f64>,
    pub dec_w1: Vec<f64>,
    pub dec_b1: Vec<f64>,
    pub dec_w2: Vec<f64>,
    pub dec_b2: Vec<f64>,
    pub train_meta: TrainMeta,
}

/// Gradients in the same layout as the model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    arrays: [Vec<f64>; 10],
}

impl Gradients {
    fn zeros_like(model: &AutoencoderModel) -> Self {
        Gradients {
            arrays: model.param_arrays().map(|a| vec![0.0; a.len()]),
        }
    }

    pub fn flat(&self, mut idx: usize) -> f64 {
        for a in &self.arrays {
            if idx < a.len() {
                return a[idx];
            }
            idx -= a.len();
        }
        panic!("gradient index out of range");
    }

    fn is_finite(&self) -> bool {
        self.arrays.iter().flatten().all(|g| g.is_finite())
    }
}

fn matvec(w: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        out[r] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

fn matvec_t(w: &[f64], rows: usize, cols: usize, y: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for r in 0..rows {
        let row = &w[r * cols..(r + 1) * cols];
        for (o, &a) in out.iter_mut().zip(row) {
            *o += a * y[r];
        }
    }
}

fn add_outer(g: &mut [f64], dy: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &d) in dy.iter().enumerate() {
        let row = &mut g[r * cols..(r + 1) * cols];
        for (gr, &xv) in row.iter_mut().zip(x) {
            *gr += d * xv;
        }
    }
}

fn add_scaled(acc: &mut [f64], v: &[f64], s: f64) {
    for (a, &b) in acc.iter_mut().zip(v) {
        *a += s * b;
    }
}

struct Forward {
    h1: Vec<f64>,
    mu: Vec<f64>,
    logvar: Vec<f64>,
    z: Vec<f64>,
    h3: Vec<f64>,
    xhat: Vec<f64>,
    loss: f64,
}

impl AutoencoderModel {
    pub fn new(data_dim: usize, config: &AutoencoderConfig, rng: &mut ChaCha8Rng) -> Self {
        let (d, m, h) = (data_dim, config.latent_dim, config.hidden_dim);
        let mut init = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-0.1..0.1)).collect()
        };
        AutoencoderModel {
            data_dim: d,
            latent_dim: m,
            hidden_dim: h,
            beta: config.beta,
            sigma_dec: config.sigma_dec,
            enc_w1: init(h * d),
            enc_b1: init(h),
            enc_w_mu: init(m * h),
            enc_b_mu: init(m),
            enc_w_logvar: init(m * h),
            enc_b_logvar: init(m),
            dec_w1: init(h * m),
            dec_b1: init(h),
            dec_w2: init(d * h),
            dec_b2: init(d),
            train_meta: TrainMeta::default(),
        }
    }

    pub fn flat_parameters(&self) -> Vec<f64> {
        self.param_arrays().into_iter().flatten().copied().collect()
    }

    fn param_arrays(&self) -> [&Vec<f64>; 10] {
        [
            &self.enc_w1,
            &self.enc_b1,
            &self.enc_w_mu,
            &self.enc_b_mu,
            &self.enc_w_logvar,
            &self.enc_b_logvar,
            &self.dec_w1,
            &self.dec_b1,
            &self.dec_w2,
            &self.dec_b2,
        ]
    }

    fn param_arrays_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.enc_w1,
            &mut self.enc_b1,
            &mut self.enc_w_mu,
            &mut self.enc_b_mu,
            &mut self.enc_w_logvar,
            &mut self.enc_b_logvar,
            &mut self.dec_w1,
            &mut self.dec_b1,
            &mut self.dec_w2,
            &mut self.dec_b2,
        ]
    }

    pub fn num_parameters(&self) -> usize {
        self.param_arrays().iter().map(|a| a.len()).sum()
    }

    pub(crate) fn param_add(&mut self, mut idx: usize, delta: f64) {
        for a in self.param_arrays_mut() {
            if idx < a.len() {
                a[idx] += delta;
                return;
            }
            idx -= a.len();
        }
        panic!("parameter index out of range");
    }

    fn forward(&self, x: &[f64], eps: &[f64]) -> Forward {
        let (d, m, h) = (self.data_dim, self.latent_dim, self.hidden_dim);
        let mut a1 = vec![0.0; h];
        matvec(&self.enc_w1, h, d, x, &mut a1);
        for (a, &b) in a1.iter_mut().zip(&self.enc_b1) {
            *a = (*a + b).tanh();
        }
        let h1 = a1;
        let mut mu = vec![0.0; m];
        matvec(&self.enc_w_mu, m, h, &h1, &mut mu);
        add_scaled(&mut mu, &self.enc_b_mu, 1.0);
        let mut logvar = vec![0.0; m];
        matvec(&self.enc_w_logvar, m, h, &h1, &mut logvar);
        add_scaled(&mut logvar, &self.enc_b_logvar, 1.0);
        let z: Vec<f64> = mu
            .iter()
            .zip(&logvar)
            .zip(eps)
            .map(|((&mu_j, &lv_j), &e)| mu_j + (0.5 * lv_j).exp() * e)
            .collect();
        let mut a3 = vec![0.0; h];
        matvec(&self.dec_w1, h, m, &z, &mut a3);
        for (a, &b) in a3.iter_mut().zip(&self.dec_b1) {
            *a = (*a + b).tanh();
        }
        let h3 = a3;
        let mut xhat = vec![0.0; d];
        matvec(&self.dec_w2, d, h, &h3, &mut xhat);
        add_scaled(&mut xhat, &self.dec_b2, 1.0);

        let rec: f64 = x
            .iter()
            .zip(&xhat)
            .map(|(&xv, &xh)| (xv - xh) * (xv - xh))
            .sum::<f64>()
            / (2.0 * self.sigma_dec * self.sigma_dec);
        let kl: f64 = 0.5
            * mu.iter()
                .zip(&logvar)
                .map(|(&mu_j, &lv_j)| mu_j * mu_j + lv_j.exp() - lv_j - 1.0)
                .sum::<f64>();
        Forward {
            h1,
            mu,
            logvar,
            z,
            h3,
            xhat,
            loss: rec + self.beta * kl,
        }
    }

    /// Weighted loss `sum_i c_i * loss_i` given per-example noise.
    pub(crate) fn weighted_loss(
        &self,
        points: &[&[f64]],
        coeffs: &[f64],
        noise: &[Vec<f64>],
    ) -> f64 {
        points
            .iter()
            .zip(coeffs)
            .zip(noise)
            .map(|((x, &c), eps)| {
                if c == 0.0 {
                    0.0
                } else {
                    c * self.forward(x, eps).loss
                }
            })
            .sum()
    }

    /// Weighted loss plus its analytic gradient.
    pub(crate) fn weighted_loss_and_grad(
        &self,
        points: &[&[f64]],
        coeffs: &[f64],
        noise: &[Vec<f64>],
    ) -> (f64, Gradients) {
        let (d, m, h) = (self.data_dim, self.latent_dim, self.hidden_dim);
        let mut grads = Gradients::zeros_like(self);
        let mut total = 0.0;
        let sigma2 = self.sigma_dec * self.sigma_dec;

        for ((x, &c), eps) in points.iter().zip(coeffs).zip(noise) {
            if c == 0.0 {
                continue; // zero-weight examples contribute nothing
            }
            let f = self.forward(x, eps);
            total += c * f.loss;

            let dxhat: Vec<f64> = f
                .xhat
                .iter()
                .zip(*x)
                .map(|(&xh, &xv)| c * (xh - xv) / sigma2)
                .collect();
            let [g_w1, g_b1, g_wmu, g_bmu, g_wlv, g_blv, g_dw1, g_db1, g_dw2, g_db2] =
                &mut grads.arrays;
            add_outer(g_dw2, &dxhat, &f.h3);
            add_scaled(g_db2, &dxhat, 1.0);

            let mut dh3 = vec![0.0; h];
            matvec_t(&self.dec_w2, d, h, &dxhat, &mut dh3);
            let da3: Vec<f64> = dh3
                .iter()
                .zip(&f.h3)
                .map(|(&g, &t)| g * (1.0 - t * t))
                .collect();
            add_outer(g_dw1, &da3, &f.z);
            add_scaled(g_db1, &da3, 1.0);

            let mut dz = vec![0.0; m];
            matvec_t(&self.dec_w1, h, m, &da3, &mut dz);

            let dmu: Vec<f64> = dz
                .iter()
                .zip(&f.mu)
                .map(|(&g, &mu_j)| g + c * self.beta * mu_j)
                .collect();
            let dlv: Vec<f64> = dz
                .iter()
                .zip(&f.logvar)
                .zip(eps)
                .map(|((&g, &lv_j), &e)| {
                    g * 0.5 * (0.5 * lv_j).exp() * e + c * self.beta * 0.5 * (lv_j.exp() - 1.0)
                })
                .collect();
            add_outer(g_wmu, &dmu, &f.h1);
            add_scaled(g_bmu, &dmu, 1.0);
            add_outer(g_wlv, &dlv, &f.h1);
            add_scaled(g_blv, &dlv, 1.0);

            let mut dh1 = vec![0.0; h];
            matvec_t(&self.enc_w_mu, m, h, &dmu, &mut dh1);
            let mut dh1_lv = vec![0.0; h];
            matvec_t(&self.enc_w_logvar, m, h, &dlv, &mut dh1_lv);
            add_scaled(&mut dh1, &dh1_lv, 1.0);
            let da1: Vec<f64> = dh1
                .iter()
                .zip(&f.h1)
                .map(|(&g, &t)| g * (1.0 - t * t))
                .collect();
            add_outer(g_w1, &da1, x);
            add_scaled(g_b1, &da1, 1.0);
        }
        (total, grads)
    }

    fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (params, g) in self.param_arrays_mut().into_iter().zip(&grads.arrays) {
            for (p, &gv) in params.iter_mut().zip(g) {
                *p -= lr * gv;
            }
        }
    }
}

impl LatentModel for AutoencoderModel {
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
        let n = points.len();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let resample_dist = WeightedIndex::new(&probs)
            .map_err(|e| Error::invalid_parameter("weights", e.to_string()))?;

        let (m, b) = (self.latent_dim, config.batch_size);
        let steps = n.div_ceil(b);
        for epoch in 0..config.epochs {
            for _ in 0..steps {
                let indices: Vec<usize> = match config.weighting_mode {
                    WeightingMode::Resample => {
                        (0..b).map(|_| resample_dist.sample(rng)).collect()
                    }
                    WeightingMode::LossMultiplier => {
                        (0..b).map(|_| rng.random_range(0..n)).collect()
                    }
                };
                let noise: Vec<Vec<f64>> = (0..b)
                    .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                    .collect();
                let batch: Vec<&[f64]> = indices.iter().map(|&i| points[i].as_slice()).collect();
                let coeffs: Vec<f64> = match config.weighting_mode {
                    WeightingMode::Resample => vec![1.0 / b as f64; b],
                    WeightingMode::LossMultiplier => indices
                        .iter()
                        .map(|&i| n as f64 * probs[i] / b as f64)
                        .collect(),
                };
                let (loss, grads) = self.weighted_loss_and_grad(&batch, &coeffs, &noise);
                if !loss.is_finite() || !grads.is_finite() {
                    return Err(Error::Divergence { epoch });
                }
                self.apply_gradients(&grads, config.learning_rate);
            }
            self.train_meta.epochs_seen += 1;
        }

        // Report the full weighted objective with one fresh draw per example.
        let noise: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
        let loss = self.weighted_loss(&refs, &probs, &noise);
        if !loss.is_finite() {
            return Err(Error::Divergence {
                epoch: config.epochs,
            });
        }
        self.train_meta.last_loss = Some(loss);
        Ok(loss)
    }

    /// Posterior mean; deterministic.
    fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.data_dim {
            return Err(Error::DimensionMismatch {
                expected: self.data_dim,
                got: x.len(),
            });
        }
        let zero = vec![0.0; self.latent_dim];
        Ok(self.forward(x, &zero).mu)
    }

    fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(Error::DimensionMismatch {
                expected: self.latent_dim,
                got: z.len(),
            });
        }
        let (d, h) = (self.data_dim, self.hidden_dim);
        let mut a3 = vec![0.0; h];
        matvec(&self.dec_w1, h, self.latent_dim, z, &mut a3);
        for (a, &b) in a3.iter_mut().zip(&self.dec_b1) {
            *a = (*a + b).tanh();
        }
        let mut xhat = vec![0.0; d];
        matvec(&self.dec_w2, d, h, &a3, &mut xhat);
        add_scaled(&mut xhat, &self.dec_b2, 1.0);
        Ok(xhat)
    }

    /// Standard-normal prior draws.
    fn sample_latent(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::invalid_parameter("n", "must be >= 1"));
        }
        Ok((0..n)
            .map(|_| {
                (0..self.latent_dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect())
    }
}

/// Compare analytic gradients of the weighted loss against central finite
/// differences (step `1e-5`) at `>= 100` randomly chosen parameters; returns
/// the maximum guarded relative error
/// `|analytic - fd| / max(|analytic|, |fd|, 1e-3)`.
pub fn gradient_check(
    model: &AutoencoderModel,
    points: &[Vec<f64>],
    weights: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    validate_fit_inputs(points, weights, model.data_dim)?;
    let total: f64 = weights.iter().sum();
    let coeffs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let noise: Vec<Vec<f64>> = (0..points.len())
        .map(|_| {
            (0..model.latent_dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    let (_, grads) = model.weighted_loss_and_grad(&refs, &coeffs, &noise);

    let n_params = model.num_parameters();
    let n_checks = n_params.min(100);
    let coords = rand::seq::index::sample(rng, n_params, n_checks);

    let h = 1e-5;
    let mut work = model.clone();
    let mut max_rel: f64 = 0.0;
    for idx in coords {
        work.param_add(idx, h);
        let up = work.weighted_loss(&refs, &coeffs, &noise);
        work.param_add(idx, -2.0 * h);
        let down = work.weighted_loss(&refs, &coeffs, &noise);
        work.param_add(idx, h);
        let fd = (up - down) / (2.0 * h);
        let analytic = grads.flat(idx);
        let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-3);
        max_rel = max_rel.max(rel);
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamRole};

    fn sample_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, 0, StreamRole::Stats);
        (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect()
    }

    #[test]
    fn gradient_check_fresh_model() {
        let mut rng = stream(31, 0, StreamRole::ModelInit);
        let model = AutoencoderModel::new(6, &AutoencoderConfig::default(), &mut rng);
        let points = sample_points(24, 6, 32);
        let weights: Vec<f64> = (0..24).map(|i| 1.0 + (i % 3) as f64).collect();
        let err = gradient_check(&model, &points, &weights, &mut rng).unwrap();
        assert!(err <= 1e-4, "max relative error {err}");
    }

    #[test]
    fn gradient_check_trained_model() {
        let mut rng = stream(33, 0, StreamRole::ModelInit);
        let mut model = AutoencoderModel::new(4, &AutoencoderConfig::default(), &mut rng);
        let points = sample_points(40, 4, 34);
        let weights = vec![1.0; 40];
        let cfg = TrainingConfig {
            learning_rate: 0.01,
            ..TrainingConfig::default()
        }
        .with_epochs(50);
        model
            .fit_with_weights(&points, &weights, &cfg, &mut rng)
            .unwrap();
        let err = gradient_check(&model, &points, &weights, &mut rng).unwrap();
        assert!(err <= 1e-4, "max relative error {err}");
    }

    #[test]
    fn near_linear_regime_gradients_are_sharp() {
        // Scale all parameters down so every tanh stays in its linear range:
        // the loss is then essentially quadratic and central differences are
        // nearly exact.
        let mut rng = stream(35, 0, StreamRole::ModelInit);
        let mut model = AutoencoderModel::new(3, &AutoencoderConfig::default(), &mut rng);
        for arr in model.param_arrays_mut() {
            for v in arr.iter_mut() {
                *v *= 1e-3;
            }
        }
        let points = sample_points(16, 3, 36);
        let weights = vec![1.0; 16];
        let err = gradient_check(&model, &points, &weights, &mut rng).unwrap();
        assert!(err <= 1e-7, "max relative error {err}");
    }

    #[test]
    fn zero_weight_examples_contribute_zero_gradient() {
        let mut rng = stream(37, 0, StreamRole::ModelInit);
        let model = AutoencoderModel::new(3, &AutoencoderConfig::default(), &mut rng);
        let points = sample_points(10, 3, 38);
        let noise: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..4).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();

        let mut coeffs = vec![0.0; 10];
        coeffs[3] = 0.7;
        let (_, with_zeros) = model.weighted_loss_and_grad(&refs, &coeffs, &noise);
        let (_, only_three) =
            model.weighted_loss_and_grad(&refs[3..4], &coeffs[3..4], &noise[3..4].to_vec());
        for (a, b) in with_zeros.arrays.iter().zip(&only_three.arrays) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zeroed_encoder_maps_origin_to_origin() {
        let mut rng = stream(39, 0, StreamRole::ModelInit);
        let mut model = AutoencoderModel::new(5, &AutoencoderConfig::default(), &mut rng);
        model.enc_w1.fill(0.0);
        model.enc_b1.fill(0.0);
        model.enc_w_mu.fill(0.0);
        model.enc_b_mu.fill(0.0);
        model.enc_w_logvar.fill(0.0);
        model.enc_b_logvar.fill(0.0);
        let z = model.encode(&vec![0.0; 5]).unwrap();
        assert_eq!(z, vec![0.0; 4]);
    }

    #[test]
    fn overfits_a_single_repeated_point() {
        let mut rng = stream(41, 0, StreamRole::ModelInit);
        let mut model = AutoencoderModel::new(3, &AutoencoderConfig::default(), &mut rng);
        let x_star = vec![0.4, -0.3, 0.8];
        let points = vec![x_star.clone(); 16];
        let cfg = TrainingConfig {
            learning_rate: 0.05,
            batch_size: 16,
            epochs: 2000,
            weighting_mode: WeightingMode::Resample,
        };
        model
            .fit_with_weights(&points, &vec![1.0; 16], &cfg, &mut rng)
            .unwrap();
        let rec = model.decode(&model.encode(&x_star).unwrap()).unwrap();
        for (a, b) in rec.iter().zip(&x_star) {
            assert!((a - b).abs() < 1e-2, "reconstruction {rec:?} vs {x_star:?}");
        }
    }

    #[test]
    fn prior_samples_match_standard_normal_moments() {
        let mut rng = stream(43, 0, StreamRole::Stats);
        let model = AutoencoderModel::new(3, &AutoencoderConfig::default(), &mut rng);
        let n = 100_000;
        let samples = model.sample_latent(n, &mut rng).unwrap();
        for j in 0..model.latent_dim {
            let mean: f64 = samples.iter().map(|z| z[j]).sum::<f64>() / n as f64;
            let var: f64 =
                samples.iter().map(|z| (z[j] - mean) * (z[j] - mean)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.02, "dim {j} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "dim {j} var {var}");
        }
    }

    #[test]
    fn sample_latent_rejects_zero() {
        let mut rng = stream(44, 0, StreamRole::Stats);
        let model = AutoencoderModel::new(2, &AutoencoderConfig::default(), &mut rng);
        assert!(model.sample_latent(0, &mut rng).is_err());
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let points = sample_points(30, 4, 45);
        let weights: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 / 10.0).collect();
        let build = || {
            let mut rng = stream(46, 0, StreamRole::ModelInit);
            let mut m = AutoencoderModel::new(4, &AutoencoderConfig::default(), &mut rng);
            let mut train_rng = stream(46, 1, StreamRole::Retrain);
            let cfg = TrainingConfig::default().with_epochs(3);
            let loss = m
                .fit_with_weights(&points, &weights, &cfg, &mut train_rng)
                .unwrap();
            (m, loss)
        };
        let (a, la) = build();
        let (b, lb) = build();
        assert_eq!(a.flat_parameters(), b.flat_parameters());
        assert_eq!(la, lb);
    }

    #[test]
    fn doubling_weights_changes_nothing() {
        let points = sample_points(20, 3, 47);
        let weights: Vec<f64> = (0..20).map(|i| 0.25 + (i % 4) as f64).collect();
        let doubled: Vec<f64> = weights.iter().map(|w| 2.0 * w).collect();
        let run = |w: &[f64]| {
            let mut rng = stream(48, 0, StreamRole::ModelInit);
            let mut m = AutoencoderModel::new(3, &AutoencoderConfig::default(), &mut rng);
            let mut train_rng = stream(48, 1, StreamRole::Retrain);
            m.fit_with_weights(points.as_slice(), w, &TrainingConfig::default().with_epochs(5), &mut train_rng)
                .unwrap();
            m.flat_parameters()
        };
        assert_eq!(run(&weights), run(&doubled));
    }
}
