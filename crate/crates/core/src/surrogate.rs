//! Gaussian-process regression over latent vectors and expected-improvement
//! candidate proposal.
//!
//! The kernel is an isotropic squared exponential over inputs standardized
//! per dimension by the training set's mean and std. Hyperparameters are
//! either fixed or selected from a 5x5 log grid (lengthscale in
//! `10^{-2..2}`, signal std in `10^{-1..1}`) by maximum log marginal
//! likelihood. Batch proposals are sequential-greedy EI with a constant-liar
//! fantasy update: each accepted point is appended to the model with the
//! incumbent best as its target.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;

use crate::error::Error;
use crate::Result;

const MAX_JITTER: f64 = 1e-4;
const MIN_NOISE_VARIANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperSpec {
    Fixed(GpHyper),
    /// Grid-search lengthscale and signal variance; noise stays fixed.
    Auto { noise_variance: f64 },
}

impl Default for HyperSpec {
    fn default() -> Self {
        HyperSpec::Auto {
            noise_variance: MIN_NOISE_VARIANCE,
        }
    }
}

/// An immutable fitted GP; predictions and EI evaluations are read-only.
#[derive(Debug, Clone)]
pub struct GpSurrogate {
    feat_mean: Vec<f64>,
    feat_std: Vec<f64>,
    /// Standardized inputs, one row per training point.
    z: DMatrix<f64>,
    y: DVector<f64>,
    hyper: GpHyper,
    jitter: f64,
    /// Lower Cholesky factor of `K + (noise + jitter) I`.
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    log_marginal: f64,
}

fn kernel_value(hyper: &GpHyper, a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    hyper.signal_variance * (-sq / (2.0 * hyper.lengthscale * hyper.lengthscale)).exp()
}

fn factorize(
    z: &DMatrix<f64>,
    hyper: &GpHyper,
) -> Result<(DMatrix<f64>, f64)> {
    let n = z.nrows();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_value(hyper, z.row(i).transpose().as_slice(), z.row(j).transpose().as_slice());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    let mut jitter = 0.0;
    loop {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += hyper.noise_variance + jitter;
        }
        if let Some(chol) = kj.cholesky() {
            return Ok((chol.unpack(), jitter));
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 10.0 };
        if jitter > MAX_JITTER {
            return Err(Error::Conditioning(format!(
                "kernel matrix not positive definite after jitter {MAX_JITTER}"
            )));
        }
    }
}

fn solve_lower(l: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(rhs)
        .expect("Cholesky factor has positive diagonal")
}

fn solve_chol(l: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let fwd = solve_lower(l, rhs);
    l.transpose()
        .solve_upper_triangular(&fwd)
        .expect("Cholesky factor has positive diagonal")
}

fn log_marginal(l: &DMatrix<f64>, y: &DVector<f64>, alpha: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    -0.5 * y.dot(alpha)
        - l.diagonal().iter().map(|v| v.ln()).sum::<f64>()
        - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

/// Fit a GP to latent inputs and scalar targets.
pub fn gp_fit(inputs: &[Vec<f64>], targets: &[f64], hyper: HyperSpec) -> Result<GpSurrogate> {
    if inputs.len() < 2 {
        return Err(Error::invalid_parameter(
            "inputs",
            format!("GP fit needs >= 2 points, got {}", inputs.len()),
        ));
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    let dim = inputs[0].len();
    for p in inputs {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GP targets"));
    }

    // Per-dimension standardization; constant dimensions pass through.
    let n = inputs.len() as f64;
    let mut feat_mean = vec![0.0; dim];
    for p in inputs {
        for (m, &v) in feat_mean.iter_mut().zip(p) {
            *m += v / n;
        }
    }
    let mut feat_std = vec![0.0; dim];
    for p in inputs {
        for ((s, &v), &m) in feat_std.iter_mut().zip(p).zip(&feat_mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    for s in &mut feat_std {
        *s = s.sqrt();
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }
    let z = DMatrix::from_fn(inputs.len(), dim, |i, j| {
        (inputs[i][j] - feat_mean[j]) / feat_std[j]
    });
    let y = DVector::from_row_slice(targets);

    let fit_one = |hyper: GpHyper| -> Result<GpSurrogate> {
        let (chol_l, jitter) = factorize(&z, &hyper)?;
        let alpha = solve_chol(&chol_l, &y);
        let lml = log_marginal(&chol_l, &y, &alpha);
        Ok(GpSurrogate {
            feat_mean: feat_mean.clone(),
            feat_std: feat_std.clone(),
            z: z.clone(),
            y: y.clone(),
            hyper,
            jitter,
            chol_l,
            alpha,
            log_marginal: lml,
        })
    };

    match hyper {
        HyperSpec::Fixed(h) => {
            if !(h.lengthscale > 0.0) || !(h.signal_variance > 0.0) {
                return Err(Error::invalid_parameter(
                    "hyper",
                    "lengthscale and signal variance must be > 0",
                ));
            }
            if h.noise_variance < MIN_NOISE_VARIANCE {
                return Err(Error::invalid_parameter(
                    "noise_variance",
                    format!("must be >= {MIN_NOISE_VARIANCE}"),
                ));
            }
            fit_one(h)
        }
        HyperSpec::Auto { noise_variance } => {
            if noise_variance < MIN_NOISE_VARIANCE {
                return Err(Error::invalid_parameter(
                    "noise_variance",
                    format!("must be >= {MIN_NOISE_VARIANCE}"),
                ));
            }
            let mut best: Option<GpSurrogate> = None;
            for ls_exp in [-2.0f64, -1.0, 0.0, 1.0, 2.0] {
                for sf_exp in [-1.0f64, -0.5, 0.0, 0.5, 1.0] {
                    let sf = 10f64.powf(sf_exp);
                    let candidate = fit_one(GpHyper {
                        lengthscale: 10f64.powf(ls_exp),
                        signal_variance: sf * sf,
                        noise_variance,
                    });
                    // Skip grid cells that fail to factorize; the grid as a
                    // whole fails only if every cell does.
                    if let Ok(model) = candidate {
                        let better = best
                            .as_ref()
                            .map(|b| model.log_marginal > b.log_marginal)
                            .unwrap_or(true);
                        if better {
                            best = Some(model);
                        }
                    }
                }
            }
            best.ok_or_else(|| {
                Error::Conditioning("no hyperparameter grid cell factorized".into())
            })
        }
    }
}

impl GpSurrogate {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn log_marginal(&self) -> f64 {
        self.log_marginal
    }

    pub fn targets(&self) -> Vec<f64> {
        self.y.iter().copied().collect()
    }

    /// Residual of the linear system the weight vector solves,
    /// `|(K + noise I) alpha - y|`; used to verify conditioning.
    pub fn solve_residual(&self) -> f64 {
        let k = &self.chol_l * self.chol_l.transpose();
        (&k * &self.alpha - &self.y).norm()
    }

    fn standardize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x.iter()
            .zip(&self.feat_mean)
            .zip(&self.feat_std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect())
    }

    /// Posterior mean and standard deviation at a single point.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        let zq = self.standardize(x)?;
        let n = self.len();
        let mut kstar = DVector::<f64>::zeros(n);
        for i in 0..n {
            kstar[i] = kernel_value(
                &self.hyper,
                self.z.row(i).transpose().as_slice(),
                &zq,
            );
        }
        let mean = kstar.dot(&self.alpha);
        let v = solve_lower(&self.chol_l, &kstar);
        let var = (self.hyper.signal_variance - v.norm_squared()).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Posterior at many points; one triangular solve over the whole batch.
    pub fn predict_many(&self, xs: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
        let n = self.len();
        let q = xs.len();
        let mut kstar = DMatrix::<f64>::zeros(n, q);
        for (c, x) in xs.iter().enumerate() {
            let zq = self.standardize(x)?;
            for i in 0..n {
                kstar[(i, c)] = kernel_value(
                    &self.hyper,
                    self.z.row(i).transpose().as_slice(),
                    &zq,
                );
            }
        }
        let means = kstar.transpose() * &self.alpha;
        let v = self
            .chol_l
            .solve_lower_triangular(&kstar)
            .expect("Cholesky factor has positive diagonal");
        Ok((0..q)
            .map(|c| {
                let var = (self.hyper.signal_variance - v.column(c).norm_squared()).max(0.0);
                (means[c], var.sqrt())
            })
            .collect())
    }

    /// Extend the model with one observation without refactorizing from
    /// scratch: appends a row to the Cholesky factor in `O(n^2)`.
    pub fn with_appended(&self, x: &[f64], target: f64) -> Result<GpSurrogate> {
        let zq = self.standardize(x)?;
        let n = self.len();
        let mut kstar = DVector::<f64>::zeros(n);
        for i in 0..n {
            kstar[i] = kernel_value(
                &self.hyper,
                self.z.row(i).transpose().as_slice(),
                &zq,
            );
        }
        let b = solve_lower(&self.chol_l, &kstar);
        let diag = self.hyper.signal_variance + self.hyper.noise_variance + self.jitter;
        let gamma2 = diag - b.norm_squared();
        // A near-duplicate of an existing row can push gamma^2 to the floor.
        let gamma = gamma2.max(1e-12).sqrt();

        let mut chol_l = DMatrix::<f64>::zeros(n + 1, n + 1);
        chol_l.view_mut((0, 0), (n, n)).copy_from(&self.chol_l);
        for i in 0..n {
            chol_l[(n, i)] = b[i];
        }
        chol_l[(n, n)] = gamma;

        let mut z = DMatrix::<f64>::zeros(n + 1, self.dim());
        z.view_mut((0, 0), (n, self.dim())).copy_from(&self.z);
        for j in 0..self.dim() {
            z[(n, j)] = zq[j];
        }
        let mut y = DVector::<f64>::zeros(n + 1);
        y.view_mut((0, 0), (n, 1)).copy_from(&self.y);
        y[n] = target;

        let alpha = solve_chol(&chol_l, &y);
        let lml = log_marginal(&chol_l, &y, &alpha);
        Ok(GpSurrogate {
            feat_mean: self.feat_mean.clone(),
            feat_std: self.feat_std.clone(),
            z,
            y,
            hyper: self.hyper,
            jitter: self.jitter,
            chol_l,
            alpha,
            log_marginal: lml,
        })
    }
}

fn normal_cdf(u: f64) -> f64 {
    0.5 * (1.0 + erf(u / std::f64::consts::SQRT_2))
}

fn normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement of a Gaussian posterior over the incumbent `best`
/// (maximization). At `std = 0` this degenerates to `max(mean - best, 0)`.
pub fn expected_improvement(mean: f64, std: f64, best: f64) -> f64 {
    if std <= 0.0 {
        return (mean - best).max(0.0);
    }
    let u = (mean - best) / std;
    ((mean - best) * normal_cdf(u) + std * normal_pdf(u)).max(0.0)
}

/// Per-dimension proposal box: training range extended by `margin` times the
/// range on each side. Degenerate dimensions get a unit half-width.
pub fn bounds_from_latents(latents: &[Vec<f64>], margin: f64) -> Result<Vec<(f64, f64)>> {
    let first = latents.first().ok_or(Error::EmptyInput("latents"))?;
    let dim = first.len();
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for z in latents {
        if z.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: z.len(),
            });
        }
        for (b, &v) in bounds.iter_mut().zip(z) {
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    Ok(bounds
        .into_iter()
        .map(|(lo, hi)| {
            let range = hi - lo;
            if range > 0.0 {
                (lo - margin * range, hi + margin * range)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        })
        .collect())
}

/// Propose `q` latent points by sequential-greedy EI maximization.
///
/// Each proposal maximizes EI over 1024 random starts followed by 50
/// coordinate-ascent refinement sweeps, then the model is fantasy-updated
/// with the incumbent best as the new point's target (constant liar).
pub fn propose_batch(
    model: &GpSurrogate,
    bounds: &[(f64, f64)],
    q: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    if q == 0 {
        return Err(Error::invalid_parameter("q", "must be >= 1"));
    }
    if bounds.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: bounds.len(),
        });
    }
    for &(lo, hi) in bounds {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::invalid_parameter(
                "bounds",
                format!("degenerate interval [{lo}, {hi}]"),
            ));
        }
    }

    const STARTS: usize = 1024;
    const REFINE_STEPS: usize = 50;

    let best = model
        .targets()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut work = model.clone();
    let mut proposals = Vec::with_capacity(q);
    for _ in 0..q {
        let starts: Vec<Vec<f64>> = (0..STARTS)
            .map(|_| {
                bounds
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect()
            })
            .collect();
        let posts = work.predict_many(&starts)?;
        let (mut best_idx, mut best_ei) = (0usize, f64::NEG_INFINITY);
        for (i, &(mean, std)) in posts.iter().enumerate() {
            let ei = expected_improvement(mean, std, best);
            if ei > best_ei {
                best_ei = ei;
                best_idx = i;
            }
        }
        let mut point = starts[best_idx].clone();
        let mut point_ei = best_ei;

        // Greedy coordinate ascent with a shrinking step.
        for step in 0..REFINE_STEPS {
            let scale = 0.9f64.powi(step as i32);
            for (j, &(lo, hi)) in bounds.iter().enumerate() {
                let delta = (hi - lo) * 0.1 * scale;
                for dir in [1.0, -1.0] {
                    let mut cand = point.clone();
                    cand[j] = (cand[j] + dir * delta).clamp(lo, hi);
                    let (mean, std) = work.predict(&cand)?;
                    let ei = expected_improvement(mean, std, best);
                    if ei > point_ei {
                        point_ei = ei;
                        point = cand;
                        break;
                    }
                }
            }
        }
        work = work.with_appended(&point, best)?;
        proposals.push(point);
    }
    Ok(proposals)
}
