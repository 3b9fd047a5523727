//! Engine for multi-objective latent-space optimization of generative models.
//!
//! The core loop ranks a dataset by Pareto fronts ([`pareto`]), converts front
//! ranks into per-sample training weights ([`weighting`]), retrains a pluggable
//! latent-variable model on the weighted data ([`genmodel`]), and harvests new
//! candidates from the model's latent space either by random sampling or by
//! expected-improvement Bayesian optimization ([`surrogate`]). The
//! [`orchestrator`] wires these pieces into a resumable iterative loop;
//! [`objectives`] defines objective functions (built-in suites plus an
//! external subprocess protocol) and [`metrics`] the per-iteration statistics.

// Negated comparisons like `!(k > 0.0)` are validation that rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod genmodel;
pub mod metrics;
pub mod objectives;
pub mod orchestrator;
pub mod pareto;
pub mod rng;
pub mod surrogate;
pub mod weighting;

pub use error::Error;

/// Shorthand for results carrying the crate error type.
pub type Result<T> = std::result::Result<T, Error>;
