//! Objective specification, evaluation dispatch, orientation, and
//! scalarization.
//!
//! Objectives are declared with their natural sense (maximize or minimize)
//! and evaluated in raw form; [`orient`] flips minimize-sense entries so the
//! rest of the engine can uniformly treat larger as better. [`scalarize`]
//! collapses a raw vector into a single score for the Bayesian-optimization
//! strategy by standardizing each objective against the initial dataset and
//! summing with sign +1 for maximize and -1 for minimize.

mod builtin;
mod external;

pub use builtin::BuiltinObjective;
pub use external::{EvaluatorOptions, DEFAULT_TIMEOUT_SECS};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pareto::ObjectiveVector;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// +1 for maximize, -1 for minimize.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }
}

/// Where an objective's values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Builtin(BuiltinObjective),
    /// A subprocess speaking the line-delimited evaluator protocol; see
    /// [`external`] module docs. Specs sharing the exact same command are
    /// served by one process per batch, which must answer with one value per
    /// such spec, in declaration order.
    External { command: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub name: String,
    pub sense: Sense,
    pub source: Source,
}

/// Checks the spec list as a whole: nonempty, names unique.
pub fn validate_specs(specs: &[ObjectiveSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::EmptyInput("objective specs"));
    }
    for (i, a) in specs.iter().enumerate() {
        if a.name.is_empty() {
            return Err(Error::Config("objective name must be nonempty".into()));
        }
        for b in &specs[..i] {
            if a.name == b.name {
                return Err(Error::Config(format!(
                    "duplicate objective name `{}`",
                    a.name
                )));
            }
        }
        if let Source::External { command } = &a.source {
            if command.is_empty() {
                return Err(Error::Config(format!(
                    "objective `{}` has an empty external command",
                    a.name
                )));
            }
        }
    }
    Ok(())
}

/// Per-objective mean and standard deviation measured on the initial dataset.
/// Frozen at run start; never updated afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizationStats {
    /// Population mean/std per objective column. Rejects zero-variance
    /// columns since they cannot be standardized.
    pub fn from_raw(raw: &[Vec<f64>]) -> Result<Self> {
        let first = raw.first().ok_or(Error::EmptyInput("raw objectives"))?;
        let k = first.len();
        let n = raw.len() as f64;
        let mut means = vec![0.0; k];
        for row in raw {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            for (m, &v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; k];
        for row in raw {
            for ((s, &v), &m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for (j, s) in stds.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            if !(*s > 0.0) {
                return Err(Error::invalid_parameter(
                    "stds",
                    format!("objective column {j} has zero standard deviation"),
                ));
            }
        }
        Ok(StandardizationStats { means, stds })
    }
}

/// Evaluate every point under every spec, returning raw (un-oriented)
/// objective vectors in spec order.
///
/// Builtins are evaluated in-process. External specs are grouped by command:
/// each distinct command is launched once for the batch and must answer every
/// request id exactly once with as many values as specs bound to it.
pub fn evaluate_batch(
    specs: &[ObjectiveSpec],
    points: &[Vec<f64>],
    options: &EvaluatorOptions,
) -> Result<Vec<Vec<f64>>> {
    validate_specs(specs)?;
    let mut out = vec![vec![0.0; specs.len()]; points.len()];
    if points.is_empty() {
        return Ok(out);
    }

    // Builtins first.
    for (j, spec) in specs.iter().enumerate() {
        if let Source::Builtin(b) = &spec.source {
            for (i, x) in points.iter().enumerate() {
                let v = b.eval(x);
                if !v.is_finite() {
                    return Err(Error::evaluation(
                        Some(i),
                        format!("builtin `{}` returned a non-finite value", spec.name),
                    ));
                }
                out[i][j] = v;
            }
        }
    }

    // External specs, grouped by identical command.
    let mut groups: Vec<(&[String], Vec<usize>)> = Vec::new();
    for (j, spec) in specs.iter().enumerate() {
        if let Source::External { command } = &spec.source {
            match groups.iter_mut().find(|(c, _)| *c == command.as_slice()) {
                Some((_, cols)) => cols.push(j),
                None => groups.push((command, vec![j])),
            }
        }
    }
    for (command, cols) in groups {
        let values = external::evaluate(command, points, cols.len(), options)?;
        for (i, row) in values.iter().enumerate() {
            for (slot, &j) in cols.iter().enumerate() {
                let v = row[slot];
                if !v.is_finite() {
                    return Err(Error::evaluation(
                        Some(i),
                        format!("external evaluator returned a non-finite value for `{}`", specs[j].name),
                    ));
                }
                out[i][j] = v;
            }
        }
    }
    Ok(out)
}

/// Flip minimize-sense entries so every coordinate is maximize-oriented.
pub fn orient(raw: &[f64], specs: &[ObjectiveSpec]) -> Result<ObjectiveVector> {
    let senses: Vec<Sense> = specs.iter().map(|s| s.sense).collect();
    orient_with_senses(raw, &senses)
}

/// [`orient`] when only the senses are known (e.g. ranking a scored file).
pub fn orient_with_senses(raw: &[f64], senses: &[Sense]) -> Result<ObjectiveVector> {
    if raw.len() != senses.len() {
        return Err(Error::DimensionMismatch {
            expected: senses.len(),
            got: raw.len(),
        });
    }
    ObjectiveVector::new(
        raw.iter()
            .zip(senses)
            .map(|(&v, s)| s.sign() * v)
            .collect(),
    )
}

/// Signed standardized sum, to be maximized:
/// `sum_k sign_k * (raw_k - mean_k) / std_k`.
pub fn scalarize(raw: &[f64], specs: &[ObjectiveSpec], stats: &StandardizationStats) -> Result<f64> {
    if raw.len() != specs.len() || stats.means.len() != specs.len() {
        return Err(Error::DimensionMismatch {
            expected: specs.len(),
            got: raw.len().min(stats.means.len()),
        });
    }
    let mut s = 0.0;
    for (k, spec) in specs.iter().enumerate() {
        s += spec.sense.sign() * (raw[k] - stats.means[k]) / stats.stds[k];
    }
    Ok(s)
}
