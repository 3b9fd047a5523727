//! Per-iteration distribution statistics and diversity measures.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pareto::{dominates, ObjectiveVector};
use crate::Result;

/// Statistics of one iteration's model-sample snapshot. Objectives are
/// reported in oriented (larger-is-better) form, one entry per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub objective_mean: Vec<f64>,
    pub objective_top10_mean: Vec<f64>,
    pub objective_std: Vec<f64>,
    /// Mean pairwise distance over the snapshot.
    pub diversity: f64,
    pub sample_size: usize,
}

/// Distance used by [`diversity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DiversityMetric {
    Euclidean,
    /// Jaccard distance on vectors binarized per dimension at the given
    /// thresholds (conventionally the initial dataset's medians).
    JaccardBinarized { thresholds: Vec<f64> },
}

/// Mean and top-10% mean (the mean of the `ceil(0.1 n)` largest values).
pub fn summary(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput("summary values"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let top = n.div_ceil(10);
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let top_mean = sorted[..top].iter().sum::<f64>() / top as f64;
    Ok((mean, top_mean))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn jaccard_binarized(a: &[f64], b: &[f64], thresholds: &[f64]) -> f64 {
    let mut intersection = 0usize;
    let mut union = 0usize;
    for ((&x, &y), &t) in a.iter().zip(b).zip(thresholds) {
        let (xa, yb) = (x > t, y > t);
        if xa && yb {
            intersection += 1;
        }
        if xa || yb {
            union += 1;
        }
    }
    if union == 0 {
        0.0 // both vectors all-off: identical, distance zero
    } else {
        1.0 - intersection as f64 / union as f64
    }
}

/// Mean distance over all `n(n-1)/2` unordered pairs.
pub fn diversity(points: &[Vec<f64>], metric: &DiversityMetric) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid_parameter(
            "points",
            format!("diversity needs >= 2 points, got {}", points.len()),
        ));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    if let DiversityMetric::JaccardBinarized { thresholds } = metric {
        if thresholds.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: thresholds.len(),
            });
        }
    }
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += match metric {
                DiversityMetric::Euclidean => euclidean(&points[i], &points[j]),
                DiversityMetric::JaccardBinarized { thresholds } => {
                    jaccard_binarized(&points[i], &points[j], thresholds)
                }
            };
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Exact area dominated by a two-objective front relative to `reference`.
///
/// Every front point must dominate the reference point.
pub fn hypervolume_2d(front: &[ObjectiveVector], reference: &ObjectiveVector) -> Result<f64> {
    if front.is_empty() {
        return Err(Error::EmptyInput("front"));
    }
    if reference.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: reference.len(),
        });
    }
    for p in front {
        if !dominates(p, reference)? {
            return Err(Error::invalid_parameter(
                "front",
                format!("point {:?} does not dominate the reference", p.values()),
            ));
        }
    }
    // Sweep right-to-left; each point contributes the strip above the highest
    // y seen so far.
    let mut order: Vec<usize> = (0..front.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (front[i].values(), front[j].values());
        b[0].partial_cmp(&a[0])
            .unwrap()
            .then(b[1].partial_cmp(&a[1]).unwrap())
    });
    let (rx, ry) = (reference.values()[0], reference.values()[1]);
    let mut area = 0.0;
    let mut best_y = ry;
    for &i in &order {
        let (x, y) = (front[i].values()[0], front[i].values()[1]);
        if y > best_y {
            area += (x - rx) * (y - best_y);
            best_y = y;
        }
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn summary_ten_values() {
        let values: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let (mean, top) = summary(&values).unwrap();
        assert!((mean - 5.5).abs() < 1e-12);
        assert_eq!(top, 10.0);
    }

    #[test]
    fn summary_constant_list() {
        let (mean, top) = summary(&[2.5; 7]).unwrap();
        assert_eq!(mean, 2.5);
        assert_eq!(top, 2.5);
    }

    #[test]
    fn summary_matches_sort_based_recomputation() {
        use rand::prelude::*;
        let mut rng = crate::rng::stream(5, 0, crate::rng::StreamRole::Stats);
        let values: Vec<f64> = (0..137).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();
        let (mean, top) = summary(&values).unwrap();

        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = (0.1 * values.len() as f64).ceil() as usize;
        let expect_top: f64 =
            sorted[sorted.len() - k..].iter().sum::<f64>() / k as f64;
        let expect_mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        assert!((mean - expect_mean).abs() < 1e-12);
        assert!((top - expect_top).abs() < 1e-12);
    }

    #[test]
    fn summary_rejects_empty() {
        assert!(summary(&[]).is_err());
    }

    #[test]
    fn diversity_identical_points_is_zero() {
        let pts = vec![vec![1.0, 2.0]; 5];
        assert_eq!(diversity(&pts, &DiversityMetric::Euclidean).unwrap(), 0.0);
    }

    #[test]
    fn diversity_two_points() {
        let pts = vec![vec![0.0, 0.0], vec![0.0, 3.0]];
        assert_eq!(diversity(&pts, &DiversityMetric::Euclidean).unwrap(), 3.0);
    }

    #[test]
    fn diversity_rejects_single_point() {
        assert!(diversity(&[vec![1.0]], &DiversityMetric::Euclidean).is_err());
    }

    #[test]
    fn diversity_translation_invariant() {
        use rand::prelude::*;
        let mut rng = crate::rng::stream(9, 0, crate::rng::StreamRole::Stats);
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| p.iter().map(|x| x + 17.0).collect())
            .collect();
        let a = diversity(&pts, &DiversityMetric::Euclidean).unwrap();
        let b = diversity(&shifted, &DiversityMetric::Euclidean).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn jaccard_binarized_basics() {
        let metric = DiversityMetric::JaccardBinarized {
            thresholds: vec![0.5, 0.5],
        };
        // (1,1) vs (1,0): intersection 1, union 2 -> distance 0.5
        let pts = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        assert!((diversity(&pts, &metric).unwrap() - 0.5).abs() < 1e-12);
        // both all-off
        let pts = vec![vec![0.0, 0.0], vec![0.1, 0.2]];
        assert_eq!(diversity(&pts, &metric).unwrap(), 0.0);
    }

    #[test]
    fn hypervolume_unit_box() {
        let hv = hypervolume_2d(&[ov(&[1.0, 1.0])], &ov(&[0.0, 0.0])).unwrap();
        assert_eq!(hv, 1.0);
    }

    #[test]
    fn hypervolume_union_of_boxes() {
        let hv = hypervolume_2d(&[ov(&[2.0, 1.0]), ov(&[1.0, 2.0])], &ov(&[0.0, 0.0])).unwrap();
        assert_eq!(hv, 3.0);
    }

    #[test]
    fn hypervolume_ignores_dominated_point() {
        let base = hypervolume_2d(&[ov(&[2.0, 1.0]), ov(&[1.0, 2.0])], &ov(&[0.0, 0.0])).unwrap();
        let with_dominated = hypervolume_2d(
            &[ov(&[2.0, 1.0]), ov(&[1.0, 2.0]), ov(&[1.0, 1.0])],
            &ov(&[0.0, 0.0]),
        )
        .unwrap();
        assert_eq!(base, with_dominated);
    }

    #[test]
    fn hypervolume_rejects_nondominating_point() {
        assert!(hypervolume_2d(&[ov(&[0.0, 0.0])], &ov(&[0.0, 0.0])).is_err());
        assert!(hypervolume_2d(&[ov(&[-1.0, 2.0])], &ov(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn hypervolume_monotone_under_superset() {
        let small = hypervolume_2d(&[ov(&[2.0, 1.0])], &ov(&[0.0, 0.0])).unwrap();
        let large =
            hypervolume_2d(&[ov(&[2.0, 1.0]), ov(&[1.0, 2.0])], &ov(&[0.0, 0.0])).unwrap();
        assert!(large >= small);
    }
}
