//! Pareto dominance, non-dominated sorting, and cumulative front ranks.
//!
//! A dataset is partitioned into successive Pareto fronts by repeatedly
//! peeling off the non-dominated set. Every point in front `j` then gets the
//! cumulative rank `|P_1| + ... + |P_{j-1}|`: the number of points that sit
//! in strictly better fronts. Front-1 members have rank 0 and lower ranks are
//! better. All objectives are oriented so that larger is better before they
//! enter this module.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A fixed-length vector of finite objective scores, all oriented to maximize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    /// Rejects NaN and infinities; empty vectors are allowed only transiently
    /// and rejected by the set-level operations.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective vector"));
        }
        Ok(ObjectiveVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordered Pareto fronts over a dataset plus per-point cumulative ranks.
///
/// The fronts are pairwise disjoint, cover every index, and list their
/// members in ascending index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPartition {
    fronts: Vec<Vec<usize>>,
    ranks: Vec<usize>,
}

impl FrontPartition {
    pub fn fronts(&self) -> &[Vec<usize>] {
        &self.fronts
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn num_points(&self) -> usize {
        self.ranks.len()
    }

    /// Index of the front containing point `i` (0-based).
    pub fn front_of(&self, i: usize) -> Result<usize> {
        if i >= self.ranks.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.ranks.len(),
            });
        }
        // Ranks are the prefix sums of front sizes, so the front index is
        // recoverable by scanning; fronts are few compared to points.
        let mut seen = 0usize;
        for (j, front) in self.fronts.iter().enumerate() {
            seen += front.len();
            if self.ranks[i] < seen {
                return Ok(j);
            }
        }
        unreachable!("partition covers all indices");
    }
}

/// True iff `a` is at least as good as `b` in every objective and strictly
/// better in at least one. A point never dominates an identical copy.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(dominates_unchecked(a.values(), b.values()))
}

pub(crate) fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly_better = true;
        }
    }
    strictly_better
}

fn validate_set(points: &[ObjectiveVector]) -> Result<usize> {
    let first = points
        .first()
        .ok_or(Error::EmptyInput("objective vector set"))?;
    let k = first.len();
    if k == 0 {
        return Err(Error::EmptyInput("objective vector entries"));
    }
    for p in points {
        if p.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: p.len(),
            });
        }
    }
    Ok(k)
}

/// Indices of points not dominated by any other point, in ascending order.
pub fn find_nondominated(points: &[ObjectiveVector]) -> Result<Vec<usize>> {
    validate_set(points)?;
    let mut result = Vec::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates_unchecked(q.values(), p.values()) {
                continue 'outer;
            }
        }
        result.push(i);
    }
    Ok(result)
}

/// Partition a dataset into successive Pareto fronts and assign cumulative
/// ranks.
///
/// Equivalent to repeatedly peeling the non-dominated set off the residual,
/// but implemented as a single sorted insertion pass: points are processed in
/// descending lexicographic objective order, so every potential dominator of
/// a point is placed before the point itself, and the point belongs to the
/// first front that contains none of its dominators (dominance is
/// transitive, so each earlier front would otherwise contain one too).
pub fn pareto_partition(points: &[ObjectiveVector]) -> Result<FrontPartition> {
    validate_set(points)?;
    let n = points.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        for (x, y) in points[i].values().iter().zip(points[j].values()) {
            match y.partial_cmp(x).expect("objective values are finite") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        i.cmp(&j)
    });

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let slot = fronts.iter().position(|front| {
            !front
                .iter()
                .any(|&j| dominates_unchecked(points[j].values(), points[i].values()))
        });
        match slot {
            Some(f) => fronts[f].push(i),
            None => fronts.push(vec![i]),
        }
    }

    let mut ranks = vec![0usize; n];
    let mut below = 0usize;
    for front in &mut fronts {
        front.sort_unstable();
        for &i in front.iter() {
            ranks[i] = below;
        }
        below += front.len();
    }
    Ok(FrontPartition { fronts, ranks })
}

/// Cumulative rank of point `i`: the total size of all fronts strictly better
/// than its own. Constant within a front; 0 on the first front.
pub fn rank_lookup(partition: &FrontPartition, i: usize) -> Result<usize> {
    partition
        .ranks
        .get(i)
        .copied()
        .ok_or(Error::IndexOutOfRange {
            index: i,
            len: partition.ranks.len(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    fn ovs(rows: &[&[f64]]) -> Vec<ObjectiveVector> {
        rows.iter().map(|r| ov(r)).collect()
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(ObjectiveVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ObjectiveVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dominates_basic_cases() {
        assert!(dominates(&ov(&[2.0, 2.0]), &ov(&[1.0, 1.0])).unwrap());
        // Identical points never dominate.
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
        // Incomparable pair.
        assert!(!dominates(&ov(&[2.0, 0.0]), &ov(&[1.0, 1.0])).unwrap());
        assert!(!dominates(&ov(&[1.0, 1.0]), &ov(&[2.0, 0.0])).unwrap());
        // Equal in one coordinate, better in the other, still dominates.
        assert!(dominates(&ov(&[2.0, 1.0]), &ov(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn dominates_length_mismatch() {
        assert!(matches!(
            dominates(&ov(&[1.0]), &ov(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nondominated_singleton() {
        assert_eq!(find_nondominated(&ovs(&[&[1.0, 2.0]])).unwrap(), vec![0]);
    }

    #[test]
    fn nondominated_hand_example() {
        // All dominance pairs enumerated by hand: only (1,1) is dominated.
        let pts = ovs(&[&[3.0, 1.0], &[1.0, 3.0], &[2.0, 2.0], &[1.0, 1.0]]);
        assert_eq!(find_nondominated(&pts).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn nondominated_empty_input() {
        assert!(matches!(
            find_nondominated(&[]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn partition_single_front_when_incomparable() {
        let pts = ovs(&[&[3.0, 0.0], &[2.0, 1.0], &[1.0, 2.0], &[0.0, 3.0]]);
        let part = pareto_partition(&pts).unwrap();
        assert_eq!(part.fronts(), &[vec![0, 1, 2, 3]]);
        assert_eq!(part.ranks(), &[0, 0, 0, 0]);
    }

    #[test]
    fn partition_hand_example() {
        let pts = ovs(&[&[3.0, 1.0], &[1.0, 3.0], &[2.0, 2.0], &[1.0, 1.0]]);
        let part = pareto_partition(&pts).unwrap();
        assert_eq!(part.fronts(), &[vec![0, 1, 2], vec![3]]);
        assert_eq!(part.ranks(), &[0, 0, 0, 3]);
    }

    #[test]
    fn partition_empty_input() {
        assert!(matches!(pareto_partition(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn rank_lookup_matches_prefix_sums() {
        let pts = ovs(&[
            &[5.0, 0.0],
            &[0.0, 5.0],
            &[4.0, 0.0],
            &[0.0, 4.0],
            &[3.0, 0.0],
        ]);
        let part = pareto_partition(&pts).unwrap();
        // Recompute ranks independently from front sizes.
        let mut expected = vec![0usize; pts.len()];
        let mut below = 0;
        for front in part.fronts() {
            for &i in front {
                expected[i] = below;
            }
            below += front.len();
        }
        for i in 0..pts.len() {
            assert_eq!(rank_lookup(&part, i).unwrap(), expected[i]);
        }
        assert!(matches!(
            rank_lookup(&part, pts.len()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn second_front_rank_is_first_front_size() {
        // 7 incomparable points plus one dominated point.
        let mut rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64, 7.0 - i as f64]).collect();
        rows.push(vec![-1.0, -1.0]);
        let pts: Vec<_> = rows
            .into_iter()
            .map(|r| ObjectiveVector::new(r).unwrap())
            .collect();
        let part = pareto_partition(&pts).unwrap();
        assert_eq!(rank_lookup(&part, 7).unwrap(), 7);
    }

    #[test]
    fn duplicates_share_front_and_rank() {
        let pts = ovs(&[&[2.0, 2.0], &[1.0, 1.0], &[2.0, 2.0]]);
        let part = pareto_partition(&pts).unwrap();
        assert_eq!(part.ranks()[0], part.ranks()[2]);
        assert_eq!(part.front_of(0).unwrap(), part.front_of(2).unwrap());
        assert_eq!(part.ranks()[1], 2);
    }

    #[test]
    fn dominated_addition_preserves_existing_ranks() {
        let base = ovs(&[&[3.0, 1.0], &[1.0, 3.0], &[2.0, 2.0], &[1.0, 1.0]]);
        let before = pareto_partition(&base).unwrap();
        let mut extended = base.clone();
        extended.push(ov(&[0.0, 0.0])); // dominated by every existing point
        let after = pareto_partition(&extended).unwrap();
        assert_eq!(&after.ranks()[..base.len()], before.ranks());
        assert_eq!(after.ranks()[base.len()], base.len());
    }
}
