//! Oracle equivalence for non-dominated sorting: the production partition
//! must match a brute-force all-pairs peel on random instances, and the
//! structural invariants must hold under permutation and duplication.

use frontloop_core::pareto::{
    dominates, find_nondominated, pareto_partition, rank_lookup, FrontPartition, ObjectiveVector,
};
use frontloop_core::rng::{stream, StreamRole};
use proptest::prelude::*;
use rand::seq::SliceRandom as _;
use rand::RngExt as _;

/// Reference oracle: O(n^2 K) all-pairs non-dominated set.
fn oracle_nondominated(points: &[ObjectiveVector], alive: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    'outer: for &i in alive {
        for &j in alive {
            if i != j && dominates(&points[j], &points[i]).unwrap() {
                continue 'outer;
            }
        }
        out.push(i);
    }
    out
}

/// Reference oracle: peel the non-dominated set off the residual repeatedly.
fn oracle_partition(points: &[ObjectiveVector]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let mut alive: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !alive.is_empty() {
        let front = oracle_nondominated(points, &alive);
        alive.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    let mut ranks = vec![0usize; points.len()];
    let mut below = 0;
    for front in &fronts {
        for &i in front {
            ranks[i] = below;
        }
        below += front.len();
    }
    (fronts, ranks)
}

fn random_points(n: usize, k: usize, rng: &mut impl rand::Rng, grid: Option<u32>) -> Vec<ObjectiveVector> {
    (0..n)
        .map(|_| {
            let values = (0..k)
                .map(|_| match grid {
                    // Coarse grid forces duplicated coordinates and ties.
                    Some(levels) => (rng.random::<f64>() * levels as f64).floor(),
                    None => rng.random::<f64>(),
                })
                .collect();
            ObjectiveVector::new(values).unwrap()
        })
        .collect()
}

fn assert_matches_oracle(points: &[ObjectiveVector]) {
    let part = pareto_partition(points).unwrap();
    let (fronts, ranks) = oracle_partition(points);
    assert_eq!(part.fronts(), fronts.as_slice());
    assert_eq!(part.ranks(), ranks.as_slice());
}

#[test]
fn nondominated_matches_oracle_on_random_3_objective_points() {
    let mut rng = stream(101, 0, StreamRole::Stats);
    let points = random_points(200, 3, &mut rng, None);
    let alive: Vec<usize> = (0..points.len()).collect();
    assert_eq!(
        find_nondominated(&points).unwrap(),
        oracle_nondominated(&points, &alive)
    );
}

#[test]
fn partition_matches_peel_oracle_across_sizes_and_dims() {
    let mut rng = stream(103, 0, StreamRole::Stats);
    for &n in &[10usize, 100, 500] {
        for &k in &[2usize, 3, 5] {
            let points = random_points(n, k, &mut rng, None);
            assert_matches_oracle(&points);
            // And with heavy ties.
            let points = random_points(n, k, &mut rng, Some(4));
            assert_matches_oracle(&points);
        }
    }
}

#[test]
fn ranks_equal_prefix_sums_of_front_sizes() {
    let mut rng = stream(105, 0, StreamRole::Stats);
    let points = random_points(300, 3, &mut rng, Some(6));
    let part = pareto_partition(&points).unwrap();
    let mut below = 0usize;
    for front in part.fronts() {
        for &i in front {
            assert_eq!(rank_lookup(&part, i).unwrap(), below);
        }
        below += front.len();
    }
    assert_eq!(below, points.len());
}

fn partition_invariants(points: &[ObjectiveVector], part: &FrontPartition) {
    let n = points.len();
    // Partition property: disjoint cover.
    let mut seen = vec![false; n];
    for front in part.fronts() {
        for &i in front {
            assert!(!seen[i], "index {i} appears twice");
            seen[i] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
    assert!(part.fronts().len() <= n);
    // No point is dominated by its own or any later front.
    for (fi, front) in part.fronts().iter().enumerate() {
        for &i in front {
            for later in &part.fronts()[fi..] {
                for &j in later {
                    assert!(!dominates(&points[j], &points[i]).unwrap());
                }
            }
        }
    }
    // Every point beyond the first front is dominated by someone above it.
    for (fi, front) in part.fronts().iter().enumerate().skip(1) {
        for &i in front {
            let dominated = part.fronts()[..fi]
                .iter()
                .flatten()
                .any(|&j| dominates(&points[j], &points[i]).unwrap());
            assert!(dominated, "front {fi} point {i} has no dominator above");
        }
    }
    let max_rank = part.ranks().iter().max().unwrap();
    assert!(*max_rank < n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_invariants_hold(values in prop::collection::vec(
        prop::collection::vec(0..8i32, 3), 1..60,
    )) {
        let points: Vec<ObjectiveVector> = values
            .iter()
            .map(|row| ObjectiveVector::new(row.iter().map(|&v| v as f64).collect()).unwrap())
            .collect();
        let part = pareto_partition(&points).unwrap();
        partition_invariants(&points, &part);
    }

    #[test]
    fn rank_is_order_independent(values in prop::collection::vec(
        prop::collection::vec(0..6i32, 2), 2..40,
    ), seed in 0u64..1000) {
        let points: Vec<ObjectiveVector> = values
            .iter()
            .map(|row| ObjectiveVector::new(row.iter().map(|&v| v as f64).collect()).unwrap())
            .collect();
        let base = pareto_partition(&points).unwrap();

        let mut perm: Vec<usize> = (0..points.len()).collect();
        let mut rng = stream(seed, 0, StreamRole::Stats);
        perm.shuffle(&mut rng);
        let shuffled: Vec<ObjectiveVector> = perm.iter().map(|&i| points[i].clone()).collect();
        let permuted = pareto_partition(&shuffled).unwrap();
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            prop_assert_eq!(permuted.ranks()[new_idx], base.ranks()[old_idx]);
        }
    }

    #[test]
    fn duplicates_always_share_rank(values in prop::collection::vec(
        prop::collection::vec(0..5i32, 2), 1..30,
    ), dup in 0usize..30) {
        let mut points: Vec<ObjectiveVector> = values
            .iter()
            .map(|row| ObjectiveVector::new(row.iter().map(|&v| v as f64).collect()).unwrap())
            .collect();
        let dup = dup % points.len();
        points.push(points[dup].clone());
        let part = pareto_partition(&points).unwrap();
        prop_assert_eq!(part.ranks()[dup], part.ranks()[points.len() - 1]);
    }
}
