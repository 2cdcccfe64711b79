//! Seeded instance and clustering generators shared by the integration tests.
#![allow(dead_code)]

use msr::constraints::{check_feasible, Clustering, Color, ConstraintSpec, Proportion};
use msr::gen::{random_instance, ConstraintKind, MetricKind, RandomConfig};
use msr::metric::{Ball, Instance, MetricSpace};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The constraint kinds of the ratio suite.
pub fn suite_kinds() -> Vec<ConstraintKind> {
    vec![
        ConstraintKind::None,
        ConstraintKind::LowerBound { min_size: None },
        ConstraintKind::Balanced,
        ConstraintKind::Fair { groups: 2 },
        ConstraintKind::EllDiversity { groups: 3, ell: 2 },
        ConstraintKind::PairwiseFair { t: Proportion::exact(2, 1) },
    ]
}

pub fn all_kinds() -> Vec<ConstraintKind> {
    let mut k = suite_kinds();
    k.push(ConstraintKind::ExactProportions { groups: 2 });
    k.push(ConstraintKind::BalancedAsFair);
    k
}

fn needs_even(kind: &ConstraintKind) -> bool {
    matches!(kind, ConstraintKind::Balanced | ConstraintKind::BalancedAsFair)
}

pub fn random_metric_kind<R: Rng>(r: &mut R) -> MetricKind {
    if r.gen_bool(0.5) {
        MetricKind::Euclidean { dim: 2, side: r.gen_range(3..=5) }
    } else {
        MetricKind::Graph { max_weight: 3, extra_edge_prob: 0.25 }
    }
}

/// A random instance with `lo <= n <= hi` and `k <= max_k`.
pub fn random_suite_instance(kind: &ConstraintKind, seed: u64, lo: usize, hi: usize, max_k: usize) -> Instance {
    let mut r = rng(seed ^ 0x5eed);
    let mut n = r.gen_range(lo..=hi);
    if needs_even(kind) && n % 2 == 1 {
        n -= 1;
    }
    let cfg = RandomConfig {
        n,
        k: r.gen_range(1..=max_k.min(n)),
        metric: random_metric_kind(&mut r),
        constraint: kind.clone(),
    };
    random_instance(&cfg, seed).expect("generator flags are valid").to_instance().expect("valid instance")
}

pub fn random_metric<R: Rng>(r: &mut R, n: usize) -> MetricSpace {
    let kind = random_metric_kind(r);
    let input = msr::gen::random_metric(r, n, kind).unwrap();
    input.build().unwrap()
}

/// Up to `max_balls` balls with distinct random centers and radii drawn from
/// the distances of each center.
pub fn random_balls<R: Rng>(r: &mut R, m: &MetricSpace, max_balls: usize) -> Vec<Ball> {
    let mut centers: Vec<usize> = (0..m.len()).collect();
    centers.shuffle(r);
    let count = r.gen_range(1..=max_balls.min(m.len()));
    centers[..count]
        .iter()
        .map(|&c| Ball { center: c, radius: m.d(c, r.gen_range(0..m.len())) })
        .collect()
}

/// Random partition of `0..n` into at most `parts` nonempty blocks.
pub fn random_partition<R: Rng>(r: &mut R, n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut blocks = vec![Vec::new(); parts];
    for p in 0..n {
        blocks[r.gen_range(0..parts)].push(p);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

/// Attaches distinct random centers to `blocks`, plus `empty` centers with no
/// points.
pub fn with_centers<R: Rng>(r: &mut R, n: usize, blocks: &[Vec<usize>], empty: usize) -> Clustering {
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(r);
    let total = (blocks.len() + empty).min(n);
    let centers: Vec<usize> = pool[..total].to_vec();
    let mut assignment = vec![usize::MAX; n];
    for (b, &c) in blocks.iter().zip(&centers) {
        for &p in b {
            assignment[p] = c;
        }
    }
    Clustering::new(centers, assignment).unwrap()
}

/// A feasible clustering with at least two nonempty clusters when the
/// constraint allows it, found by construction or rejection.
pub fn random_feasible_clustering<R: Rng>(r: &mut R, spec: &ConstraintSpec, n: usize) -> Clustering {
    let empty = r.gen_range(0..=1);
    let blocks: Vec<Vec<usize>> = match spec {
        ConstraintSpec::Unconstrained => {
            let parts = r.gen_range(1..=4);
            random_partition(r, n, parts)
        }
        ConstraintSpec::LowerBound { min_size } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(r);
            let parts = (n / min_size).clamp(1, 4);
            let parts = r.gen_range(1..=parts);
            let mut blocks: Vec<Vec<usize>> = order.chunks(*min_size).take(parts).map(<[usize]>::to_vec).collect();
            for &p in order.iter().skip(parts * min_size) {
                let i = r.gen_range(0..blocks.len());
                blocks[i].push(p);
            }
            blocks
        }
        ConstraintSpec::Balanced { colors } => {
            let mut red: Vec<usize> = (0..n).filter(|&p| colors[p] == Color::Red).collect();
            let mut blue: Vec<usize> = (0..n).filter(|&p| colors[p] == Color::Blue).collect();
            red.shuffle(r);
            blue.shuffle(r);
            let parts = r.gen_range(1..=red.len().clamp(1, 4));
            let mut blocks = vec![Vec::new(); parts];
            for (i, (a, b)) in red.iter().zip(&blue).enumerate() {
                let slot = if i < parts { i } else { r.gen_range(0..parts) };
                blocks[slot].extend([*a, *b]);
            }
            blocks
        }
        ConstraintSpec::FairRep(_) => {
            let mut found = vec![(0..n).collect::<Vec<_>>()];
            for _ in 0..20_000 {
                let parts = r.gen_range(2..=4);
                let cand = random_partition(r, n, parts);
                if cand.len() >= 2 && cand.iter().all(|b| spec.cluster_ok(b)) {
                    found = cand;
                    break;
                }
            }
            found
        }
    };
    let c = with_centers(r, n, &blocks, empty);
    assert!(check_feasible(spec, &c));
    c
}
