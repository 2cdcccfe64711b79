//! Seeded instance generators.
//!
//! Random metrics use small integer coordinates or small integer edge weights
//! so that the number of distinct distances, and with it the number of exact
//! radius profiles, stays small. Constraint parameters are drawn so that the
//! single cluster holding every point is feasible; the instance therefore
//! always has a solution for every k.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::constraints::{Color, Proportion};
use crate::hardness::{reduce, HardnessError, PartitionedSetCover};
use crate::io::{ConstraintInput, InstanceFile, MetricInput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("bad generator flags: {0}")]
    BadFlags(String),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    /// Integer coordinates in `[0, side)^dim`.
    Euclidean { dim: usize, side: u32 },
    /// Random spanning tree plus extra edges, integer weights in `1..=max_weight`.
    Graph { max_weight: u32, extra_edge_prob: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    None,
    /// `None` draws the bound uniformly from `1..=n/k`.
    LowerBound { min_size: Option<usize> },
    Balanced,
    /// Overlapping groups with ranges around each group's global share.
    Fair { groups: usize },
    EllDiversity { groups: usize, ell: u32 },
    PairwiseFair { t: Proportion },
    ExactProportions { groups: usize },
    BalancedAsFair,
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::None => "none",
            ConstraintKind::LowerBound { .. } => "lower_bound",
            ConstraintKind::Balanced => "balanced",
            ConstraintKind::Fair { .. } => "fair",
            ConstraintKind::EllDiversity { .. } => "ell_diversity",
            ConstraintKind::PairwiseFair { .. } => "pairwise_fair",
            ConstraintKind::ExactProportions { .. } => "exact_proportions",
            ConstraintKind::BalancedAsFair => "balanced_as_fair",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    pub n: usize,
    pub k: usize,
    pub metric: MetricKind,
    pub constraint: ConstraintKind,
}

pub fn random_metric<R: Rng>(rng: &mut R, n: usize, kind: MetricKind) -> Result<MetricInput, GenError> {
    if n == 0 {
        return Err(GenError::BadFlags("n must be positive".into()));
    }
    match kind {
        MetricKind::Euclidean { dim, side } => {
            if dim == 0 || side == 0 {
                return Err(GenError::BadFlags("dim and side must be positive".into()));
            }
            let points =
                (0..n).map(|_| (0..dim).map(|_| f64::from(rng.gen_range(0..side))).collect()).collect();
            Ok(MetricInput::Euclidean { points })
        }
        MetricKind::Graph { max_weight, extra_edge_prob } => {
            if max_weight == 0 || !(0.0..=1.0).contains(&extra_edge_prob) {
                return Err(GenError::BadFlags("max weight must be positive and p in [0, 1]".into()));
            }
            let mut edges = Vec::new();
            let mut linked = vec![vec![false; n]; n];
            for v in 1..n {
                let u = rng.gen_range(0..v);
                linked[u][v] = true;
                edges.push((u, v, f64::from(rng.gen_range(1..=max_weight))));
            }
            for u in 0..n {
                for v in u + 1..n {
                    if !linked[u][v] && rng.gen_bool(extra_edge_prob) {
                        edges.push((u, v, f64::from(rng.gen_range(1..=max_weight))));
                    }
                }
            }
            Ok(MetricInput::Graph { n, edges })
        }
    }
}

/// Labels `0..groups` with near-equal counts, shuffled.
fn even_labels<R: Rng>(rng: &mut R, n: usize, groups: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|p| p % groups).collect();
    labels.shuffle(rng);
    labels
}

fn groups_of(labels: &[usize], groups: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); groups];
    for (p, &c) in labels.iter().enumerate() {
        out[c].push(p);
    }
    out
}

pub fn random_constraint<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    kind: &ConstraintKind,
) -> Result<ConstraintInput, GenError> {
    let need_even = || {
        if n % 2 == 0 {
            Ok(())
        } else {
            Err(GenError::BadFlags(format!("two equal color classes need even n, got {n}")))
        }
    };
    Ok(match kind {
        ConstraintKind::None => ConstraintInput::None,
        ConstraintKind::LowerBound { min_size } => {
            let min_size = match min_size {
                Some(l) if *l >= 1 && *l <= n => *l,
                Some(l) => return Err(GenError::BadFlags(format!("lower bound {l} outside 1..={n}"))),
                None => rng.gen_range(1..=(n / k.max(1)).max(1)),
            };
            ConstraintInput::LowerBound { min_size }
        }
        ConstraintKind::Balanced => {
            need_even()?;
            let colors = even_labels(rng, n, 2)
                .into_iter()
                .map(|c| if c == 0 { Color::Red } else { Color::Blue })
                .collect();
            ConstraintInput::Balanced { colors }
        }
        ConstraintKind::BalancedAsFair => {
            need_even()?;
            ConstraintInput::BalancedAsFair { groups: groups_of(&even_labels(rng, n, 2), 2) }
        }
        ConstraintKind::Fair { groups } => {
            if *groups == 0 || *groups > 8 {
                return Err(GenError::BadFlags("fair groups must be in 1..=8".into()));
            }
            let mut members = vec![Vec::new(); *groups];
            for p in 0..n {
                for g in members.iter_mut() {
                    if rng.gen_bool(0.5) {
                        g.push(p);
                    }
                }
            }
            // Ranges [share/2, (1 + share)/2] contain every group's global share.
            let nn = n as i64;
            let alpha = members.iter().map(|g| Proportion::exact(g.len() as i64, 2 * nn)).collect();
            let beta = members.iter().map(|g| Proportion::exact(g.len() as i64 + nn, 2 * nn)).collect();
            ConstraintInput::Fair { groups: members, alpha, beta }
        }
        ConstraintKind::EllDiversity { groups, ell } => {
            if *ell == 0 || (*groups as u32) < *ell {
                return Err(GenError::BadFlags("ell-diversity needs 1 <= ell <= groups".into()));
            }
            // Near-equal classes keep every share at most 1/ell.
            let labels = even_labels(rng, n, *groups);
            let cap = n / *ell as usize;
            if groups_of(&labels, *groups).iter().any(|g| g.len() > cap) {
                return Err(GenError::BadFlags(format!(
                    "{n} points in {groups} colors cannot keep every color within 1/{ell}"
                )));
            }
            ConstraintInput::EllDiversity { groups: groups_of(&labels, *groups), ell: *ell }
        }
        ConstraintKind::PairwiseFair { t } => {
            if n < 2 {
                return Err(GenError::BadFlags("pairwise fairness needs two points".into()));
            }
            // Draw the red count among those whose ratio to blue lies in [1/t, t].
            let ok: Vec<usize> = (1..n)
                .filter(|&r| {
                    let b = n - r;
                    t.above_or_at(r, b) && t.above_or_at(b, r)
                })
                .collect();
            if ok.is_empty() {
                return Err(GenError::BadFlags(format!("no color split of {n} points satisfies t = {t}")));
            }
            let red = ok[rng.gen_range(0..ok.len())];
            let mut labels: Vec<usize> = (0..n).map(|p| usize::from(p >= red)).collect();
            labels.shuffle(rng);
            ConstraintInput::PairwiseFair { groups: groups_of(&labels, 2), t: *t }
        }
        ConstraintKind::ExactProportions { groups } => {
            if *groups == 0 || *groups > n {
                return Err(GenError::BadFlags("exact proportions need 1 <= groups <= n".into()));
            }
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..*groups)).collect();
            let mut parts: Vec<Vec<usize>> = groups_of(&labels, *groups);
            parts.retain(|g| !g.is_empty());
            ConstraintInput::ExactProportions { groups: parts }
        }
    })
}

pub fn random_instance(cfg: &RandomConfig, seed: u64) -> Result<InstanceFile, GenError> {
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(GenError::BadFlags(format!("k = {} must lie in 1..={}", cfg.k, cfg.n)));
    }
    let mut rng = rng_from_seed(seed);
    let metric = random_metric(&mut rng, cfg.n, cfg.metric)?;
    let constraint = random_constraint(&mut rng, cfg.n, cfg.k, &cfg.constraint)?;
    Ok(InstanceFile {
        k: cfg.k,
        metric,
        constraint,
        metadata: Some(json!({ "generator": "random", "seed": seed })),
    })
}

/// Each collection receives between 1 and `max_sets` random nonempty subsets.
pub fn random_set_cover<R: Rng>(
    rng: &mut R,
    universe: usize,
    k: usize,
    max_sets: usize,
) -> Result<PartitionedSetCover, GenError> {
    if universe == 0 || k == 0 || max_sets == 0 {
        return Err(GenError::BadFlags("universe, collections and sets must be positive".into()));
    }
    let collections = (0..k)
        .map(|_| {
            (0..rng.gen_range(1..=max_sets))
                .map(|_| loop {
                    let set: Vec<usize> = (0..universe).filter(|_| rng.gen_bool(0.5)).collect();
                    if !set.is_empty() {
                        break set;
                    }
                })
                .collect()
        })
        .collect();
    Ok(PartitionedSetCover::new(universe, collections)?)
}

/// Reduced instance as a matrix metric, with the source Set Cover instance,
/// the vertex labels and the gap bounds in `metadata`.
pub fn hardness_instance(sc: &PartitionedSetCover) -> Result<InstanceFile, GenError> {
    let out = reduce(sc)?;
    let rows = out.integer_dist.iter().map(|r| r.iter().map(|&d| d as f64).collect()).collect();
    Ok(InstanceFile {
        k: out.k(),
        metric: MetricInput::Matrix { rows },
        constraint: ConstraintInput::None,
        metadata: Some(json!({
            "generator": "hardness",
            "set_cover": sc,
            "vertices": out.vertex_map,
            "gap": { "yes_bound": out.yes_bound, "no_bound": out.no_bound },
        })),
    })
}
