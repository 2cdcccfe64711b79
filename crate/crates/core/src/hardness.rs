//! Reduction from partitioned Set Cover to unconstrained k-MSR, with a gap
//! checker built on the exact solver.
//!
//! Vertices are laid out as elements, then sets (collection by collection),
//! then `k + 1` auxiliary vertices per collection. Every edge touching a set
//! of collection `i` (0-based) weighs `2^i`: set to element for each member,
//! set to set inside a collection, and set to each auxiliary vertex of its
//! collection. Distances are shortest paths computed over integers. Pairs in
//! different connected components get a common cap `M = max(2^k, largest
//! finite distance)`, which keeps the triangle inequality and puts any
//! cluster spanning two components above the gap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{integer_shortest_paths, Instance, MetricError, MetricSpace};
use crate::solvers::{ball_covers_within, min_ball_cover};

/// The reduction keeps sums of powers of two well inside 53 bits.
pub const MAX_COLLECTIONS: usize = 30;
const MAX_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardnessError {
    #[error("at least one collection is required")]
    NoCollections,
    #[error("at most {MAX_COLLECTIONS} collections are supported, got {0}")]
    TooManyCollections(usize),
    #[error("collection {0} is empty")]
    EmptyCollection(usize),
    #[error("set {set} of collection {collection} is empty")]
    EmptySet { collection: usize, set: usize },
    #[error("element {element} outside universe of size {universe}")]
    ElementOutOfRange { element: usize, universe: usize },
    #[error("reduced instance has {n} vertices, the exact check handles at most {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
    #[error("gap violated: cover exists = {has_cover}, optimum = {opt}, bounds = ({yes}, {no})")]
    GapViolated { has_cover: bool, opt: u64, yes: u64, no: u64 },
    #[error("optimal solution breaks the one-center-per-collection structure: {0}")]
    StructureViolated(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A universe `0..universe` and k collections of subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionedSetCover {
    pub universe: usize,
    pub collections: Vec<Vec<Vec<usize>>>,
}

impl PartitionedSetCover {
    pub fn new(universe: usize, collections: Vec<Vec<Vec<usize>>>) -> Result<Self, HardnessError> {
        let sc = PartitionedSetCover { universe, collections };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<(), HardnessError> {
        if self.collections.is_empty() {
            return Err(HardnessError::NoCollections);
        }
        if self.collections.len() > MAX_COLLECTIONS {
            return Err(HardnessError::TooManyCollections(self.collections.len()));
        }
        for (i, coll) in self.collections.iter().enumerate() {
            if coll.is_empty() {
                return Err(HardnessError::EmptyCollection(i));
            }
            for (j, set) in coll.iter().enumerate() {
                if set.is_empty() {
                    return Err(HardnessError::EmptySet { collection: i, set: j });
                }
                if let Some(&e) = set.iter().find(|&&e| e >= self.universe) {
                    return Err(HardnessError::ElementOutOfRange { element: e, universe: self.universe });
                }
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.collections.len()
    }

    /// One set per collection covering the universe, as set indices, if any
    /// (first in lexicographic order of choices).
    pub fn find_cover(&self) -> Option<Vec<usize>> {
        let mut choice = vec![0usize; self.k()];
        loop {
            let mut covered = vec![false; self.universe];
            for (coll, &j) in self.collections.iter().zip(&choice) {
                for &e in &coll[j] {
                    covered[e] = true;
                }
            }
            if covered.iter().all(|&c| c) {
                return Some(choice);
            }
            let mut i = self.k();
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < self.collections[i].len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        let k = self.k();
        self.universe + self.collections.iter().map(Vec::len).sum::<usize>() + k * (k + 1)
    }

    pub fn edge_count(&self) -> usize {
        let k = self.k();
        self.collections
            .iter()
            .map(|coll| {
                let members: usize = coll.iter().map(|s| distinct(s).len()).sum();
                members + coll.len() * (coll.len() - 1) / 2 + (k + 1) * coll.len()
            })
            .sum()
    }
}

fn distinct(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexLabel {
    Element { element: usize },
    Set { collection: usize, set: usize },
    Aux { collection: usize, index: usize },
}

impl VertexLabel {
    /// Collection a set or auxiliary vertex belongs to.
    pub fn collection(self) -> Option<usize> {
        match self {
            VertexLabel::Element { .. } => None,
            VertexLabel::Set { collection, .. } | VertexLabel::Aux { collection, .. } => Some(collection),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub instance: Instance,
    pub vertex_map: Vec<VertexLabel>,
    pub edges: Vec<(usize, usize, u64)>,
    pub integer_dist: Vec<Vec<u64>>,
    /// `2^k - 1`: the optimum when a cover exists.
    pub yes_bound: u64,
    /// `2^k`: lower bound on the optimum otherwise.
    pub no_bound: u64,
}

impl ReductionOutput {
    pub fn k(&self) -> usize {
        self.instance.k
    }
}

pub fn reduce(sc: &PartitionedSetCover) -> Result<ReductionOutput, HardnessError> {
    sc.validate()?;
    let k = sc.k();
    let mut vertex_map: Vec<VertexLabel> =
        (0..sc.universe).map(|element| VertexLabel::Element { element }).collect();
    let mut set_vertex: Vec<Vec<usize>> = Vec::with_capacity(k);
    for (i, coll) in sc.collections.iter().enumerate() {
        set_vertex.push((0..coll.len()).map(|j| vertex_map.len() + j).collect());
        vertex_map.extend((0..coll.len()).map(|set| VertexLabel::Set { collection: i, set }));
    }
    let mut aux_vertex: Vec<Vec<usize>> = Vec::with_capacity(k);
    for i in 0..k {
        aux_vertex.push((0..=k).map(|t| vertex_map.len() + t).collect());
        vertex_map.extend((0..=k).map(|index| VertexLabel::Aux { collection: i, index }));
    }
    let mut edges = Vec::new();
    for (i, coll) in sc.collections.iter().enumerate() {
        let w = 1u64 << i;
        for (j, set) in coll.iter().enumerate() {
            for e in distinct(set) {
                edges.push((set_vertex[i][j], e, w));
            }
        }
        for a in 0..coll.len() {
            for b in a + 1..coll.len() {
                edges.push((set_vertex[i][a], set_vertex[i][b], w));
            }
        }
        for &s in &set_vertex[i] {
            for &x in &aux_vertex[i] {
                edges.push((x, s, w));
            }
        }
    }
    let n = vertex_map.len();
    let paths = integer_shortest_paths(n, &edges);
    let finite_max = paths.iter().flatten().flatten().copied().max().unwrap_or(0);
    let cap = finite_max.max(1u64 << k);
    let integer_dist: Vec<Vec<u64>> =
        paths.iter().map(|row| row.iter().map(|d| d.unwrap_or(cap)).collect()).collect();
    let rows: Vec<Vec<f64>> =
        integer_dist.iter().map(|row| row.iter().map(|&d| d as f64).collect()).collect();
    let metric = MetricSpace::from_matrix(&rows)?;
    let instance = Instance::unconstrained(metric, k).expect("k <= vertex count");
    Ok(ReductionOutput {
        instance,
        vertex_map,
        edges,
        integer_dist,
        yes_bound: (1u64 << k) - 1,
        no_bound: 1u64 << k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapSide {
    Yes(u64),
    No(u64),
}

fn as_integer(r: f64) -> u64 {
    assert!(r >= 0.0 && r.fract() == 0.0, "non-integral radius {r}");
    r as u64
}

/// Solves the reduced instance exactly, decides the Set Cover instance by
/// brute force and checks that the optimum falls on the matching side of the
/// gap. On the yes side every optimal ball family is additionally checked to
/// place exactly one center per collection with radius exactly `2^i`.
pub fn verify_gap(sc: &PartitionedSetCover, out: &ReductionOutput) -> Result<GapSide, HardnessError> {
    let m = &out.instance.metric;
    let k = out.k();
    if m.len() > MAX_POINTS {
        return Err(HardnessError::InstanceTooLarge { n: m.len(), limit: MAX_POINTS });
    }
    let (balls, _) = min_ball_cover(m, k);
    let opt: u64 = balls.iter().map(|b| as_integer(b.radius)).sum();
    let has_cover = sc.find_cover().is_some();
    let ok = if has_cover { opt <= out.yes_bound } else { opt >= out.no_bound };
    if !ok {
        return Err(HardnessError::GapViolated { has_cover, opt, yes: out.yes_bound, no: out.no_bound });
    }
    if !has_cover {
        return Ok(GapSide::No(opt));
    }
    for family in ball_covers_within(m, k, opt as f64) {
        let mut per_collection = vec![Vec::new(); k];
        for b in &family {
            match out.vertex_map[b.center].collection() {
                Some(i) => per_collection[i].push((b.center, as_integer(b.radius))),
                None => {
                    return Err(HardnessError::StructureViolated(format!(
                        "center {} is an element vertex",
                        b.center
                    )))
                }
            }
        }
        for (i, centers) in per_collection.iter().enumerate() {
            if centers.len() != 1 || centers[0].1 != 1u64 << i {
                return Err(HardnessError::StructureViolated(format!(
                    "collection {i} has centers {centers:?}"
                )));
            }
        }
    }
    Ok(GapSide::Yes(opt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapAnswer {
    Yes,
    No,
}

/// Yes iff `approx_cost < 2^k`. The comparison is on the raw value: a cost
/// just below `2^k` must not be rounded up onto the threshold.
pub fn gap_decider(out: &ReductionOutput, approx_cost: f64) -> GapAnswer {
    if approx_cost < out.no_bound as f64 {
        GapAnswer::Yes
    } else {
        GapAnswer::No
    }
}

/// Every instance with the given universe size and number of collections in
/// which each collection holds between 1 and `max_sets` distinct nonempty
/// sets (as unordered choices).
pub fn all_instances(universe: usize, k: usize, max_sets: usize) -> Vec<PartitionedSetCover> {
    let subsets: Vec<Vec<usize>> = (1u32..1 << universe)
        .map(|mask| (0..universe).filter(|&e| mask >> e & 1 == 1).collect())
        .collect();
    let mut collections: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut pick = Vec::new();
    choose(&subsets, max_sets, 0, &mut pick, &mut collections);
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        out.push(PartitionedSetCover {
            universe,
            collections: idx.iter().map(|&c| collections[c].clone()).collect(),
        });
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < collections.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

fn choose(
    subsets: &[Vec<usize>],
    max: usize,
    from: usize,
    pick: &mut Vec<usize>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    if !pick.is_empty() {
        out.push(pick.iter().map(|&i| subsets[i].clone()).collect());
    }
    if pick.len() == max {
        return;
    }
    for i in from..subsets.len() {
        pick.push(i);
        choose(subsets, max, i + 1, pick, out);
        pick.pop();
    }
}
