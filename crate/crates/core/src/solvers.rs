//! Approximation pipelines, component merging and the exact oracle.
//!
//! All three pipelines share one enumeration: radius profiles, then greedy
//! ball covers per profile, then feasible-cover expansions per cover. Every
//! expansion is reduced to its effective membership key (see
//! [`crate::covers::CoverKey`]) and each distinct key is evaluated once. The
//! pipelines differ only in how a candidate cover becomes a clustering:
//! through an assignment subroutine, or by merging connected balls around an
//! arbitrary or a min-max center.
//!
//! Candidates are evaluated in fixed-size chunks on the rayon pool and
//! reduced in enumeration order, so the result does not depend on the number
//! of worker threads.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assign::{assign, AssignError, AssignmentProblem, DEFAULT_NODE_BUDGET};
use crate::constraints::{check_feasible, Clustering, ConstraintSpec};
use crate::covers::{cover_cost, cover_from_key, for_each_candidate_key, greedy_ball_cover, CoverKey};
use crate::metric::{Ball, BallIndex, Instance, MetricSpace};
use crate::profiles::{enumerate_exact, enumerate_grid, ProfileError, RadiusProfile};

/// Above this many points the partition oracle refuses to run.
pub const EXACT_PARTITION_LIMIT: usize = 16;
/// Point count at which the partition oracle becomes slow.
pub const EXACT_SOFT_LIMIT: usize = 14;
const CHUNK: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no clustering with at most k clusters satisfies the constraint")]
    NoFeasibleSolution,
    #[error("instance with {n} points exceeds the exact solver limit of {limit}")]
    InstanceTooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Assign(#[from] AssignError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Exact,
    TwoEps,
    FourEps,
    EightThirds,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Exact => "exact",
            Pipeline::TwoEps => "two-eps",
            Pipeline::FourEps => "four-eps",
            Pipeline::EightThirds => "eight-thirds",
        }
    }

    /// Approximation factor against the optimum with exact profiles.
    pub fn factor(self) -> f64 {
        match self {
            Pipeline::Exact => 1.0,
            Pipeline::TwoEps => 2.0,
            Pipeline::FourEps => 4.0,
            Pipeline::EightThirds => 8.0 / 3.0,
        }
    }

    /// Per-candidate factor between the resulting clustering and the cover.
    fn candidate_factor(self) -> f64 {
        match self {
            Pipeline::Exact | Pipeline::TwoEps => 1.0,
            Pipeline::FourEps => 2.0,
            Pipeline::EightThirds => 4.0 / 3.0,
        }
    }

    /// Grid resolution that turns the target slack `eps` on the factor into
    /// a profile slack: `factor * (1 + 2 g) = factor + eps`.
    pub fn grid_eps_for(self, eps: f64) -> f64 {
        eps / (2.0 * self.factor())
    }

    pub const ALL: [Pipeline; 4] =
        [Pipeline::Exact, Pipeline::TwoEps, Pipeline::FourEps, Pipeline::EightThirds];
}

impl std::str::FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pipeline {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileMode {
    Exact,
    Grid { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub profiles: ProfileMode,
    /// Node budget handed to the fair assignment search.
    pub node_budget: u64,
    /// Skip candidates that cannot improve on the incumbent by more than the
    /// pipeline's per-candidate factor. Keeps the guarantee but may change
    /// which optimum-tied clustering is returned.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { profiles: ProfileMode::Exact, node_budget: DEFAULT_NODE_BUDGET, prune: false }
    }
}

impl SolveOptions {
    pub fn grid(eps: f64) -> Self {
        SolveOptions { profiles: ProfileMode::Grid { eps }, ..Self::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counters {
    pub profiles_tried: u64,
    /// Profiles left after merging those with identical candidate families.
    pub profiles_distinct: u64,
    /// Greedy cover branches that covered everything.
    pub branches_explored: u64,
    /// Expansion tuples before membership deduplication.
    pub candidates_nominal: u64,
    pub candidates_unique: u64,
    pub candidates_evaluated: u64,
    pub candidates_feasible: u64,
    pub candidates_pruned: u64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub best: Clustering,
    pub cost: f64,
    pub pipeline: Pipeline,
    pub profiles: ProfileMode,
    pub counters: Counters,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterRule {
    /// Lowest-index point of the component.
    Arbitrary,
    /// Min-max center of the component over the whole space.
    OneCenter,
}

/// The point minimizing the maximum distance to `members`, with that radius.
pub fn best_component_center(m: &MetricSpace, members: &[usize]) -> (usize, f64) {
    m.one_center(members).expect("components are nonempty")
}

/// Groups the balls into connected components (two balls are adjacent when
/// they share a point of the space) and turns each component into a single
/// cluster. Clusters are ordered by their lowest member.
///
/// Under [`CenterRule::OneCenter`] two components may pick the same center;
/// they are then merged into one cluster around it, which costs no more than
/// the two separately.
pub fn merge_components(m: &MetricSpace, cover: &[Ball], rule: CenterRule) -> Clustering {
    let n = m.len();
    let mut uf = UnionFind::<usize>::new(cover.len());
    let mut owner = vec![usize::MAX; n];
    for (i, b) in cover.iter().enumerate() {
        for p in 0..n {
            if m.in_ball(b, p) {
                if owner[p] == usize::MAX {
                    owner[p] = i;
                } else {
                    uf.union(owner[p], i);
                }
            }
        }
    }
    assert!(owner.iter().all(|&o| o != usize::MAX), "cover misses a point");
    // Components in order of first member.
    let mut comp_of_root = vec![usize::MAX; cover.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for p in 0..n {
        let root = uf.find(owner[p]);
        if comp_of_root[root] == usize::MAX {
            comp_of_root[root] = members.len();
            members.push(Vec::new());
        }
        members[comp_of_root[root]].push(p);
    }
    let mut centers: Vec<usize> = Vec::with_capacity(members.len());
    let mut assignment = vec![0; n];
    for comp in &members {
        let c = match rule {
            CenterRule::Arbitrary => comp[0],
            CenterRule::OneCenter => best_component_center(m, comp).0,
        };
        if !centers.contains(&c) {
            centers.push(c);
        }
        for &p in comp {
            assignment[p] = c;
        }
    }
    Clustering::new(centers, assignment).expect("centers are distinct by construction")
}

/// Dispatches to the requested pipeline.
pub fn solve(inst: &Instance, pipeline: Pipeline, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    match pipeline {
        Pipeline::Exact => solve_exact(inst),
        Pipeline::TwoEps => solve_two_eps(inst, opts),
        Pipeline::FourEps => solve_four_eps(inst, opts),
        Pipeline::EightThirds => solve_eight_thirds(inst, opts),
    }
}

/// Cover-then-assign pipeline.
pub fn solve_two_eps(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    run_pipeline(inst, Pipeline::TwoEps, opts)
}

/// Cover-then-merge pipeline with arbitrary component centers.
pub fn solve_four_eps(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    run_pipeline(inst, Pipeline::FourEps, opts)
}

/// Cover-then-merge pipeline with min-max component centers.
pub fn solve_eight_thirds(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    run_pipeline(inst, Pipeline::EightThirds, opts)
}

fn profiles_for(inst: &Instance, mode: ProfileMode) -> Result<Vec<RadiusProfile>, SolveError> {
    Ok(match mode {
        ProfileMode::Exact => enumerate_exact(&inst.metric, inst.k),
        ProfileMode::Grid { eps } => enumerate_grid(&inst.metric, inst.k, eps)?,
    })
}

fn evaluate(
    inst: &Instance,
    pipeline: Pipeline,
    opts: &SolveOptions,
    balls: &[Ball],
) -> Result<Option<Clustering>, SolveError> {
    let clustering = match pipeline {
        Pipeline::TwoEps => {
            let prob = AssignmentProblem::new(&inst.metric, balls, &inst.constraint)?
                .with_budget(opts.node_budget);
            match assign(&prob)? {
                Some(c) => c,
                None => return Ok(None),
            }
        }
        Pipeline::FourEps | Pipeline::EightThirds => {
            let rule = if pipeline == Pipeline::FourEps {
                CenterRule::Arbitrary
            } else {
                CenterRule::OneCenter
            };
            let c = merge_components(&inst.metric, balls, rule);
            if !check_feasible(&inst.constraint, &c) {
                return Ok(None);
            }
            c
        }
        Pipeline::Exact => unreachable!("the oracle does not enumerate covers"),
    };
    Ok(Some(clustering.without_empty()))
}

/// Distinct distances including zero, ascending.
fn membership_thresholds(m: &MetricSpace) -> Vec<f64> {
    let mut t = m.distinct_distances();
    t.insert(0, 0.0);
    t
}

/// Number of thresholds a ball of radius `x` reaches; balls around the same
/// center with equal levels have equal members.
fn level(thresholds: &[f64], x: f64) -> u32 {
    let lim = x * (1.0 + crate::metric::REL_TOL);
    thresholds.partition_point(|&d| d <= lim) as u32
}

/// Greedy covers use radii `2 r_j` and expansions `2 r_j + r_i`. Two profiles
/// whose every such radius reaches the same level produce the same balls
/// membership-wise, hence the same candidate keys.
fn profile_signature(thresholds: &[f64], profile: &RadiusProfile) -> Vec<u32> {
    let r = profile.radii();
    let mut sig = Vec::with_capacity(r.len() * (r.len() + 1));
    for &rj in r {
        sig.push(level(thresholds, 2.0 * rj));
        for &ri in r {
            sig.push(level(thresholds, 2.0 * rj + ri));
        }
    }
    sig
}

enum Outcome {
    Pruned,
    Infeasible,
    Feasible(f64, Clustering),
}

fn run_pipeline(inst: &Instance, pipeline: Pipeline, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let profiles = profiles_for(inst, opts.profiles)?;
    let index = BallIndex::new(&inst.metric);
    let mut counters = Counters::default();
    let mut seen: HashSet<CoverKey> = HashSet::new();
    let mut queue: Vec<CoverKey> = Vec::new();
    let thresholds = membership_thresholds(&inst.metric);
    let mut classes: HashSet<Vec<u32>> = HashSet::new();
    for profile in &profiles {
        counters.profiles_tried += 1;
        if !classes.insert(profile_signature(&thresholds, profile)) {
            continue;
        }
        counters.profiles_distinct += 1;
        for g in greedy_ball_cover(&inst.metric, inst.k, profile) {
            counters.branches_explored += 1;
            counters.candidates_nominal += for_each_candidate_key(&index, &g.cover, profile, |key| {
                if !seen.contains(key) {
                    seen.insert(key.to_vec());
                    queue.push(key.to_vec());
                }
            });
        }
    }
    drop(seen);
    drop(classes);
    counters.candidates_unique = queue.len() as u64;

    let factor = pipeline.candidate_factor();
    let mut best: Option<(f64, Clustering)> = None;
    for chunk in queue.chunks(CHUNK) {
        let incumbent = best.as_ref().map(|b| b.0);
        let results: Vec<Result<Outcome, SolveError>> = chunk
            .par_iter()
            .map(|key| {
                let cover = cover_from_key(&index, key);
                if opts.prune && incumbent.is_some_and(|b| b <= factor * cover_cost(cover.balls())) {
                    return Ok(Outcome::Pruned);
                }
                Ok(match evaluate(inst, pipeline, opts, cover.balls())? {
                    Some(c) => Outcome::Feasible(c.cost(&inst.metric), c),
                    None => Outcome::Infeasible,
                })
            })
            .collect();
        for r in results {
            match r? {
                Outcome::Pruned => counters.candidates_pruned += 1,
                Outcome::Infeasible => counters.candidates_evaluated += 1,
                Outcome::Feasible(cost, c) => {
                    counters.candidates_evaluated += 1;
                    counters.candidates_feasible += 1;
                    if best.as_ref().map_or(true, |b| cost < b.0) {
                        best = Some((cost, c));
                    }
                }
            }
        }
    }
    let (cost, best) = best.ok_or(SolveError::NoFeasibleSolution)?;
    debug_assert!(check_feasible(&inst.constraint, &best));
    Ok(SolveReport {
        best,
        cost,
        pipeline,
        profiles: opts.profiles,
        counters,
        wall_time: start.elapsed(),
    })
}

/// Brute-force optimum. Unconstrained instances use a branch-and-bound over
/// ball covers; all others enumerate partitions into at most k parts, each
/// part centered at its min-max center.
pub fn solve_exact(inst: &Instance) -> Result<SolveReport, SolveError> {
    if matches!(inst.constraint, ConstraintSpec::Unconstrained) && inst.n() <= 64 {
        solve_exact_covers(inst)
    } else {
        solve_exact_partitions(inst)
    }
}

/// Partition enumeration. Parts whose min-max centers collide are skipped:
/// their union is also enumerated, stays feasible by mergeability and costs
/// no more.
pub fn solve_exact_partitions(inst: &Instance) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let n = inst.n();
    if n > EXACT_PARTITION_LIMIT {
        return Err(SolveError::InstanceTooLarge { n, limit: EXACT_PARTITION_LIMIT });
    }
    let mut search = PartitionSearch {
        inst,
        blocks: Vec::with_capacity(inst.k),
        best: None,
        visited: 0,
    };
    search.walk(0);
    let (cost, best) = search.best.ok_or(SolveError::NoFeasibleSolution)?;
    Ok(SolveReport {
        best,
        cost,
        pipeline: Pipeline::Exact,
        profiles: ProfileMode::Exact,
        counters: Counters { branches_explored: search.visited, ..Counters::default() },
        wall_time: start.elapsed(),
    })
}

struct PartitionSearch<'a> {
    inst: &'a Instance,
    blocks: Vec<Vec<usize>>,
    best: Option<(f64, Clustering)>,
    visited: u64,
}

impl PartitionSearch<'_> {
    fn walk(&mut self, p: usize) {
        if p == self.inst.n() {
            self.leaf();
            return;
        }
        for b in 0..self.blocks.len() {
            self.blocks[b].push(p);
            self.walk(p + 1);
            self.blocks[b].pop();
        }
        if self.blocks.len() < self.inst.k {
            self.blocks.push(vec![p]);
            self.walk(p + 1);
            self.blocks.pop();
        }
    }

    fn leaf(&mut self) {
        self.visited += 1;
        if !self.blocks.iter().all(|b| self.inst.constraint.cluster_ok(b)) {
            return;
        }
        let m = &self.inst.metric;
        let mut centers = Vec::with_capacity(self.blocks.len());
        let mut cost = 0.0;
        for b in &self.blocks {
            let (c, r) = best_component_center(m, b);
            if centers.contains(&c) {
                return;
            }
            centers.push(c);
            cost += r;
        }
        if self.best.as_ref().is_some_and(|(b, _)| *b <= cost) {
            return;
        }
        let c = Clustering::from_clusters(centers, &self.blocks, self.inst.n())
            .expect("blocks partition the points");
        self.best = Some((c.cost(m), c));
    }
}

/// Ball families of at most `k` balls with distinct centers covering the
/// space, found by branching on which ball covers the lowest uncovered point.
/// Radii are distances from the center, so every cost-minimal family is
/// reachable. `visit` receives each family with cost at most `limit` and
/// returns a new limit.
fn search_covers<F>(m: &MetricSpace, k: usize, limit: f64, mut visit: F) -> u64
where
    F: FnMut(&[Ball], f64) -> f64,
{
    let n = m.len();
    assert!(n <= 64);
    let index = BallIndex::new(m);
    // masks[c][j]: members of the ball around c holding its j+1 nearest points.
    let masks: Vec<Vec<u64>> = (0..n)
        .map(|c| {
            let mut acc = 0u64;
            (1..=n)
                .map(|cnt| {
                    for p in index.members(c, cnt).ones() {
                        acc |= 1 << p;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut st = CoverSearch { m, k, index, masks, full, balls: Vec::new(), limit, nodes: 0 };
    st.walk(0, 0.0, &mut visit);
    st.nodes
}

struct CoverSearch<'a> {
    m: &'a MetricSpace,
    k: usize,
    index: BallIndex,
    masks: Vec<Vec<u64>>,
    full: u64,
    balls: Vec<Ball>,
    limit: f64,
    nodes: u64,
}

impl CoverSearch<'_> {
    fn walk<F>(&mut self, covered: u64, cost: f64, visit: &mut F)
    where
        F: FnMut(&[Ball], f64) -> f64,
    {
        self.nodes += 1;
        if covered == self.full {
            self.limit = visit(&self.balls, cost);
            return;
        }
        if self.balls.len() == self.k {
            return;
        }
        let n = self.m.len();
        let p = (!covered).trailing_zeros() as usize;
        let last = self.balls.len() + 1 == self.k;
        for c in 0..n {
            if self.balls.iter().any(|b| b.center == c) {
                continue;
            }
            if last {
                // Only the smallest ball covering everything left can finish.
                let r = self.m.eccentricity(c, (0..n).filter(|&q| covered >> q & 1 == 0));
                if cost + r <= self.limit {
                    self.balls.push(Ball { center: c, radius: r });
                    self.walk(self.full, cost + r, visit);
                    self.balls.pop();
                }
                continue;
            }
            let first = self.index.member_count(c, self.m.d(c, p));
            for cnt in first..=n {
                let r = self.index.effective_radius(c, cnt);
                if cnt < n && self.index.effective_radius(c, cnt + 1) == r {
                    continue;
                }
                if cost + r > self.limit {
                    break;
                }
                self.balls.push(Ball { center: c, radius: r });
                self.walk(covered | self.masks[c][cnt - 1], cost + r, visit);
                self.balls.pop();
            }
        }
    }
}

/// Minimum-cost ball cover by branch and bound.
pub fn min_ball_cover(m: &MetricSpace, k: usize) -> (Vec<Ball>, u64) {
    let mut best: Option<Vec<Ball>> = None;
    let mut best_cost = f64::INFINITY;
    let nodes = search_covers(m, k, f64::INFINITY, |balls, cost| {
        if cost < best_cost {
            best_cost = cost;
            best = Some(balls.to_vec());
        }
        // Strictly better families only.
        best_cost.next_down_or_self()
    });
    (best.expect("k >= 1 balls always cover a finite space"), nodes)
}

/// Every irredundant ball family of cost at most `bound` (with distinct
/// centers and radii equal to distances from the center).
pub fn ball_covers_within(m: &MetricSpace, k: usize, bound: f64) -> Vec<Vec<Ball>> {
    let mut out = Vec::new();
    search_covers(m, k, bound, |balls, _| {
        out.push(balls.to_vec());
        bound
    });
    out
}

trait NextDown {
    fn next_down_or_self(self) -> Self;
}

impl NextDown for f64 {
    fn next_down_or_self(self) -> f64 {
        if self.is_finite() && self > 0.0 {
            f64::from_bits(self.to_bits() - 1)
        } else if self == 0.0 {
            -f64::MIN_POSITIVE
        } else {
            self
        }
    }
}

fn solve_exact_covers(inst: &Instance) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let (balls, nodes) = min_ball_cover(&inst.metric, inst.k);
    let prob = AssignmentProblem::new(&inst.metric, &balls, &inst.constraint)?;
    let best = assign(&prob)?.ok_or(SolveError::NoFeasibleSolution)?.without_empty();
    Ok(SolveReport {
        cost: best.cost(&inst.metric),
        best,
        pipeline: Pipeline::Exact,
        profiles: ProfileMode::Exact,
        counters: Counters { branches_explored: nodes, ..Counters::default() },
        wall_time: start.elapsed(),
    })
}
