//! Assignment subroutines: given at most k balls, assign every point to the
//! center of a ball containing it so that the constraint holds, or report
//! that no such assignment exists.
//!
//! Lower-bound and balanced clustering reduce to flows. Fair representation
//! is solved by a depth-first search over how many points of each class
//! signature go to each ball, pruned by per-ball range checks. An exhaustive
//! enumeration serves as ground truth for all three.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::constraints::{check_feasible, ClassSignature, Clustering, Color, ConstraintSpec, FairRep};
use crate::flow::{BoundedNetwork, FlowNetwork};
use crate::metric::{leq_tol, Ball, MetricSpace};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
const MAX_BALLS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignError {
    #[error("at most {MAX_BALLS} balls are supported, got {0}")]
    TooManyBalls(usize),
    #[error("two balls share center {0}")]
    DuplicateCenter(usize),
    #[error("ball center {0} out of range")]
    CenterOutOfRange(usize),
    #[error("search exceeded its budget of {0} nodes")]
    SearchBudgetExceeded(u64),
    #[error("subroutine does not handle constraint kind {0}")]
    WrongKind(&'static str),
}

/// Balls plus the constraint to satisfy. Each point's containing balls are
/// precomputed as a bitmask.
#[derive(Debug, Clone)]
pub struct AssignmentProblem<'a> {
    metric: &'a MetricSpace,
    balls: &'a [Ball],
    constraint: &'a ConstraintSpec,
    containing: Vec<u64>,
    budget: u64,
}

impl<'a> AssignmentProblem<'a> {
    pub fn new(
        metric: &'a MetricSpace,
        balls: &'a [Ball],
        constraint: &'a ConstraintSpec,
    ) -> Result<Self, AssignError> {
        if balls.len() > MAX_BALLS {
            return Err(AssignError::TooManyBalls(balls.len()));
        }
        let mut seen = HashSet::new();
        for b in balls {
            if b.center >= metric.len() {
                return Err(AssignError::CenterOutOfRange(b.center));
            }
            if !seen.insert(b.center) {
                return Err(AssignError::DuplicateCenter(b.center));
            }
        }
        let containing = (0..metric.len())
            .map(|p| {
                balls
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| metric.in_ball(b, p))
                    .fold(0u64, |m, (i, _)| m | 1 << i)
            })
            .collect();
        Ok(AssignmentProblem { metric, balls, constraint, containing, budget: DEFAULT_NODE_BUDGET })
    }

    /// Caps the number of search nodes of [`assign_fair`].
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn balls(&self) -> &[Ball] {
        self.balls
    }

    /// Bitmask of the balls containing `p`.
    pub fn containing(&self, p: usize) -> u64 {
        self.containing[p]
    }

    fn n(&self) -> usize {
        self.metric.len()
    }

    fn all_covered(&self) -> bool {
        self.containing.iter().all(|&m| m != 0)
    }

    /// Builds the clustering for `ball_of[p]` (ball index per point).
    fn finish(&self, ball_of: &[usize]) -> Clustering {
        for (p, &i) in ball_of.iter().enumerate() {
            debug_assert!(self.containing[p] >> i & 1 == 1, "point {p} outside ball {i}");
        }
        let centers = self.balls.iter().map(|b| b.center).collect();
        let assignment = ball_of.iter().map(|&i| self.balls[i].center).collect();
        let c = Clustering::new(centers, assignment).expect("ball centers are distinct");
        debug_assert!(c
            .radii(self.metric)
            .iter()
            .zip(self.balls)
            .all(|(&r, b)| leq_tol(r, b.radius)));
        c
    }
}

/// Per class and ball, the number of points of that class assigned to that
/// ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadMatrix {
    pub classes: Vec<u64>,
    pub counts: Vec<Vec<usize>>,
}

impl LoadMatrix {
    pub fn from_clustering(prob: &AssignmentProblem<'_>, clustering: &Clustering) -> Self {
        let labels = prob.constraint.point_classes(prob.n());
        let mut classes: Vec<u64> = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        let slot: HashMap<usize, usize> =
            prob.balls.iter().enumerate().map(|(i, b)| (b.center, i)).collect();
        let mut counts = vec![vec![0; prob.balls.len()]; classes.len()];
        for (p, c) in clustering.assignment().iter().enumerate() {
            let tau = classes.binary_search(&labels[p]).unwrap();
            if let Some(&i) = slot.get(c) {
                counts[tau][i] += 1;
            }
        }
        LoadMatrix { classes, counts }
    }
}

/// Dispatches on the constraint kind. `Ok(None)` means no feasible assignment
/// exists.
pub fn assign(prob: &AssignmentProblem<'_>) -> Result<Option<Clustering>, AssignError> {
    if !prob.all_covered() {
        return Ok(None);
    }
    match prob.constraint {
        ConstraintSpec::Unconstrained => Ok(Some(assign_nearest_index(prob))),
        ConstraintSpec::LowerBound { .. } => assign_lower_bound(prob),
        ConstraintSpec::Balanced { .. } => assign_balanced(prob),
        ConstraintSpec::FairRep(_) => assign_fair(prob),
    }
}

/// Every point to its lowest-index containing ball.
fn assign_nearest_index(prob: &AssignmentProblem<'_>) -> Clustering {
    let ball_of: Vec<usize> =
        prob.containing.iter().map(|m| m.trailing_zeros() as usize).collect();
    prob.finish(&ball_of)
}

/// Lower bound `L`: enumerate which balls stay nonempty, and for each choice
/// route one unit per point through a network with `[L, n]` bounds on the
/// ball arcs.
pub fn assign_lower_bound(prob: &AssignmentProblem<'_>) -> Result<Option<Clustering>, AssignError> {
    let &ConstraintSpec::LowerBound { min_size } = prob.constraint else {
        return Err(AssignError::WrongKind(prob.constraint.kind_name()));
    };
    if !prob.all_covered() {
        return Ok(None);
    }
    let n = prob.n();
    let m = prob.balls.len();
    let sizes: Vec<usize> = (0..m)
        .map(|i| prob.containing.iter().filter(|&&c| c >> i & 1 == 1).count())
        .collect();
    for open in 1u64..(1u64 << m) {
        if prob.containing.iter().any(|&c| c & open == 0) {
            continue;
        }
        let chosen: Vec<usize> = (0..m).filter(|&i| open >> i & 1 == 1).collect();
        if chosen.len() * min_size > n || chosen.iter().any(|&i| sizes[i] < min_size) {
            continue;
        }
        let (src, sink) = (0, 1);
        let ball_node = |i: usize| 2 + i;
        let point_node = |p: usize| 2 + m + p;
        let mut net = BoundedNetwork::new(2 + m + n);
        for &i in &chosen {
            net.add_edge(src, ball_node(i), min_size as i64, n as i64);
        }
        let mut arcs = Vec::new();
        for p in 0..n {
            for &i in &chosen {
                if prob.containing[p] >> i & 1 == 1 {
                    arcs.push((p, i, net.add_edge(ball_node(i), point_node(p), 0, 1)));
                }
            }
            net.add_edge(point_node(p), sink, 1, 1);
        }
        net.add_edge(sink, src, 0, n as i64);
        if net.feasible() {
            let mut ball_of = vec![usize::MAX; n];
            for (p, i, e) in arcs {
                let f = net.flow(e);
                assert!(f == 0 || f == 1, "non-integral flow {f}");
                if f == 1 {
                    ball_of[p] = i;
                }
            }
            assert!(ball_of.iter().all(|&i| i != usize::MAX));
            return Ok(Some(prob.finish(&ball_of)));
        }
    }
    Ok(None)
}

/// Balanced red/blue: a unit path `red -> ball -> blue` pairs two points
/// inside one ball, so a max flow saturating every red point is exactly a
/// balanced assignment.
pub fn assign_balanced(prob: &AssignmentProblem<'_>) -> Result<Option<Clustering>, AssignError> {
    let ConstraintSpec::Balanced { colors } = prob.constraint else {
        return Err(AssignError::WrongKind(prob.constraint.kind_name()));
    };
    if !prob.all_covered() {
        return Ok(None);
    }
    let n = prob.n();
    let m = prob.balls.len();
    let red: Vec<usize> = (0..n).filter(|&p| colors[p] == Color::Red).collect();
    let blue: Vec<usize> = (0..n).filter(|&p| colors[p] == Color::Blue).collect();
    if red.len() != blue.len() {
        return Ok(None);
    }
    let (src, sink) = (0, 1);
    let ball_node = |i: usize| 2 + i;
    let point_node = |p: usize| 2 + m + p;
    let mut net = FlowNetwork::new(2 + m + n);
    let mut red_arcs = Vec::new();
    let mut blue_arcs = Vec::new();
    for &r in &red {
        net.add_edge(src, point_node(r), 1);
        for i in 0..m {
            if prob.containing[r] >> i & 1 == 1 {
                red_arcs.push((r, i, net.add_edge(point_node(r), ball_node(i), 1)));
            }
        }
    }
    for &b in &blue {
        for i in 0..m {
            if prob.containing[b] >> i & 1 == 1 {
                blue_arcs.push((b, i, net.add_edge(ball_node(i), point_node(b), 1)));
            }
        }
        net.add_edge(point_node(b), sink, 1);
    }
    if net.max_flow(src, sink) != red.len() as i64 {
        return Ok(None);
    }
    let mut ball_of = vec![usize::MAX; n];
    for (p, i, e) in red_arcs.into_iter().chain(blue_arcs) {
        let f = net.flow(e);
        assert!(f == 0 || f == 1, "non-integral flow {f}");
        if f == 1 {
            ball_of[p] = i;
        }
    }
    assert!(ball_of.iter().all(|&i| i != usize::MAX));
    Ok(Some(prob.finish(&ball_of)))
}

struct FairSearch<'p> {
    fair: &'p FairRep,
    /// Signatures with their points and allowed ball indices.
    sigs: Vec<(ClassSignature, Vec<usize>, Vec<usize>)>,
    groups: usize,
    size: Vec<usize>,
    /// `count[i][c]`: points of group c assigned to ball i.
    count: Vec<Vec<usize>>,
    rem_total: Vec<usize>,
    rem_with: Vec<Vec<usize>>,
    /// `take[s][j]`: points of signature s sent to its j-th allowed ball.
    take: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl FairSearch<'_> {
    fn apply(&mut self, s: usize, j: usize, amount: usize, add: bool) {
        let ball = self.sigs[s].2[j];
        let class = self.sigs[s].0.class;
        let delta = |x: &mut usize| {
            if add {
                *x += amount
            } else {
                *x -= amount
            }
        };
        delta(&mut self.size[ball]);
        for c in 0..self.groups {
            if class >> c & 1 == 1 {
                delta(&mut self.count[ball][c]);
            }
        }
    }

    fn set_remaining(&mut self, s: usize, add: bool) {
        let (sig, pts, allowed) = &self.sigs[s];
        let amount = pts.len();
        for &ball in allowed {
            if add {
                self.rem_total[ball] += amount;
            } else {
                self.rem_total[ball] -= amount;
            }
            for c in 0..self.groups {
                if sig.class >> c & 1 == 1 {
                    if add {
                        self.rem_with[ball][c] += amount;
                    } else {
                        self.rem_with[ball][c] -= amount;
                    }
                }
            }
        }
    }

    /// Necessary condition: the ball's ranges can still be met by the points
    /// that may yet arrive.
    fn repairable(&self, ball: usize) -> bool {
        let size = self.size[ball];
        if size == 0 {
            return true;
        }
        (0..self.groups).all(|c| {
            let have = self.count[ball][c];
            let with = self.rem_with[ball][c];
            let without = self.rem_total[ball] - with;
            self.fair.alpha[c].below_or_at(have + with, size + with)
                && self.fair.beta[c].above_or_at(have, size + without)
        })
    }

    fn search(&mut self, s: usize) -> Result<bool, AssignError> {
        if s == self.sigs.len() {
            return Ok((0..self.size.len()).all(|i| self.fair.counts_ok(self.size[i], &self.count[i])));
        }
        self.set_remaining(s, false);
        let total = self.sigs[s].1.len();
        let found = self.distribute(s, 0, total)?;
        if !found {
            self.set_remaining(s, true);
        }
        Ok(found)
    }

    fn distribute(&mut self, s: usize, j: usize, left: usize) -> Result<bool, AssignError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(AssignError::SearchBudgetExceeded(self.budget));
        }
        let last = j + 1 == self.sigs[s].2.len();
        let choices: Vec<usize> = if last { vec![left] } else { (0..=left).rev().collect() };
        for amount in choices {
            self.take[s][j] = amount;
            self.apply(s, j, amount, true);
            let ok = if last {
                let allowed = self.sigs[s].2.clone();
                if allowed.iter().all(|&b| self.repairable(b)) {
                    self.search(s + 1)?
                } else {
                    false
                }
            } else {
                self.distribute(s, j + 1, left - amount)?
            };
            if ok {
                return Ok(true);
            }
            self.apply(s, j, amount, false);
        }
        Ok(false)
    }
}

/// `(alpha, beta)`-fair assignment by search over per-signature ball loads.
/// Points sharing a class and a set of containing balls are interchangeable,
/// so any feasible load matrix expands to a per-point assignment.
pub fn assign_fair(prob: &AssignmentProblem<'_>) -> Result<Option<Clustering>, AssignError> {
    let ConstraintSpec::FairRep(fair) = prob.constraint else {
        return Err(AssignError::WrongKind(prob.constraint.kind_name()));
    };
    if !prob.all_covered() {
        return Ok(None);
    }
    let n = prob.n();
    let m = prob.balls.len();
    let membership = fair.membership(n);
    let mut grouped: BTreeMap<(usize, ClassSignature), Vec<usize>> = BTreeMap::new();
    let mut first_seen: HashMap<ClassSignature, usize> = HashMap::new();
    for p in 0..n {
        let sig = ClassSignature { class: membership[p], allowed: prob.containing[p] };
        let first = *first_seen.entry(sig).or_insert(p);
        grouped.entry((first, sig)).or_default().push(p);
    }
    let mut sigs: Vec<(ClassSignature, Vec<usize>, Vec<usize>)> = grouped
        .into_iter()
        .map(|((_, sig), pts)| {
            let allowed = (0..m).filter(|&i| sig.allowed >> i & 1 == 1).collect();
            (sig, pts, allowed)
        })
        .collect();
    // Forced signatures first.
    sigs.sort_by_key(|(sig, pts, _)| (sig.allowed.count_ones() > 1, pts[0]));
    let groups = fair.groups.len();
    let mut search = FairSearch {
        fair,
        take: sigs.iter().map(|(_, _, a)| vec![0; a.len()]).collect(),
        sigs,
        groups,
        size: vec![0; m],
        count: vec![vec![0; groups]; m],
        rem_total: vec![0; m],
        rem_with: vec![vec![0; groups]; m],
        nodes: 0,
        budget: prob.budget,
    };
    for s in 0..search.sigs.len() {
        search.set_remaining(s, true);
    }
    if !search.search(0)? {
        return Ok(None);
    }
    let mut ball_of = vec![usize::MAX; n];
    for (s, (_, pts, allowed)) in search.sigs.iter().enumerate() {
        let mut it = pts.iter();
        for (j, &ball) in allowed.iter().enumerate() {
            for &p in it.by_ref().take(search.take[s][j]) {
                ball_of[p] = ball;
            }
        }
    }
    assert!(ball_of.iter().all(|&i| i != usize::MAX));
    let c = prob.finish(&ball_of);
    debug_assert!(check_feasible(prob.constraint, &c));
    Ok(Some(c))
}

/// Ground truth: tries assignments to containing balls in lexicographic order
/// and returns the first feasible one. Subtrees are memoized on the per-ball
/// class counts, which determine feasibility for every constraint kind.
pub fn assign_exhaustive(prob: &AssignmentProblem<'_>) -> Option<Clustering> {
    if !prob.all_covered() {
        return None;
    }
    let n = prob.n();
    let labels = prob.constraint.point_classes(n);
    let mut classes = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let class_of: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
    let mut state = Exhaustive {
        prob,
        class_of,
        width: classes.len(),
        counts: vec![0; prob.balls.len() * classes.len()],
        ball_of: vec![0; n],
        dead: HashSet::new(),
    };
    state.walk(0).then(|| prob.finish(&state.ball_of))
}

struct Exhaustive<'a, 'p> {
    prob: &'a AssignmentProblem<'p>,
    class_of: Vec<usize>,
    width: usize,
    counts: Vec<u16>,
    ball_of: Vec<usize>,
    dead: HashSet<(usize, Vec<u16>)>,
}

impl Exhaustive<'_, '_> {
    fn walk(&mut self, p: usize) -> bool {
        if p == self.ball_of.len() {
            return check_feasible(self.prob.constraint, &self.prob.finish(&self.ball_of));
        }
        if self.dead.contains(&(p, self.counts.clone())) {
            return false;
        }
        let mut mask = self.prob.containing[p];
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let slot = i * self.width + self.class_of[p];
            self.ball_of[p] = i;
            self.counts[slot] += 1;
            if self.walk(p + 1) {
                return true;
            }
            self.counts[slot] -= 1;
        }
        self.dead.insert((p, self.counts.clone()));
        false
    }
}
