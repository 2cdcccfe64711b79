//! Finite metric spaces, balls and the 1-center primitive shared by every solver.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{ConstraintError, ConstraintSpec};

/// Relative slack used by every comparison that gates feasibility.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`REL_TOL`] relative to the larger magnitude.
#[inline]
pub fn leq_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric must contain at least one point")]
    Empty,
    #[error("distance matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("distance matrix is not symmetric at ({i}, {j})")]
    AsymmetricMatrix { i: usize, j: usize },
    #[error("nonzero diagonal entry at {0}")]
    NonZeroDiagonal(usize),
    #[error("negative distance at ({i}, {j})")]
    NegativeDistance { i: usize, j: usize },
    #[error("non-finite distance at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("triangle inequality violated: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("edge ({u}, {v}) has negative or non-finite weight")]
    NegativeWeight { u: usize, v: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("point set is empty")]
    EmptySet,
    #[error("point {point} out of range for {n} points")]
    PointOutOfRange { point: usize, n: usize },
    #[error("ball radius must be finite and nonnegative, got {0}")]
    BadRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Explicit,
    Graph,
    Euclidean,
}

/// An immutable finite metric stored as a dense row-major distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    provenance: Provenance,
}

impl MetricSpace {
    /// Validates a full distance matrix: square, zero diagonal, nonnegative,
    /// symmetric and satisfying every triangle inequality.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        Self::from_rows(rows, Provenance::Explicit)
    }

    fn from_rows(rows: &[Vec<f64>], provenance: Provenance) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), n });
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(MetricError::NonZeroDiagonal(i));
            }
            for j in 0..n {
                let d = rows[i][j];
                if !d.is_finite() {
                    return Err(MetricError::NonFinite { i, j });
                }
                if d < 0.0 {
                    return Err(MetricError::NegativeDistance { i, j });
                }
                if j > i {
                    let e = rows[j][i];
                    if (d - e).abs() > REL_TOL * d.abs().max(e.abs()) {
                        return Err(MetricError::AsymmetricMatrix { i, j });
                    }
                    dist[i * n + j] = d;
                    dist[j * n + i] = d;
                }
            }
        }
        let m = MetricSpace { n, dist, provenance };
        m.check_triangle()?;
        Ok(m)
    }

    fn check_triangle(&self) -> Result<(), MetricError> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist[i * n + j];
                for k in 0..n {
                    if !leq_tol(self.dist[i * n + k], dij + self.dist[j * n + k]) {
                        return Err(MetricError::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Shortest-path metric of a connected undirected graph. Integer weights are
    /// summed in exact integer arithmetic before conversion.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(MetricError::VertexOutOfRange { vertex: x, n });
                }
            }
            if !w.is_finite() || w < 0.0 {
                return Err(MetricError::NegativeWeight { u, v });
            }
        }
        let integral = edges
            .iter()
            .all(|&(_, _, w)| w.fract() == 0.0 && w <= (1u64 << 52) as f64);
        let rows: Vec<Vec<f64>> = if integral {
            let int_edges: Vec<(usize, usize, u64)> =
                edges.iter().map(|&(u, v, w)| (u, v, w as u64)).collect();
            integer_shortest_paths(n, &int_edges)
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|d| d.map(|d| d as f64).ok_or(MetricError::DisconnectedGraph))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<_, _>>()?
        } else {
            let mut d = vec![vec![f64::INFINITY; n]; n];
            for (i, row) in d.iter_mut().enumerate() {
                row[i] = 0.0;
            }
            for &(u, v, w) in edges {
                if w < d[u][v] {
                    d[u][v] = w;
                    d[v][u] = w;
                }
            }
            for via in 0..n {
                for i in 0..n {
                    let a = d[i][via];
                    if a.is_infinite() {
                        continue;
                    }
                    for j in 0..n {
                        let cand = a + d[via][j];
                        if cand < d[i][j] {
                            d[i][j] = cand;
                        }
                    }
                }
            }
            if d.iter().flatten().any(|x| x.is_infinite()) {
                return Err(MetricError::DisconnectedGraph);
            }
            d
        };
        Self::from_rows(&rows, Provenance::Graph)
    }

    /// Euclidean metric over points given by coordinates.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = points.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(MetricError::DimensionMismatch);
        }
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
        Self::from_rows(&rows, Provenance::Euclidean)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Distinct positive pairwise distances, ascending.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut ds: Vec<f64> = (0..self.n)
            .flat_map(|i| ((i + 1)..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.d(i, j))
            .filter(|&d| d > 0.0)
            .collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        ds
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Closed ball membership with relative slack on the radius.
    #[inline]
    pub fn in_ball(&self, b: &Ball, p: usize) -> bool {
        self.d(b.center, p) <= b.radius * (1.0 + REL_TOL)
    }

    pub fn ball_members(&self, b: &Ball) -> Vec<usize> {
        (0..self.n).filter(|&p| self.in_ball(b, p)).collect()
    }

    pub fn ball_mask(&self, b: &Ball) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.n);
        for p in 0..self.n {
            if self.in_ball(b, p) {
                set.insert(p);
            }
        }
        set
    }

    /// Max distance from `center` to any point of `set`.
    pub fn eccentricity<I>(&self, center: usize, set: I) -> f64
    where
        I: IntoIterator<Item = usize>,
    {
        let row = self.row(center);
        set.into_iter().map(|q| row[q]).fold(0.0, f64::max)
    }

    /// The point of the whole space minimizing its maximum distance to `set`
    /// (lowest index on ties), together with that radius.
    pub fn one_center(&self, set: &[usize]) -> Result<(usize, f64), MetricError> {
        if set.is_empty() {
            return Err(MetricError::EmptySet);
        }
        if let Some(&p) = set.iter().find(|&&p| p >= self.n) {
            return Err(MetricError::PointOutOfRange { point: p, n: self.n });
        }
        let mut best = (0, f64::INFINITY);
        for c in 0..self.n {
            let r = self.eccentricity(c, set.iter().copied());
            if r < best.1 {
                best = (c, r);
            }
        }
        Ok(best)
    }
}

/// All-pairs shortest paths over nonnegative integer weights; `None` marks
/// unreachable pairs.
pub fn integer_shortest_paths(n: usize, edges: &[(usize, usize, u64)]) -> Vec<Vec<Option<u64>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0u64);
    }
    for &(u, v, w) in edges {
        if d[u][v].map_or(true, |cur| w < cur) {
            d[u][v] = Some(w);
            d[v][u] = Some(w);
        }
    }
    for via in 0..n {
        for i in 0..n {
            let Some(a) = d[i][via] else { continue };
            for j in 0..n {
                if let Some(b) = d[via][j] {
                    if d[i][j].map_or(true, |cur| a + b < cur) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// A closed ball `{p : d(center, p) <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: usize, radius: f64) -> Result<Self, MetricError> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(MetricError::BadRadius(radius));
        }
        Ok(Ball { center, radius })
    }
}

/// Per-center distance rows sorted ascending, used to snap a nominal radius to
/// the point set it actually covers.
#[derive(Debug, Clone)]
pub struct BallIndex {
    n: usize,
    sorted: Vec<Vec<(f64, usize)>>,
}

impl BallIndex {
    pub fn new(m: &MetricSpace) -> Self {
        let sorted = (0..m.len())
            .map(|c| {
                let mut row: Vec<(f64, usize)> =
                    m.row(c).iter().copied().zip(0..m.len()).collect();
                row.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                row
            })
            .collect();
        BallIndex { n: m.len(), sorted }
    }

    /// Number of points within `radius` of `center` (same slack as `in_ball`).
    /// Balls with equal counts around the same center have identical members.
    #[inline]
    pub fn member_count(&self, center: usize, radius: f64) -> usize {
        let lim = radius * (1.0 + REL_TOL);
        self.sorted[center].partition_point(|&(d, _)| d <= lim)
    }

    /// Distance to the farthest member among the first `count` points.
    #[inline]
    pub fn effective_radius(&self, center: usize, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.sorted[center][count - 1].0
        }
    }

    pub fn members(&self, center: usize, count: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.n);
        for &(_, p) in &self.sorted[center][..count] {
            set.insert(p);
        }
        set
    }
}

/// A k-MSR instance: metric, cluster budget and mergeable constraint.
#[derive(Debug, Clone)]
pub struct Instance {
    pub metric: MetricSpace,
    pub k: usize,
    pub constraint: ConstraintSpec,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("cluster budget k = {k} must satisfy 1 <= k <= n = {n}")]
    BadK { k: usize, n: usize },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

impl Instance {
    pub fn new(metric: MetricSpace, k: usize, constraint: ConstraintSpec) -> Result<Self, InstanceError> {
        if k == 0 || k > metric.len() {
            return Err(InstanceError::BadK { k, n: metric.len() });
        }
        constraint.validate(metric.len())?;
        Ok(Instance { metric, k, constraint })
    }

    pub fn unconstrained(metric: MetricSpace, k: usize) -> Result<Self, InstanceError> {
        Self::new(metric, k, ConstraintSpec::Unconstrained)
    }

    pub fn n(&self) -> usize {
        self.metric.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> MetricSpace {
        MetricSpace::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_point_matrix() {
        let m = MetricSpace::from_matrix(&[vec![0.0]]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.provenance(), Provenance::Explicit);
    }

    #[test]
    fn two_point_matrix() {
        let m = MetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(m.d(0, 1), 1.0);
    }

    #[test]
    fn triangle_violation_detected() {
        let rows = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        assert!(matches!(
            MetricSpace::from_matrix(&rows),
            Err(MetricError::TriangleViolation { .. })
        ));
    }

    #[test]
    fn matrix_errors() {
        assert_eq!(
            MetricSpace::from_matrix(&[vec![0.0, 1.0], vec![2.0, 0.0]]),
            Err(MetricError::AsymmetricMatrix { i: 0, j: 1 })
        );
        assert_eq!(
            MetricSpace::from_matrix(&[vec![0.0, -1.0], vec![-1.0, 0.0]]),
            Err(MetricError::NegativeDistance { i: 0, j: 1 })
        );
        assert_eq!(MetricSpace::from_matrix(&[]), Err(MetricError::Empty));
        assert!(matches!(
            MetricSpace::from_matrix(&[vec![0.0, 1.0]]),
            Err(MetricError::NotSquare { .. })
        ));
    }

    #[test]
    fn graph_path_and_single_edge() {
        let m = MetricSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(m.d(0, 2), 2.0);
        let m = MetricSpace::from_graph(2, &[(0, 1, 5.0)]).unwrap();
        assert_eq!(m.d(0, 1), 5.0);
        assert_eq!(m.provenance(), Provenance::Graph);
    }

    #[test]
    fn graph_errors() {
        assert_eq!(
            MetricSpace::from_graph(3, &[(0, 1, 1.0)]),
            Err(MetricError::DisconnectedGraph)
        );
        assert_eq!(
            MetricSpace::from_graph(2, &[(0, 1, -1.0)]),
            Err(MetricError::NegativeWeight { u: 0, v: 1 })
        );
        assert_eq!(
            MetricSpace::from_graph(3, &[(0, 1, 0.5)]),
            Err(MetricError::DisconnectedGraph)
        );
    }

    #[test]
    fn fractional_graph_weights() {
        let m = MetricSpace::from_graph(3, &[(0, 1, 0.25), (1, 2, 0.5), (0, 2, 2.0)]).unwrap();
        assert_eq!(m.d(0, 2), 0.75);
    }

    #[test]
    fn ball_members_examples() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(m.ball_members(&Ball::new(0, 2.0).unwrap()), vec![0, 1]);
        assert_eq!(m.ball_members(&Ball::new(2, 0.0).unwrap()), vec![2]);
        assert_eq!(m.ball_members(&Ball::new(3, m.diameter()).unwrap()), vec![0, 1, 2, 3]);
        let dup = line(&[0.0, 0.0, 4.0]);
        assert_eq!(dup.ball_members(&Ball::new(1, 0.0).unwrap()), vec![0, 1]);
    }

    #[test]
    fn ball_rejects_bad_radius() {
        assert!(Ball::new(0, -1.0).is_err());
        assert!(Ball::new(0, f64::NAN).is_err());
    }

    #[test]
    fn one_center_examples() {
        let m = line(&[0.0, 1.0, 2.0]);
        assert_eq!(m.one_center(&[0, 1, 2]).unwrap(), (1, 1.0));
        assert_eq!(m.one_center(&[2]).unwrap(), (2, 0.0));
        assert_eq!(m.one_center(&[]), Err(MetricError::EmptySet));
        // The center may lie outside the set.
        assert_eq!(m.one_center(&[0, 2]).unwrap(), (1, 1.0));
    }

    #[test]
    fn ball_index_snapping() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        let idx = BallIndex::new(&m);
        assert_eq!(idx.member_count(0, 2.0), 2);
        assert_eq!(idx.effective_radius(0, 2), 1.0);
        assert_eq!(idx.member_count(0, 0.0), 1);
        assert_eq!(idx.member_count(0, 11.0), 4);
        let members: Vec<usize> = idx.members(2, idx.member_count(2, 1.0)).ones().collect();
        assert_eq!(members, vec![2, 3]);
    }

    #[test]
    fn distinct_distances_sorted() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(m.distinct_distances(), vec![1.0, 9.0, 10.0, 11.0]);
    }
}
