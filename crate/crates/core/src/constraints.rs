//! Mergeable clustering constraints, clusterings, and feasibility predicates.
//!
//! Every constraint here is a function of the point partition alone: center
//! identities never matter, and an empty cluster is always feasible.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{leq_tol, MetricSpace};

/// Maximum number of fairness groups (group membership is kept as a bitmask).
pub const MAX_GROUPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("lower bound must be a positive integer")]
    BadLowerBound,
    #[error("expected {expected} color labels, got {got}")]
    ColorCount { expected: usize, got: usize },
    #[error("group {group} references point {point} outside 0..{n}")]
    GroupMemberOutOfRange { group: usize, point: usize, n: usize },
    #[error("{groups} groups but {alpha} alpha and {beta} beta bounds")]
    BoundsMismatch { groups: usize, alpha: usize, beta: usize },
    #[error("alpha exceeds beta for group {0}")]
    AlphaAboveBeta(usize),
    #[error("bound for group {0} lies outside [0, 1]")]
    BoundOutOfRange(usize),
    #[error("at most {MAX_GROUPS} groups are supported")]
    TooManyGroups,
    #[error("bad family parameters: {0}")]
    BadFamilyParameters(String),
    #[error("{0} is not a center of the clustering")]
    UnknownCenter(usize),
    #[error("center {0} listed twice")]
    DuplicateCenter(usize),
    #[error("point {point} assigned to {center}, which is not a listed center")]
    AssignmentToNonCenter { point: usize, center: usize },
    #[error("cannot parse proportion {0:?}")]
    ParseProportion(String),
}

/// A fairness proportion: exact rational when given as `p/q` (or an integer),
/// otherwise a float compared with relative tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Proportion {
    Exact(Ratio<i64>),
    Real(f64),
}

impl Proportion {
    pub fn exact(num: i64, den: i64) -> Self {
        Proportion::Exact(Ratio::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Proportion::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Proportion::Real(x) => x,
        }
    }

    /// Compares `count` against `self * size`.
    pub fn cmp_scaled(self, count: usize, size: usize) -> Ordering {
        match self {
            Proportion::Exact(r) => {
                let lhs = count as i128 * *r.denom() as i128;
                let rhs = *r.numer() as i128 * size as i128;
                lhs.cmp(&rhs)
            }
            Proportion::Real(x) => {
                let rhs = x * size as f64;
                let lhs = count as f64;
                if leq_tol(lhs, rhs) && leq_tol(rhs, lhs) {
                    Ordering::Equal
                } else {
                    lhs.total_cmp(&rhs)
                }
            }
        }
    }

    /// `count >= self * size`
    #[inline]
    pub fn below_or_at(self, count: usize, size: usize) -> bool {
        self.cmp_scaled(count, size) != Ordering::Less
    }

    /// `count <= self * size`
    #[inline]
    pub fn above_or_at(self, count: usize, size: usize) -> bool {
        self.cmp_scaled(count, size) != Ordering::Greater
    }

    fn in_unit_interval(self) -> bool {
        match self {
            Proportion::Exact(r) => *r.numer() >= 0 && r.numer() <= r.denom(),
            Proportion::Real(x) => (0.0..=1.0).contains(&x),
        }
    }

    fn le(self, other: Proportion) -> bool {
        match (self, other) {
            (Proportion::Exact(a), Proportion::Exact(b)) => a <= b,
            (a, b) => leq_tol(a.to_f64(), b.to_f64()),
        }
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proportion::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Proportion::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Proportion {
    type Err = ConstraintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConstraintError::ParseProportion(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q <= 0 {
                return Err(bad());
            }
            return Ok(Proportion::exact(p, q));
        }
        if let Ok(i) = t.parse::<i64>() {
            return Ok(Proportion::exact(i, 1));
        }
        let x: f64 = t.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(Proportion::Real(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Red,
    Blue,
}

/// `(alpha, beta)`-fair representation over possibly overlapping groups.
#[derive(Debug, Clone, PartialEq)]
pub struct FairRep {
    pub groups: Vec<Vec<usize>>,
    pub alpha: Vec<Proportion>,
    pub beta: Vec<Proportion>,
}

impl FairRep {
    /// Group-membership bitmask of every point.
    pub fn membership(&self, n: usize) -> Vec<u64> {
        let mut mask = vec![0u64; n];
        for (c, g) in self.groups.iter().enumerate() {
            for &p in g {
                if p < n {
                    mask[p] |= 1 << c;
                }
            }
        }
        mask
    }

    /// Whether a cluster of `size` points with `per_group[c]` members of group
    /// `c` respects every range. Empty clusters always do.
    pub fn counts_ok(&self, size: usize, per_group: &[usize]) -> bool {
        size == 0
            || per_group.iter().enumerate().all(|(c, &cnt)| {
                self.alpha[c].below_or_at(cnt, size) && self.beta[c].above_or_at(cnt, size)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    Unconstrained,
    LowerBound { min_size: usize },
    Balanced { colors: Vec<Color> },
    FairRep(FairRep),
}

/// Families of fairness constraints expressible as [`FairRep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairFamily {
    /// No color exceeds a `1/ell` fraction of any cluster.
    EllDiversity { ell: u32 },
    /// Two colors whose ratio in every cluster lies in `[1/t, t]`.
    PairwiseFair { t: Proportion },
    /// Every cluster mirrors the global proportion of each group.
    ExactProportions,
    /// Two colors in equal numbers.
    BalancedAsFair,
}

fn check_partition(groups: &[Vec<usize>], n: usize) -> Result<(), ConstraintError> {
    let mut seen = vec![false; n];
    for (c, g) in groups.iter().enumerate() {
        for &p in g {
            if p >= n {
                return Err(ConstraintError::GroupMemberOutOfRange { group: c, point: p, n });
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(ConstraintError::BadFamilyParameters(format!(
                    "point {p} appears in more than one color"
                )));
            }
        }
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return Err(ConstraintError::BadFamilyParameters(format!(
            "point {p} has no color"
        )));
    }
    Ok(())
}

/// Builds the `(alpha, beta)` ranges of a fairness family over `groups` of an
/// `n`-point space.
pub fn derive_fair_config(
    family: FairFamily,
    groups: Vec<Vec<usize>>,
    n: usize,
) -> Result<ConstraintSpec, ConstraintError> {
    let ell = groups.len();
    let (alpha, beta) = match family {
        FairFamily::EllDiversity { ell: l } => {
            if l == 0 {
                return Err(ConstraintError::BadFamilyParameters("ell must be >= 1".into()));
            }
            check_partition(&groups, n)?;
            (
                vec![Proportion::exact(0, 1); ell],
                vec![Proportion::exact(1, l as i64); ell],
            )
        }
        FairFamily::PairwiseFair { t } => {
            if ell != 2 {
                return Err(ConstraintError::BadFamilyParameters(
                    "pairwise fairness needs exactly two colors".into(),
                ));
            }
            check_partition(&groups, n)?;
            let (lo, hi) = match t {
                Proportion::Exact(r) if r >= Ratio::from_integer(1) => {
                    let (p, q) = (*r.numer(), *r.denom());
                    (Proportion::exact(q, p + q), Proportion::exact(p, p + q))
                }
                Proportion::Real(x) if x >= 1.0 => {
                    (Proportion::Real(1.0 / (1.0 + x)), Proportion::Real(x / (1.0 + x)))
                }
                _ => {
                    return Err(ConstraintError::BadFamilyParameters("t must be >= 1".into()));
                }
            };
            (vec![lo; 2], vec![hi; 2])
        }
        FairFamily::ExactProportions => {
            if n == 0 || ell == 0 {
                return Err(ConstraintError::BadFamilyParameters(
                    "exact proportions need at least one group".into(),
                ));
            }
            let props: Vec<Proportion> = groups
                .iter()
                .map(|g| {
                    let mut uniq = g.clone();
                    uniq.sort_unstable();
                    uniq.dedup();
                    Proportion::exact(uniq.len() as i64, n as i64)
                })
                .collect();
            (props.clone(), props)
        }
        FairFamily::BalancedAsFair => {
            if ell != 2 {
                return Err(ConstraintError::BadFamilyParameters(
                    "balanced clustering needs exactly two colors".into(),
                ));
            }
            check_partition(&groups, n)?;
            (vec![Proportion::exact(1, 2); 2], vec![Proportion::exact(1, 2); 2])
        }
    };
    let spec = ConstraintSpec::FairRep(FairRep { groups, alpha, beta });
    spec.validate(n)?;
    Ok(spec)
}

impl Serialize for Proportion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Proportion::Exact(_) => s.serialize_str(&self.to_string()),
            Proportion::Real(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Proportion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Proportion::exact(i, 1)),
            Raw::Float(x) if x.is_finite() => Ok(Proportion::Real(x)),
            Raw::Float(x) => Err(serde::de::Error::custom(format!("non-finite proportion {x}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Equivalence class of a point with respect to a constraint together with
/// the set of balls (bitmask) that contain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassSignature {
    pub class: u64,
    pub allowed: u64,
}

impl ConstraintSpec {
    pub fn validate(&self, n: usize) -> Result<(), ConstraintError> {
        match self {
            ConstraintSpec::Unconstrained => Ok(()),
            ConstraintSpec::LowerBound { min_size } => {
                if *min_size == 0 {
                    Err(ConstraintError::BadLowerBound)
                } else {
                    Ok(())
                }
            }
            ConstraintSpec::Balanced { colors } => {
                if colors.len() != n {
                    Err(ConstraintError::ColorCount { expected: n, got: colors.len() })
                } else {
                    Ok(())
                }
            }
            ConstraintSpec::FairRep(f) => {
                if f.groups.len() > MAX_GROUPS {
                    return Err(ConstraintError::TooManyGroups);
                }
                if f.alpha.len() != f.groups.len() || f.beta.len() != f.groups.len() {
                    return Err(ConstraintError::BoundsMismatch {
                        groups: f.groups.len(),
                        alpha: f.alpha.len(),
                        beta: f.beta.len(),
                    });
                }
                for (c, g) in f.groups.iter().enumerate() {
                    if let Some(&p) = g.iter().find(|&&p| p >= n) {
                        return Err(ConstraintError::GroupMemberOutOfRange { group: c, point: p, n });
                    }
                    if !f.alpha[c].in_unit_interval() || !f.beta[c].in_unit_interval() {
                        return Err(ConstraintError::BoundOutOfRange(c));
                    }
                    if !f.alpha[c].le(f.beta[c]) {
                        return Err(ConstraintError::AlphaAboveBeta(c));
                    }
                }
                Ok(())
            }
        }
    }

    /// Per-point class labels: points with equal labels are interchangeable
    /// for feasibility.
    pub fn point_classes(&self, n: usize) -> Vec<u64> {
        match self {
            ConstraintSpec::Unconstrained | ConstraintSpec::LowerBound { .. } => vec![0; n],
            ConstraintSpec::Balanced { colors } => colors
                .iter()
                .map(|c| match c {
                    Color::Red => 0,
                    Color::Blue => 1,
                })
                .collect(),
            ConstraintSpec::FairRep(f) => f.membership(n),
        }
    }

    /// Feasibility of a single cluster given by its member list.
    pub fn cluster_ok(&self, members: &[usize]) -> bool {
        if members.is_empty() {
            return true;
        }
        match self {
            ConstraintSpec::Unconstrained => true,
            ConstraintSpec::LowerBound { min_size } => members.len() >= *min_size,
            ConstraintSpec::Balanced { colors } => {
                let red = members.iter().filter(|&&p| colors[p] == Color::Red).count();
                2 * red == members.len()
            }
            ConstraintSpec::FairRep(f) => {
                let per_group: Vec<usize> = f
                    .groups
                    .iter()
                    .map(|g| g.iter().filter(|p| members.contains(p)).count())
                    .collect();
                f.counts_ok(members.len(), &per_group)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintSpec::Unconstrained => "none",
            ConstraintSpec::LowerBound { .. } => "lower_bound",
            ConstraintSpec::Balanced { .. } => "balanced",
            ConstraintSpec::FairRep(_) => "fair",
        }
    }
}

/// A set of distinct centers with a total point-to-center assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    centers: Vec<usize>,
    assignment: Vec<usize>,
}

impl Clustering {
    /// `assignment[p]` is the center point of `p`; every value must be listed
    /// in `centers`, which must be distinct.
    pub fn new(centers: Vec<usize>, assignment: Vec<usize>) -> Result<Self, ConstraintError> {
        let mut sorted = centers.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(ConstraintError::DuplicateCenter(w[0]));
            }
        }
        for (p, &c) in assignment.iter().enumerate() {
            if sorted.binary_search(&c).is_err() {
                return Err(ConstraintError::AssignmentToNonCenter { point: p, center: c });
            }
        }
        Ok(Clustering { centers, assignment })
    }

    /// Builds a clustering from clusters given as member lists aligned with
    /// `centers`.
    pub fn from_clusters(
        centers: Vec<usize>,
        clusters: &[Vec<usize>],
        n: usize,
    ) -> Result<Self, ConstraintError> {
        let mut assignment = vec![usize::MAX; n];
        for (c, members) in centers.iter().zip(clusters) {
            for &p in members {
                assignment[p] = *c;
            }
        }
        if let Some(p) = assignment.iter().position(|&c| c == usize::MAX) {
            return Err(ConstraintError::AssignmentToNonCenter { point: p, center: usize::MAX });
        }
        Self::new(centers, assignment)
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Member lists aligned with `centers()`.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let slot: HashMap<usize, usize> =
            self.centers.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut out = vec![Vec::new(); self.centers.len()];
        for (p, c) in self.assignment.iter().enumerate() {
            out[slot[c]].push(p);
        }
        out
    }

    /// Cluster radii aligned with `centers()`; empty clusters have radius 0.
    pub fn radii(&self, m: &MetricSpace) -> Vec<f64> {
        let slot: HashMap<usize, usize> =
            self.centers.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut r = vec![0.0f64; self.centers.len()];
        for (p, &c) in self.assignment.iter().enumerate() {
            let s = slot[&c];
            r[s] = r[s].max(m.d(c, p));
        }
        r
    }

    pub fn cost(&self, m: &MetricSpace) -> f64 {
        self.radii(m).iter().sum()
    }

    /// Drops centers that receive no points.
    pub fn without_empty(&self) -> Clustering {
        let used: Vec<usize> = self
            .centers
            .iter()
            .copied()
            .filter(|c| self.assignment.contains(c))
            .collect();
        Clustering { centers: used, assignment: self.assignment.clone() }
    }
}

pub fn check_feasible(spec: &ConstraintSpec, clustering: &Clustering) -> bool {
    match spec {
        ConstraintSpec::Unconstrained => true,
        ConstraintSpec::FairRep(f) => {
            // Count via membership masks rather than scanning every group per cluster.
            let mask = f.membership(clustering.n());
            clustering.clusters().iter().all(|members| {
                let mut per_group = vec![0usize; f.groups.len()];
                for &p in members {
                    let mut m = mask[p];
                    while m != 0 {
                        per_group[m.trailing_zeros() as usize] += 1;
                        m &= m - 1;
                    }
                }
                f.counts_ok(members.len(), &per_group)
            })
        }
        _ => clustering.clusters().iter().all(|c| spec.cluster_ok(c)),
    }
}

/// Reassigns every point of clusters `a` and `b` to `new_center`. If
/// `new_center` already heads a third cluster, that cluster is absorbed too.
pub fn merge_clusters(
    clustering: &Clustering,
    a: usize,
    b: usize,
    new_center: usize,
) -> Result<Clustering, ConstraintError> {
    for c in [a, b] {
        if !clustering.centers.contains(&c) {
            return Err(ConstraintError::UnknownCenter(c));
        }
    }
    if new_center >= clustering.n() {
        return Err(ConstraintError::UnknownCenter(new_center));
    }
    let merged = |c: usize| c == a || c == b || c == new_center;
    let assignment = clustering
        .assignment
        .iter()
        .map(|&c| if merged(c) { new_center } else { c })
        .collect();
    let mut centers: Vec<usize> =
        clustering.centers.iter().copied().filter(|&c| !merged(c)).collect();
    centers.push(new_center);
    Clustering::new(centers, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clustering(centers: &[usize], assignment: &[usize]) -> Clustering {
        Clustering::new(centers.to_vec(), assignment.to_vec()).unwrap()
    }

    #[test]
    fn unconstrained_always_feasible() {
        let c = clustering(&[0, 2], &[0, 0, 2]);
        assert!(check_feasible(&ConstraintSpec::Unconstrained, &c));
    }

    #[test]
    fn lower_bound_rejects_singleton() {
        let c = clustering(&[0, 2], &[0, 0, 2]);
        assert!(!check_feasible(&ConstraintSpec::LowerBound { min_size: 2 }, &c));
        assert!(check_feasible(&ConstraintSpec::LowerBound { min_size: 1 }, &c));
    }

    #[test]
    fn balanced_with_empty_cluster() {
        // Center 1 heads an empty cluster.
        let spec = ConstraintSpec::Balanced { colors: vec![Color::Red, Color::Blue] };
        assert!(check_feasible(&spec, &clustering(&[0, 1], &[0, 0])));
        assert!(!check_feasible(&spec, &clustering(&[0, 1], &[0, 1])));
    }

    #[test]
    fn proportion_parsing() {
        assert_eq!("1/3".parse::<Proportion>().unwrap(), Proportion::exact(1, 3));
        assert_eq!("2".parse::<Proportion>().unwrap(), Proportion::exact(2, 1));
        assert_eq!("0.25".parse::<Proportion>().unwrap(), Proportion::Real(0.25));
        assert!("1/0".parse::<Proportion>().is_err());
        assert!("abc".parse::<Proportion>().is_err());
    }

    #[test]
    fn exact_comparison_does_not_round() {
        let third = Proportion::exact(1, 3);
        assert!(third.below_or_at(1, 3));
        assert!(third.above_or_at(1, 3));
        assert!(!third.below_or_at(3, 10));
        assert!(third.above_or_at(3, 10));
    }

    #[test]
    fn pairwise_fair_t1_is_half() {
        let spec = derive_fair_config(
            FairFamily::PairwiseFair { t: Proportion::exact(1, 1) },
            vec![vec![0, 1], vec![2, 3]],
            4,
        )
        .unwrap();
        let ConstraintSpec::FairRep(f) = spec else { panic!() };
        assert_eq!(f.alpha, vec![Proportion::exact(1, 2); 2]);
        assert_eq!(f.beta, vec![Proportion::exact(1, 2); 2]);
    }

    #[test]
    fn ell_diversity_one_is_vacuous() {
        let spec = derive_fair_config(FairFamily::EllDiversity { ell: 1 }, vec![vec![0, 1, 2]], 3)
            .unwrap();
        let ConstraintSpec::FairRep(f) = spec else { panic!() };
        assert_eq!(f.beta, vec![Proportion::exact(1, 1)]);
        assert_eq!(f.alpha, vec![Proportion::exact(0, 1)]);
    }

    #[test]
    fn exact_proportions_thirds() {
        let spec = derive_fair_config(
            FairFamily::ExactProportions,
            vec![vec![0, 1, 2], vec![3, 4, 5, 6, 7, 8]],
            9,
        )
        .unwrap();
        let ConstraintSpec::FairRep(f) = spec else { panic!() };
        assert_eq!(f.alpha, vec![Proportion::exact(1, 3), Proportion::exact(2, 3)]);
        assert_eq!(f.alpha, f.beta);
    }

    #[test]
    fn bad_family_parameters() {
        assert!(matches!(
            derive_fair_config(FairFamily::EllDiversity { ell: 0 }, vec![vec![0]], 1),
            Err(ConstraintError::BadFamilyParameters(_))
        ));
        assert!(matches!(
            derive_fair_config(
                FairFamily::PairwiseFair { t: Proportion::exact(1, 2) },
                vec![vec![0], vec![1]],
                2
            ),
            Err(ConstraintError::BadFamilyParameters(_))
        ));
        assert!(matches!(
            derive_fair_config(FairFamily::BalancedAsFair, vec![vec![0, 1]], 2),
            Err(ConstraintError::BadFamilyParameters(_))
        ));
        assert!(matches!(
            derive_fair_config(FairFamily::BalancedAsFair, vec![vec![0], vec![0, 1]], 2),
            Err(ConstraintError::BadFamilyParameters(_))
        ));
    }

    #[test]
    fn validation_errors() {
        let fair = |a: Proportion, b: Proportion| {
            ConstraintSpec::FairRep(FairRep { groups: vec![vec![0]], alpha: vec![a], beta: vec![b] })
        };
        assert_eq!(
            fair(Proportion::exact(2, 3), Proportion::exact(1, 3)).validate(2),
            Err(ConstraintError::AlphaAboveBeta(0))
        );
        assert_eq!(
            fair(Proportion::exact(0, 1), Proportion::exact(3, 2)).validate(2),
            Err(ConstraintError::BoundOutOfRange(0))
        );
        assert!(matches!(
            ConstraintSpec::Balanced { colors: vec![Color::Red] }.validate(2),
            Err(ConstraintError::ColorCount { .. })
        ));
        assert_eq!(
            ConstraintSpec::LowerBound { min_size: 0 }.validate(2),
            Err(ConstraintError::BadLowerBound)
        );
    }

    #[test]
    fn clustering_validation() {
        assert_eq!(
            Clustering::new(vec![0, 0], vec![0, 0]),
            Err(ConstraintError::DuplicateCenter(0))
        );
        assert!(matches!(
            Clustering::new(vec![0], vec![0, 1]),
            Err(ConstraintError::AssignmentToNonCenter { point: 1, center: 1 })
        ));
    }

    #[test]
    fn radii_and_cost() {
        let m = MetricSpace::from_points(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]).unwrap();
        let c = clustering(&[0, 3, 1], &[0, 0, 3, 3]);
        assert_eq!(c.radii(&m), vec![1.0, 1.0, 0.0]);
        assert_eq!(c.cost(&m), 2.0);
        assert_eq!(c.without_empty().centers(), &[0, 3]);
    }

    #[test]
    fn merge_examples() {
        let c = clustering(&[0, 1, 2], &[0, 0, 2, 2]);
        let merged = merge_clusters(&c, 0, 1, 0).unwrap();
        assert_eq!(merged.clusters().len(), 2);
        assert_eq!(merged.assignment(), &[0, 0, 2, 2]);

        let all = merge_clusters(&clustering(&[0, 2], &[0, 0, 2, 2]), 0, 2, 3).unwrap();
        assert_eq!(all.centers(), &[3]);
        assert_eq!(all.assignment(), &[3, 3, 3, 3]);

        assert_eq!(merge_clusters(&c, 0, 3, 0), Err(ConstraintError::UnknownCenter(3)));

        // A new center that already heads another cluster absorbs it.
        let absorb = merge_clusters(&clustering(&[0, 1, 2], &[0, 1, 2, 2]), 0, 1, 2).unwrap();
        assert_eq!(absorb.centers(), &[2]);
    }
}
