//! Ball covers and the two branching procedures that produce them: the greedy
//! ball cover (one guessed profile index per picked point) and the feasible
//! cover candidates (every expansion of every ball by one profile entry).

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::metric::{Ball, BallIndex, MetricSpace};
use crate::profiles::RadiusProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("{got} balls exceed the budget k = {k}")]
    TooManyBalls { got: usize, k: usize },
    #[error("two balls share center {0}")]
    DuplicateCenter(usize),
    #[error("point {0} is not covered")]
    Uncovered(usize),
    #[error("ball center {0} out of range")]
    CenterOutOfRange(usize),
}

/// At most k center-disjoint balls whose union is the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCover {
    balls: Vec<Ball>,
}

impl BallCover {
    pub fn new(m: &MetricSpace, balls: Vec<Ball>, k: usize) -> Result<Self, CoverError> {
        if balls.len() > k {
            return Err(CoverError::TooManyBalls { got: balls.len(), k });
        }
        let mut seen = HashSet::new();
        for b in &balls {
            if b.center >= m.len() {
                return Err(CoverError::CenterOutOfRange(b.center));
            }
            if !seen.insert(b.center) {
                return Err(CoverError::DuplicateCenter(b.center));
            }
        }
        if let Some(p) = (0..m.len()).find(|&p| !balls.iter().any(|b| m.in_ball(b, p))) {
            return Err(CoverError::Uncovered(p));
        }
        Ok(BallCover { balls })
    }

    pub(crate) fn from_balls_unchecked(balls: Vec<Ball>) -> Self {
        BallCover { balls }
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn cost(&self) -> f64 {
        cover_cost(&self.balls)
    }

    /// Multiset identity of the cover: `(center, radius bits)` sorted.
    fn identity(&self) -> Vec<(usize, u64)> {
        let mut id: Vec<(usize, u64)> =
            self.balls.iter().map(|b| (b.center, b.radius.to_bits())).collect();
        id.sort_unstable();
        id
    }
}

pub fn cover_cost(balls: &[Ball]) -> f64 {
    balls.iter().map(|b| b.radius).sum()
}

/// The guesses made along one greedy branch: each picked point with the
/// profile index assigned to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbcBranchTrace {
    pub picks: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbcCover {
    pub cover: BallCover,
    pub trace: GbcBranchTrace,
}

/// Greedy ball cover over all index guesses.
///
/// Each step picks the uncovered point of lowest index and branches over the
/// profile indices; the branch places `ball(p, 2 r_i)` and removes its members.
/// A branch succeeds when everything is covered within k picks. Indices with
/// equal radii produce identical subtrees, so only the first one is explored.
/// The family is deduplicated and has at most `k^k` members.
pub fn greedy_ball_cover(m: &MetricSpace, k: usize, profile: &RadiusProfile) -> Vec<GbcCover> {
    let radii = profile.radii();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut covered = FixedBitSet::with_capacity(m.len());
    let mut balls = Vec::with_capacity(k);
    let mut picks = Vec::with_capacity(k);
    gbc_branch(m, k, radii, &mut covered, &mut balls, &mut picks, &mut seen, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn gbc_branch(
    m: &MetricSpace,
    k: usize,
    radii: &[f64],
    covered: &mut FixedBitSet,
    balls: &mut Vec<Ball>,
    picks: &mut Vec<(usize, usize)>,
    seen: &mut HashSet<Vec<(usize, u64)>>,
    out: &mut Vec<GbcCover>,
) {
    let Some(p) = covered.zeroes().next() else {
        let cover = BallCover::from_balls_unchecked(balls.clone());
        if seen.insert(cover.identity()) {
            out.push(GbcCover { cover, trace: GbcBranchTrace { picks: picks.clone() } });
        }
        return;
    };
    if balls.len() == k {
        return;
    }
    for (i, &r) in radii.iter().enumerate() {
        if radii[..i].contains(&r) {
            continue;
        }
        let ball = Ball { center: p, radius: 2.0 * r };
        let before = covered.clone();
        for q in 0..m.len() {
            if m.in_ball(&ball, q) {
                covered.insert(q);
            }
        }
        balls.push(ball);
        picks.push((p, i));
        gbc_branch(m, k, radii, covered, balls, picks, seen, out);
        picks.pop();
        balls.pop();
        *covered = before;
    }
}

/// Every expansion of `cover`: for each tuple `t` in `({0} ∪ [k])^m`, ball `l`
/// stays as is when `t_l = 0` and grows by `r_{t_l}` otherwise. The family is
/// deduplicated, has at most `(k+1)^m` members and starts with the input cover.
pub fn feasible_cover_candidates(cover: &BallCover, profile: &RadiusProfile) -> Vec<BallCover> {
    let radii = profile.radii();
    let k = radii.len();
    let m = cover.len();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut tuple = vec![0usize; m];
    loop {
        let balls: Vec<Ball> = cover
            .balls
            .iter()
            .zip(&tuple)
            .map(|(b, &t)| {
                if t == 0 {
                    *b
                } else {
                    Ball { center: b.center, radius: b.radius + radii[t - 1] }
                }
            })
            .collect();
        let cand = BallCover::from_balls_unchecked(balls);
        if seen.insert(cand.identity()) {
            out.push(cand);
        }
        // Odometer over ({0} ∪ [k])^m, first coordinate slowest.
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] <= k {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

/// A cover identified by what it actually covers: `(center, member count)`
/// pairs sorted by center, where the members are the `count` nearest points
/// of the center (see [`BallIndex`]). Covers with equal keys have identical
/// ball memberships and yield identical assignments and merges.
pub type CoverKey = Vec<(u32, u32)>;

/// Realizes a key as balls with their effective radii (distance to the
/// farthest member), ordered by center.
pub fn cover_from_key(index: &BallIndex, key: &[(u32, u32)]) -> BallCover {
    BallCover::from_balls_unchecked(
        key.iter()
            .map(|&(c, cnt)| Ball {
                center: c as usize,
                radius: index.effective_radius(c as usize, cnt as usize),
            })
            .collect(),
    )
}

/// The feasible-cover candidates of `cover` reduced to distinct effective
/// keys, visited in odometer order. Returns the number of nominal tuples the
/// reduction stands for.
pub fn for_each_candidate_key<F>(
    index: &BallIndex,
    cover: &BallCover,
    profile: &RadiusProfile,
    mut visit: F,
) -> u64
where
    F: FnMut(&[(u32, u32)]),
{
    let values = profile.distinct_values();
    let mut order: Vec<usize> = (0..cover.len()).collect();
    order.sort_by_key(|&l| cover.balls[l].center);
    // Distinct member counts reachable by each ball, in expansion order.
    let options: Vec<Vec<u32>> = order
        .iter()
        .map(|&l| {
            let b = cover.balls[l];
            let mut opts: Vec<u32> = Vec::with_capacity(values.len() + 1);
            for extra in std::iter::once(0.0).chain(values.iter().copied()) {
                let cnt = index.member_count(b.center, b.radius + extra) as u32;
                if !opts.contains(&cnt) {
                    opts.push(cnt);
                }
            }
            opts
        })
        .collect();
    let centers: Vec<u32> = order.iter().map(|&l| cover.balls[l].center as u32).collect();
    let m = centers.len();
    let mut pos = vec![0usize; m];
    let mut key: Vec<(u32, u32)> = centers.iter().zip(&options).map(|(&c, o)| (c, o[0])).collect();
    loop {
        visit(&key);
        let mut i = m;
        loop {
            if i == 0 {
                return (profile.k() as u64 + 1).pow(m as u32);
            }
            i -= 1;
            pos[i] += 1;
            if pos[i] < options[i].len() {
                key[i].1 = options[i][pos[i]];
                break;
            }
            pos[i] = 0;
            key[i].1 = options[i][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> MetricSpace {
        MetricSpace::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn gbc_single_point() {
        let m = MetricSpace::from_matrix(&[vec![0.0]]).unwrap();
        let fam = greedy_ball_cover(&m, 1, &RadiusProfile::new(vec![0.0], 1));
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].cover.balls(), &[Ball { center: 0, radius: 0.0 }]);
    }

    #[test]
    fn gbc_line_two_picks() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        let fam = greedy_ball_cover(&m, 2, &RadiusProfile::new(vec![1.0, 1.0], 2));
        let want = [Ball { center: 0, radius: 2.0 }, Ball { center: 2, radius: 2.0 }];
        let hit = fam.iter().find(|g| g.cover.balls() == want).expect("two-pick branch");
        assert_eq!(hit.cover.cost(), 4.0);
        assert_eq!(hit.trace.picks, vec![(0, 0), (2, 0)]);
    }

    #[test]
    fn gbc_single_ball_when_first_pick_covers() {
        let m = line(&[0.0, 1.0, 2.0]);
        let fam = greedy_ball_cover(&m, 2, &RadiusProfile::new(vec![1.0, 0.0], 2));
        assert!(fam.iter().any(|g| g.cover.len() == 1));
    }

    #[test]
    fn gbc_failed_branches_dropped() {
        let m = line(&[0.0, 10.0, 20.0]);
        let fam = greedy_ball_cover(&m, 1, &RadiusProfile::new(vec![1.0], 1));
        assert!(fam.is_empty());
    }

    #[test]
    fn gbc_cost_is_twice_guessed_radii() {
        let m = line(&[0.0, 1.0, 3.0, 7.0, 8.0]);
        let profile = RadiusProfile::new(vec![2.0, 1.0, 0.5], 3);
        for g in greedy_ball_cover(&m, 3, &profile) {
            let guessed: f64 = g.trace.picks.iter().map(|&(_, i)| profile.radii()[i]).sum();
            assert_eq!(g.cover.cost(), 2.0 * guessed);
            assert!(BallCover::new(&m, g.cover.balls().to_vec(), 3).is_ok());
        }
    }

    #[test]
    fn fc_identity_and_single_ball() {
        let m = line(&[0.0, 1.0]);
        let cover = BallCover::new(&m, vec![Ball { center: 0, radius: 1.0 }], 1).unwrap();
        let fam = feasible_cover_candidates(&cover, &RadiusProfile::new(vec![3.0], 1));
        assert_eq!(fam.len(), 2);
        assert_eq!(fam[0], cover);
        assert_eq!(fam[1].balls()[0].radius, 4.0);
    }

    #[test]
    fn fc_expands_second_ball_by_third_radius() {
        // Two greedy balls 2r1, 2r2 and one optimal cluster without a greedy center.
        let (r1, r2, r3) = (3.0, 2.0, 1.0);
        let m = line(&[0.0, 6.0, 20.0, 24.0, 25.0]);
        let cover = BallCover::from_balls_unchecked(vec![
            Ball { center: 0, radius: 2.0 * r1 },
            Ball { center: 2, radius: 2.0 * r2 },
        ]);
        let profile = RadiusProfile::new(vec![r1, r2, r3], 3);
        let fam = feasible_cover_candidates(&cover, &profile);
        let target = fam
            .iter()
            .find(|c| c.balls()[0].radius == 2.0 * r1 && c.balls()[1].radius == 2.0 * r2 + r3)
            .unwrap();
        assert_eq!(target.cost(), 2.0 * r1 + 2.0 * r2 + r3);
        assert!(BallCover::new(&m, target.balls().to_vec(), 3).is_ok());
        assert!(fam.len() <= 16);
    }

    #[test]
    fn cover_cost_examples() {
        assert_eq!(cover_cost(&[]), 0.0);
        assert_eq!(
            cover_cost(&[Ball { center: 0, radius: 2.0 }, Ball { center: 1, radius: 3.0 }]),
            5.0
        );
    }

    #[test]
    fn cover_validation() {
        let m = line(&[0.0, 5.0]);
        assert_eq!(
            BallCover::new(&m, vec![Ball { center: 0, radius: 1.0 }], 1),
            Err(CoverError::Uncovered(1))
        );
        assert_eq!(
            BallCover::new(
                &m,
                vec![Ball { center: 0, radius: 9.0 }, Ball { center: 0, radius: 1.0 }],
                2
            ),
            Err(CoverError::DuplicateCenter(0))
        );
        assert!(matches!(
            BallCover::new(
                &m,
                vec![Ball { center: 0, radius: 9.0 }, Ball { center: 1, radius: 1.0 }],
                1
            ),
            Err(CoverError::TooManyBalls { .. })
        ));
    }

    #[test]
    fn candidate_keys_match_nominal_family() {
        let m = line(&[0.0, 1.0, 3.0, 7.0, 8.0, 12.0]);
        let index = BallIndex::new(&m);
        let profile = RadiusProfile::new(vec![2.0, 1.0, 0.5], 3);
        for g in greedy_ball_cover(&m, 3, &profile) {
            let mut keys = HashSet::new();
            for_each_candidate_key(&index, &g.cover, &profile, |k| {
                keys.insert(k.to_vec());
            });
            let nominal: HashSet<CoverKey> = feasible_cover_candidates(&g.cover, &profile)
                .iter()
                .map(|c| {
                    let mut key: CoverKey = c
                        .balls()
                        .iter()
                        .map(|b| (b.center as u32, index.member_count(b.center, b.radius) as u32))
                        .collect();
                    key.sort_unstable();
                    key
                })
                .collect();
            assert_eq!(keys, nominal);
        }
    }
}
