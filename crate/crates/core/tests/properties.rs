mod common;

use std::collections::BTreeSet;

use common::*;
use msr::covers::{feasible_cover_candidates, for_each_candidate_key, greedy_ball_cover, BallCover};
use msr::gen::{random_instance, random_set_cover, ConstraintKind, RandomConfig};
use msr::hardness::reduce;
use msr::io::{ConstraintInput, InstanceFile, ReportFile};
use msr::metric::{BallIndex, Instance, MetricSpace};
use msr::profiles::{enumerate_exact, RadiusProfile};
use msr::solvers::{solve, solve_exact, Pipeline, SolveOptions};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() }
}

fn key_of(index: &BallIndex, cover: &BallCover) -> Vec<(u32, u32)> {
    let mut key: Vec<(u32, u32)> = cover
        .balls()
        .iter()
        .map(|b| (b.center as u32, index.member_count(b.center, b.radius) as u32))
        .collect();
    key.sort_unstable();
    key
}

/// A random metric, a profile from its distances and a greedy cover.
fn metric_with_cover(seed: u64) -> (MetricSpace, RadiusProfile, Vec<BallCover>) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=9);
    let k = r.gen_range(1..=3);
    let m = random_metric(&mut r, n);
    let profiles = enumerate_exact(&m, k);
    let profile = profiles.choose(&mut r).unwrap().clone();
    let covers = greedy_ball_cover(&m, k, &profile).into_iter().map(|g| g.cover).collect();
    (m, profile, covers)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=12);
        let m = random_metric(&mut r, n);
        for i in 0..n {
            prop_assert_eq!(m.d(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(m.d(i, j), m.d(j, i));
                for l in 0..n {
                    prop_assert!(m.d(i, l) <= m.d(i, j) + m.d(j, l) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn one_center_beats_every_fixed_center(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=12);
        let m = random_metric(&mut r, n);
        let mut set: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
        if set.is_empty() {
            set.push(0);
        }
        let (c, radius) = m.one_center(&set).unwrap();
        prop_assert_eq!(radius, m.eccentricity(c, set.iter().copied()));
        for x in 0..n {
            prop_assert!(radius <= m.eccentricity(x, set.iter().copied()));
        }
    }

    #[test]
    fn integer_graphs_give_integer_distances(
        n in 1usize..10,
        raw in prop::collection::vec((0usize..10, 0usize..10, 1u32..20), 0..30),
    ) {
        let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|v| (v - 1, v, 7.0)).collect();
        edges.extend(raw.iter().filter(|e| e.0 < n && e.1 < n).map(|&(u, v, w)| (u, v, w as f64)));
        let m = MetricSpace::from_graph(n, &edges).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m.d(i, j).fract(), 0.0);
            }
        }
    }

    #[test]
    fn optimum_is_invariant_under_relabeling(seed in any::<u64>()) {
        let kind = if seed % 2 == 0 { ConstraintKind::None } else { ConstraintKind::LowerBound { min_size: None } };
        let inst = random_suite_instance(&kind, seed, 2, 9, 3);
        let n = inst.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(seed));
        let rows = inst.metric.to_rows();
        let permuted: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rows[perm[i]][perm[j]]).collect()).collect();
        let other = Instance::new(MetricSpace::from_matrix(&permuted).unwrap(), inst.k, inst.constraint.clone()).unwrap();
        let a = solve_exact(&inst).unwrap().cost;
        let b = solve_exact(&other).unwrap().cost;
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn balanced_as_fair_matches_balanced(seed in any::<u64>()) {
        let inst = random_suite_instance(&ConstraintKind::Balanced, seed, 2, 10, 3);
        let msr::constraints::ConstraintSpec::Balanced { colors } = &inst.constraint else { unreachable!() };
        let mut groups = vec![Vec::new(), Vec::new()];
        for (p, c) in colors.iter().enumerate() {
            groups[(*c == msr::constraints::Color::Blue) as usize].push(p);
        }
        let spec = ConstraintInput::BalancedAsFair { groups }.build(inst.n()).unwrap();
        let fair = Instance::new(inst.metric.clone(), inst.k, spec).unwrap();
        prop_assert_eq!(solve_exact(&inst).unwrap().cost, solve_exact(&fair).unwrap().cost);
        let a = solve(&inst, Pipeline::EightThirds, &SolveOptions::default()).unwrap().cost;
        let b = solve(&fair, Pipeline::EightThirds, &SolveOptions::default()).unwrap().cost;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn greedy_family_is_bounded_and_valid(seed in any::<u64>()) {
        let (m, profile, covers) = metric_with_cover(seed);
        let k = profile.k();
        prop_assert!(covers.len() <= k.pow(k as u32));
        for c in &covers {
            prop_assert!(BallCover::new(&m, c.balls().to_vec(), k).is_ok());
            for b in c.balls() {
                prop_assert!(profile.radii().iter().any(|&r| 2.0 * r == b.radius));
            }
        }
    }

    #[test]
    fn candidate_family_contains_input(seed in any::<u64>()) {
        let (m, profile, covers) = metric_with_cover(seed);
        let k = profile.k();
        let index = BallIndex::new(&m);
        for c in &covers {
            let family = feasible_cover_candidates(c, &profile);
            prop_assert_eq!(&family[0], c);
            prop_assert!(family.len() <= (k + 1).pow(c.len() as u32));
            for f in &family {
                for (b, orig) in f.balls().iter().zip(c.balls()) {
                    prop_assert_eq!(b.center, orig.center);
                    prop_assert!(b.radius >= orig.radius);
                }
            }
            let expected: BTreeSet<Vec<(u32, u32)>> = family.iter().map(|f| key_of(&index, f)).collect();
            let mut visited = Vec::new();
            for_each_candidate_key(&index, c, &profile, |key| visited.push(key.to_vec()));
            let got: BTreeSet<Vec<(u32, u32)>> = visited.iter().cloned().collect();
            prop_assert_eq!(got.len(), visited.len(), "keys repeated");
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn eight_thirds_never_worse_than_four_eps(seed in any::<u64>()) {
        let kinds = all_kinds();
        let kind = &kinds[(seed % kinds.len() as u64) as usize];
        let inst = random_suite_instance(kind, seed, 2, 10, 3);
        let four = solve(&inst, Pipeline::FourEps, &SolveOptions::default()).unwrap();
        let eight = solve(&inst, Pipeline::EightThirds, &SolveOptions::default()).unwrap();
        prop_assert!(eight.cost <= four.cost + 1e-9);
    }

    #[test]
    fn instance_json_round_trips(seed in any::<u64>()) {
        let kinds = all_kinds();
        let mut r = rng(seed);
        let mut n = r.gen_range(2..=12);
        n -= n % 2;
        let cfg = RandomConfig {
            n,
            k: r.gen_range(1..=n.min(3)),
            metric: random_metric_kind(&mut r),
            constraint: kinds.choose(&mut r).unwrap().clone(),
        };
        let file = random_instance(&cfg, seed).unwrap();
        let text = file.to_json();
        let back = InstanceFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_json(), text);
        let a = file.to_instance().unwrap();
        let b = back.to_instance().unwrap();
        prop_assert_eq!(a.metric.to_rows(), b.metric.to_rows());
        prop_assert_eq!(a.constraint, b.constraint);
    }

    #[test]
    fn report_rescores_to_its_cost(seed in any::<u64>()) {
        let kinds = all_kinds();
        let kind = &kinds[(seed % kinds.len() as u64) as usize];
        let inst = random_suite_instance(kind, seed, 2, 10, 3);
        let report = solve(&inst, Pipeline::TwoEps, &SolveOptions::grid(0.5)).unwrap();
        let file = ReportFile::from_solve(&inst, &report, Some(0.5));
        let back = ReportFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.rescore(&inst).unwrap(), report.cost);
    }

    #[test]
    fn reduction_sizes_and_integrality(seed in any::<u64>()) {
        let mut r = rng(seed);
        let universe = r.gen_range(1..=5);
        let k = r.gen_range(1..=3);
        let sc = random_set_cover(&mut r, universe, k, 3).unwrap();
        let out = reduce(&sc).unwrap();
        prop_assert_eq!(out.instance.n(), sc.vertex_count());
        prop_assert_eq!(out.vertex_map.len(), sc.vertex_count());
        prop_assert_eq!(out.edges.len(), sc.edge_count());
        prop_assert_eq!(out.instance.k, k);
        prop_assert_eq!(out.yes_bound + 1, out.no_bound);
        for i in 0..out.instance.n() {
            for j in 0..out.instance.n() {
                prop_assert_eq!(out.instance.metric.d(i, j), out.integer_dist[i][j] as f64);
            }
        }
    }
}
