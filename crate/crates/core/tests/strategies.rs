mod common;

use std::sync::Arc;

use aplab::graph::{Edge, MultiGraph, VertexId};
use aplab::process::{run_process, run_scripted, run_trial, DistributionSpec, Sample, Strategy, StrategyFactory};
use aplab::properties::{
    approx_target, audit_certificate, ContainsEdges, ContainsSubgraph, Hamiltonian, MinDegree, PerfectMatching,
    Property, SmallGraph,
};
use aplab::rng::strategy_stream;
use aplab::strategies::{
    blocks_for_confidence, cleanup_matching, multi_round_boost, parse_strategy, ApproxThenCleanup, CleanupKind,
    FirstEdge, FnFactory, HamiltonStrategy, MatchingState, MatchingStrategy, MinDegreeStrategy, PathSystemState,
    SubgraphStrategy,
};
use common::{e, rng};

// Clean-up completion must stay under C0 * max(√ε·n, n^0.6). C0 frozen from
// a pilot at n = 10^4 with 100 unsaturated vertices (p95 1584, worst 1723).
const CLEANUP_C0: f64 = 2.0;
// Frozen from a 100-seed pilot at n = 10^4.
const APPROX_CLEANUP_MATCHING: f64 = 1.4;
const APPROX_CLEANUP_HAMILTON: f64 = 1.9;

fn v(x: u32) -> VertexId {
    VertexId(x)
}

fn stars(n: usize, centers: &[u32]) -> Vec<Sample> {
    centers.iter().map(|&c| Sample::star(v(c), n)).collect()
}

#[test]
fn matching_on_two_vertices_finishes_in_one_step() {
    for c in 1..=2 {
        let t = run_scripted(2, &stars(2, &[c]), &mut MatchingStrategy::new(2), &PerfectMatching).unwrap();
        assert_eq!(t.stopping_time, Some(1));
    }
}

#[test]
fn augmentation_bookkeeping() {
    // M = {(1,2)}, recorded (1,3); square 2 should take circle 4 and leave
    // {(1,3), (2,4)}.
    let mut m = MatchingState::from_matching(5, &[e(1, 2)]).unwrap();
    m.record_pending(v(1), v(3));
    let mut s = MatchingStrategy::from_state(m);
    let g = MultiGraph::with_edges(5, [e(1, 2), e(1, 3)]).unwrap();
    let chosen = s.decide(1, &g, &Sample::star(v(2), 5), &mut strategy_stream(0, 0)).unwrap();
    assert_eq!(chosen, e(2, 4));
    assert_eq!(s.state().matching_edges(), vec![e(1, 3), e(2, 4)]);
    assert_eq!(s.state().unsaturated().collect::<Vec<_>>(), vec![v(5)]);
}

// Oracle: with three vertices the first two steps build a path on all of
// them, and the last step closes it only if the square is one of the two
// path endpoints. No strategy can do better than 2/3.
#[test]
fn hamilton_on_three_vertices_by_enumeration() {
    let mut wins = 0;
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                let t = run_scripted(3, &stars(3, &[a, b, c]), &mut HamiltonStrategy::new(3), &Hamiltonian).unwrap();
                if let Some(s) = t.stopping_time {
                    assert!(s >= 3, "a triangle needs three edges");
                }
                if t.stopping_time == Some(3) {
                    wins += 1;
                }
            }
        }
    }
    assert_eq!(wins, 18, "Pr[T = 3] should be 2/3");
}

#[test]
fn paths_merge_through_endpoints() {
    let mut p = PathSystemState::from_paths(4, &[vec![v(1), v(2)], vec![v(3), v(4)]]).unwrap();
    p.link(v(2), v(3));
    assert_eq!(p.longest_len(), 3);
    assert_eq!(p.path_vertices(v(1)), vec![v(1), v(2), v(3), v(4)]);
    assert!(p.same_path(v(1), v(4)));
}

/// Runs the matching clean-up from a matching that leaves `unsat` vertices
/// uncovered. Returns the number of steps to a perfect matching.
fn cleanup_steps(n: usize, unsat: usize, seed: u64) -> u64 {
    let pairs: Vec<Edge> = (0..(n - unsat) as u32 / 2).map(|i| e(2 * i + 1, 2 * i + 2)).collect();
    let mut g = MultiGraph::with_edges(n, pairs.iter().copied()).unwrap();
    let mut s = cleanup_matching(MatchingState::from_matching(n, &pairs).unwrap());
    let dist = DistributionSpec::semi_random(n).unwrap();
    let mut env = rng(seed);
    let mut srng = strategy_stream(seed, 1);
    let mut t = 0;
    while s.state().saturated_count() < n - n % 2 {
        t += 1;
        assert!(t <= 100 * n as u64, "clean-up stalled");
        let sample = dist.sample(&mut env);
        let ed = s.decide(t, &g, &sample, &mut srng).unwrap();
        assert!(sample.contains(ed));
        g.add_edge(ed).unwrap();
    }
    audit_certificate(&g, &s.certificate()).unwrap();
    t
}

#[test]
fn cleanup_with_nothing_missing_takes_no_steps() {
    assert_eq!(cleanup_steps(100, 0, 1), 0);
    assert_eq!(cleanup_steps(101, 1, 1), 0);
}

#[test]
fn cleanup_first_step_hits_exactly_the_unsaturated_pair() {
    let n = 50;
    let pairs: Vec<Edge> = (0..24).map(|i| e(2 * i + 1, 2 * i + 2)).collect();
    for c in 1..=n as u32 {
        let mut g = MultiGraph::with_edges(n, pairs.iter().copied()).unwrap();
        let mut s = cleanup_matching(MatchingState::from_matching(n, &pairs).unwrap());
        let ed = s.decide(1, &g, &Sample::star(v(c), n), &mut strategy_stream(0, 0)).unwrap();
        g.add_edge(ed).unwrap();
        assert_eq!(s.state().saturated_count() == n, c > 48, "square {c}");
    }
}

// Direct hits alone give a geometric law with success 2/n per step;
// pending augmentations can only shorten the wait, so the empirical tail
// must sit below the geometric tail.
#[test]
fn cleanup_two_unsaturated_is_at_most_geometric() {
    let n = 100;
    let trials = 4000;
    let times: Vec<u64> = (0..trials).map(|s| cleanup_steps(n, 2, s)).collect();
    let q = 1.0 - 2.0 / n as f64;
    for t in [10u64, 25, 50, 100, 200] {
        let tail = q.powi(t as i32);
        let emp = times.iter().filter(|&&x| x > t).count() as f64 / trials as f64;
        let sd = (tail * (1.0 - tail) / trials as f64).sqrt();
        assert!(emp <= tail + 4.0 * sd, "t={t}: {emp} vs geometric {tail}");
    }
    let mean = times.iter().sum::<u64>() as f64 / trials as f64;
    assert!(mean <= n as f64 / 2.0 * 1.05, "mean {mean}");
}

#[test]
fn cleanup_from_one_percent_unsaturated() {
    let n = 10_000usize;
    let eps: f64 = 0.01;
    let budget = CLEANUP_C0 * (eps.sqrt() * n as f64).max((n as f64).powf(0.6));
    let times: Vec<u64> = (0..100).map(|s| cleanup_steps(n, (eps * n as f64) as usize, 500 + s)).collect();
    let within = times.iter().filter(|&&t| t as f64 <= budget).count();
    let worst = times.iter().max().unwrap();
    println!("clean-up from 100 unsaturated: worst {worst}, budget {budget}");
    assert!(within >= 95, "{within}/100 within {budget}");
}

#[test]
fn path_pattern_is_built_in_two_steps() {
    let n = 10_000;
    let h = SmallGraph::path(3);
    let prop = ContainsSubgraph::new(h.clone(), "p3");
    let dist = DistributionSpec::semi_random(n).unwrap();
    let trials = 500;
    let mut exact = 0;
    for seed in 0..trials {
        let mut s = SubgraphStrategy::new(h.clone(), n, "p3");
        let t = run_process(&dist, &mut s, &prop, 100, seed).unwrap().stopping_time.unwrap();
        assert!(t >= 2);
        if t == 2 {
            exact += 1;
        }
    }
    assert!(exact as f64 >= 0.99 * trials as f64, "{exact}/{trials}");
}

// A tree on k vertices has k - 1 edges and each step adds one edge, so no
// strategy at all can finish earlier. Checked against several strategies.
#[test]
fn trees_need_at_least_one_edge_per_vertex_pair() {
    let n = 30;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let trees = [SmallGraph::path(3), SmallGraph::path(5), SmallGraph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()];
    for h in trees {
        let k = h.n() as u64;
        let prop = ContainsSubgraph::new(h.clone(), "tree");
        for seed in 0..50 {
            let mut builders: Vec<Box<dyn Strategy>> = vec![
                Box::new(SubgraphStrategy::new(h.clone(), n, "tree")),
                Box::new(MinDegreeStrategy::new(1)),
                Box::new(MatchingStrategy::new(n)),
                Box::new(FirstEdge),
            ];
            for b in builders.iter_mut() {
                let tr = run_process(&dist, b.as_mut(), &prop, 50 * n as u64, seed).unwrap();
                if let Some(t) = tr.stopping_time {
                    assert!(t >= k - 1, "{} built a {k}-vertex tree in {t} steps", b.name());
                }
            }
        }
    }
}

#[test]
fn min_degree_circles_go_to_minimum_degree_vertices() {
    let n = 200;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let mut env = rng(77);
    let mut g = MultiGraph::new(n);
    let mut s = MinDegreeStrategy::new(3);
    let mut srng = strategy_stream(77, 0);
    for t in 1..=600 {
        let sample = dist.sample(&mut env);
        let sq = sample.star_center().unwrap();
        let ed = s.decide(t, &g, &sample, &mut srng).unwrap();
        let circle = ed.other(sq);
        let lowest = (1..=n as u32).filter(|&x| x != sq.0).map(|x| g.degree(v(x))).min().unwrap();
        assert_eq!(g.degree(circle), lowest);
        let first = (1..=n as u32).find(|&x| x != sq.0 && g.degree(v(x)) == lowest).unwrap();
        assert_eq!(circle, v(first), "ties go to the lowest index");
        let below = g.count_below(3);
        g.add_edge(ed).unwrap();
        assert!(g.count_below(3) <= below);
    }
}

fn explicit_halves() -> DistributionSpec {
    DistributionSpec::explicit(3, vec![(vec![e(1, 2)], 0.5), (vec![e(2, 3)], 0.5)]).unwrap()
}

// Each block of one step wins iff it is offered {12}: 1 - (1/2)^3.
#[test]
fn boost_of_a_half_strategy_reaches_seven_eighths() {
    let inner: Arc<dyn StrategyFactory> = Arc::new(FnFactory::new("first-edge", |_| Box::new(FirstEdge)));
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    let offers = [Sample::edges(vec![e(1, 2)]), Sample::edges(vec![e(2, 3)])];
    let mut wins = 0;
    for mask in 0..8u32 {
        let seq: Vec<Sample> = (0..3).map(|i| offers[(mask >> i & 1) as usize].clone()).collect();
        let mut s = multi_round_boost(inner.clone(), 1, 3, 3);
        let t = run_scripted(3, &seq, &mut s, &prop).unwrap();
        if t.stopping_time.is_some() {
            wins += 1;
        }
    }
    assert_eq!(wins, 7);
    // The same through the random environment.
    let dist = explicit_halves();
    let trials = 20_000;
    let hits = (0..trials)
        .filter(|&s| run_trial(&dist, &FnFactory::new("b", |_| {
            let inner: Arc<dyn StrategyFactory> = Arc::new(FnFactory::new("first-edge", |_| Box::new(FirstEdge)));
            Box::new(multi_round_boost(inner, 1, 3, 3))
        }), &prop, 3, 9, s).unwrap().stopping_time.is_some())
        .count();
    let p = hits as f64 / trials as f64;
    let sd = (0.875f64 * 0.125 / trials as f64).sqrt();
    assert!((p - 0.875).abs() <= 4.0 * sd, "{p}");
}

#[test]
fn block_counts() {
    assert_eq!(blocks_for_confidence(0.75), 2);
    assert_eq!(blocks_for_confidence(0.5), 1);
    assert_eq!(blocks_for_confidence(0.9), 4);
    assert_eq!(blocks_for_confidence(0.01), 1);
}

#[test]
fn boosted_min_degree_rarely_fails() {
    let n = 1000usize;
    let m = (0.75 * n as f64).ceil() as u64;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let prop = MinDegree::new(1);
    let trials = 400u64;
    let inner = parse_strategy("min-degree:1").unwrap();
    let single = (0..trials)
        .filter(|&s| run_trial(&dist, inner.as_ref(), &prop, m, 3, s).unwrap().stopping_time.is_none())
        .count() as f64
        / trials as f64;
    let boosted = parse_strategy(&format!("boost:min-degree:1:{m}:4")).unwrap();
    let failed = (0..trials)
        .filter(|&s| run_trial(&dist, boosted.as_ref(), &prop, 4 * m, 3, s).unwrap().stopping_time.is_none())
        .count() as f64
        / trials as f64;
    println!("single-block failure {single}, four blocks {failed}");
    assert!(failed <= 0.01);
    assert!(failed <= single.powi(4) + 3.0 / trials as f64);
}

#[test]
fn one_block_boost_replays_the_inner_strategy() {
    let n = 300;
    let dist = DistributionSpec::semi_random(n).unwrap();
    for (id, prop) in [("min-degree:2", Box::new(MinDegree::new(2)) as Box<dyn Property>), ("matching", Box::new(PerfectMatching))] {
        let inner = parse_strategy(id).unwrap();
        for seed in 0..5 {
            let mut plain = inner.build(n);
            let mut boosted = multi_round_boost(inner.clone(), 10 * n as u64, 1, n);
            let a = run_process(&dist, plain.as_mut(), prop.as_ref(), 10 * n as u64, seed).unwrap();
            let b = run_process(&dist, &mut boosted, prop.as_ref(), 10 * n as u64, seed).unwrap();
            assert_eq!(a.steps, b.steps, "{id} seed {seed}");
            assert_eq!(a.stopping_time, b.stopping_time);
        }
    }
}

fn cleanup_fractions(id: &str, prop: &dyn Property, n: usize) -> Vec<f64> {
    let f = parse_strategy(id).unwrap();
    let dist = DistributionSpec::semi_random(n).unwrap();
    (0..100)
        .map(|t| {
            let r = run_trial(&dist, f.as_ref(), prop, 10 * n as u64, 1, t).unwrap();
            (r.stopping_time.unwrap() - r.milestone.unwrap()) as f64 / n as f64
        })
        .collect()
}

#[test]
fn approx_then_cleanup_budgets() {
    let n = 10_000;
    for (id, prop, bound) in [
        ("approx-cleanup:matching", &PerfectMatching as &dyn Property, APPROX_CLEANUP_MATCHING),
        ("approx-cleanup:hamilton", &Hamiltonian, APPROX_CLEANUP_HAMILTON),
    ] {
        let fr = cleanup_fractions(id, prop, n);
        let within = fr.iter().filter(|&&x| x <= bound).count();
        assert!(within >= 95, "{id}: {within}/100 clean-ups within {bound}n");
    }
}

#[test]
fn approx_then_cleanup_on_four_vertices_is_one_stage() {
    assert_eq!(approx_target(4), 0);
    let dist = DistributionSpec::semi_random(4).unwrap();
    for (kind, prop) in [(CleanupKind::Matching, &PerfectMatching as &dyn Property), (CleanupKind::Hamilton, &Hamiltonian)] {
        for seed in 0..20 {
            let mut s = ApproxThenCleanup::new(kind, 4);
            let tr = run_process(&dist, &mut s, prop, 200, seed).unwrap();
            assert!(tr.stopping_time.is_some());
            assert_eq!(s.milestone(), Some(0));
        }
    }
}
