mod common;

use aplab::martingale::{
    boost_schedule, couple_balanced, exact_doob, find_potential, is_balanced, potential_boost_run, rational,
    tail_bound_check, verify_quantify_boost, BoostParams, DiscreteMartingale, Factor, FiniteProductSpace,
    MartingaleError, Rational, RationalDistribution,
};
use aplab::properties::ContainsEdges;
use aplab::strategies::{FirstEdge, FnFactory};
use common::{brute_tail, check_coupling, e, random_martingale, rng, tower};
use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};
use rand::Rng;

fn two_subset() -> RationalDistribution {
    RationalDistribution::new(3, vec![(vec![e(1, 2)], rational(1, 2)), (vec![e(2, 3)], rational(1, 2))]).unwrap()
}

fn first_edge() -> FnFactory {
    FnFactory::new("first-edge", |_| Box::new(FirstEdge))
}

// Hand enumeration: X_1 = {12} wins, X_1 = {23} loses, so f_0 = 1/2,
// f_1 = (1, 0). With m* = 1 and θ = 1/2, C = 2 and c² = (1/16)/4 = 1/64.
// {23} has witness {12} (gain 1 > 1/8), so Pr[τ <= 1] = 1/2 and the
// boosted strategy always wins.
#[test]
fn two_subset_by_hand() {
    let dist = two_subset();
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    let doob = exact_doob(&dist, &first_edge(), &prop, 1).unwrap();
    assert_eq!(*doob.mu(), rational(1, 2));
    assert_eq!(doob.level(1), &[rational(1, 1), rational(0, 1)]);
    let params = BoostParams::new(rational(1, 2), doob.mu().clone(), 1).unwrap();
    assert_eq!(params.c_squared, rational(1, 64));
    let pot = find_potential(&doob, &params);
    assert_eq!(pot.witness(1, 1), Some(0));
    assert_eq!(pot.witness(1, 0), None);
    assert_eq!(pot.pr_tau_le_n, rational(1, 2));
    let boost = potential_boost_run(&dist, &first_edge(), &prop, &doob, &params).unwrap();
    assert_eq!(boost.boosted_win, "1");
    assert_eq!(boost.boosted_win_replay, "1");
    // 1 >= 1/2 + (1/8)(1/2) = 9/16
    assert!(boost.lower_bound && boost.all_hold());
    let q = verify_quantify_boost(&doob, &params).unwrap();
    assert_eq!(q.bound, "1/4");
    assert!(q.holds);
}

#[test]
fn always_winning_strategy_has_constant_doob() {
    let dist = RationalDistribution::new(3, vec![
        (vec![e(1, 2)], rational(1, 3)),
        (vec![e(1, 2), e(2, 3)], rational(2, 3)),
    ])
    .unwrap();
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    let doob = exact_doob(&dist, &first_edge(), &prop, 3).unwrap();
    for j in 0..=3 {
        assert!(doob.level(j).iter().all(|v| v.is_one()));
    }
    assert!(doob.check_tower());
    let params = BoostParams::new(rational(1, 2), doob.mu().clone(), 2).unwrap();
    let pot = find_potential(&doob, &params);
    assert!(pot.pr_tau_le_n.is_zero());
    let boost = potential_boost_run(&dist, &first_edge(), &prop, &doob, &params).unwrap();
    assert_eq!(boost.boosted_win, "1");
    let q = verify_quantify_boost(&doob, &params).unwrap();
    assert_eq!(q.bound, "0");
    assert!(q.holds);
}

#[test]
fn no_potential_means_no_change() {
    // With c = 2 no gain in [0, 1] can exceed c.
    let dist = two_subset();
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    let doob = exact_doob(&dist, &first_edge(), &prop, 2).unwrap();
    let params = BoostParams::new(rational(1, 2), doob.mu().clone(), 1).unwrap();
    let tight = BoostParams { c_squared: rational(4, 1), ..params };
    let r = potential_boost_run(&dist, &first_edge(), &prop, &doob, &tight).unwrap();
    assert_eq!(r.pr_tau_le_n, "0");
    assert_eq!(r.boosted_win, r.mu);
    assert!(r.all_hold());
}

#[test]
fn quantify_rejects_out_of_regime() {
    let dist = two_subset();
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    let doob = exact_doob(&dist, &first_edge(), &prop, 3).unwrap();
    // N = 3 > C(1/2)·1 = 2
    let params = BoostParams::new(rational(1, 2), doob.mu().clone(), 1).unwrap();
    assert!(matches!(verify_quantify_boost(&doob, &params), Err(MartingaleError::Precondition(_))));
}

#[test]
fn fuzz_conforming_boost_instances() {
    let (instances, _) = common::conforming_instances(11, 60);
    for (i, c) in instances.iter().enumerate() {
        assert!(c.doob.check_tower(), "instance {}", i);
        let pot = find_potential(&c.doob, &c.params);
        let m = DiscreteMartingale::from_doob(&c.doob, vec![c.params.c_squared.clone(); c.inst.horizon]).unwrap();
        let total = c.doob.space().level_size(c.inst.horizon);
        for x in 0..total {
            assert_eq!(common::brute_stable(&m, x), pot.is_stable(x), "instance {} outcome {}", i, x);
        }
        let r = potential_boost_run(&c.inst.dist, c.inst.strategy.as_ref(), c.inst.property.as_ref(), &c.doob, &c.params)
            .unwrap();
        assert!(r.all_hold(), "instance {} ({}): {:?}", i, c.inst.label, r);
        assert!(verify_quantify_boost(&c.doob, &c.params).unwrap().holds, "instance {}", i);
    }
}

#[test]
fn schedule_examples() {
    let r = boost_schedule(0.5, 0.9, 10_000).unwrap();
    assert_eq!(r.iterations, 100);
    assert!((r.required - 0.501953125).abs() < 1e-15);
    assert!(r.holds);
    // θ2 below θ plus one step's gain
    let capped = boost_schedule(0.5, 0.5001, 10_000).unwrap();
    assert_eq!(capped.required, 0.5001);
    assert!(capped.holds);
    for i in 1..=9 {
        for m in [100, 10_000, 1_000_000] {
            let theta = i as f64 / 10.0;
            assert!(boost_schedule(theta, 0.99, m).unwrap().holds, "theta {} m* {}", theta, m);
        }
    }
    assert!(boost_schedule(0.5, 0.4, 10).is_err());
}

fn point() -> Factor {
    Factor::new(vec![Rational::one()]).unwrap()
}

fn coin() -> Factor {
    Factor::new(vec![rational(1, 2), rational(1, 2)]).unwrap()
}

#[test]
fn balanced_examples() {
    let space = FiniteProductSpace::new(vec![point(), coin(), coin()]);
    let constant = DiscreteMartingale::new(
        space,
        vec![vec![rational(1, 3)], vec![rational(1, 3); 2], vec![rational(1, 3); 4]],
        vec![Rational::zero(), Rational::zero()],
    )
    .unwrap();
    assert!(is_balanced(&constant));
    let k1 = DiscreteMartingale::new(
        FiniteProductSpace::new(vec![point(), coin()]),
        vec![vec![rational(1, 2)], vec![rational(0, 1), rational(1, 1)]],
        vec![rational(2, 5)],
    )
    .unwrap();
    assert!(!is_balanced(&k1));
}

// Hand application of the split: A = {a}, B = {b}, E[M_1 | A] = 0,
// γ = (1 - 0)/(1/(1/2) + 1/(1/2)) = 1/4, M'_1(a) = 0 + 1/2, M'_1(b) = 1 - 1/2.
// Γ_M = {b} and M'_1(b) = 1/2 <= 1.
#[test]
fn coupling_k1_by_hand() {
    let m = DiscreteMartingale::new(
        FiniteProductSpace::new(vec![point(), coin()]),
        vec![vec![rational(1, 2)], vec![rational(0, 1), rational(1, 1)]],
        vec![rational(2, 5)],
    )
    .unwrap();
    let r = couple_balanced(&m).unwrap();
    assert_eq!(r.records.len(), 1);
    assert_eq!(r.records[0].gamma, "1/4");
    assert_eq!(r.records[0].small, vec![0]);
    assert_eq!(r.records[0].large, vec![1]);
    assert_eq!(r.coupled.level(1), &[rational(1, 2), rational(1, 2)]);
    assert!(!common::brute_stable(&m, 0));
    assert!(common::brute_stable(&m, 1));
    check_coupling(&m, &r.coupled).unwrap();
}

#[test]
fn coupling_is_identity_on_balanced_input() {
    let mut r = rng(5);
    let mut seen = 0;
    for _ in 0..300 {
        let m = random_martingale(&mut r);
        if is_balanced(&m) {
            seen += 1;
            let c = couple_balanced(&m).unwrap();
            assert!(c.records.is_empty());
            assert_eq!(c.coupled, m);
        }
    }
    assert!(seen > 5, "only {} balanced draws", seen);
}

#[test]
fn fuzz_coupling_and_tail() {
    let mut r = rng(17);
    for i in 0..500 {
        let m = random_martingale(&mut r);
        let c = couple_balanced(&m).unwrap();
        check_coupling(&m, &c.coupled).unwrap_or_else(|msg| panic!("case {}: {}", i, msg));
        let t = rational(r.random_range(0..=10), 10);
        let tail = tail_bound_check(&m, &t).unwrap();
        let (lhs, unstable) = brute_tail(&m, &t);
        assert_eq!(tail.lhs, aplab::martingale::format_rational(&lhs), "case {}", i);
        assert_eq!(tail.pr_not_stable, aplab::martingale::format_rational(&unstable), "case {}", i);
        assert!(tail.holds, "case {}: {:?}", i, tail);
    }
}

// ±c walk over k = 5 fair steps: siblings differ by 2c, so it is balanced
// for c_j = 2c, nothing is unstable and the bound is exp(-t²/(10c²)).
// The left side is an exact binomial tail.
#[test]
fn symmetric_walk_matches_azuma() {
    let k = 5;
    let c = rational(1, 10);
    let mut factors = vec![point()];
    factors.extend((0..k).map(|_| coin()));
    let space = FiniteProductSpace::new(factors);
    let leaves: Vec<Rational> = (0..1usize << k)
        .map(|x| {
            let ups = x.count_ones() as i64;
            &c * Rational::from_integer(BigInt::from(2 * ups - k as i64))
        })
        .collect();
    let values = tower(&space, leaves);
    let m = DiscreteMartingale::new(space, values, vec![&c * rational(2, 1); k]).unwrap();
    assert!(is_balanced(&m));
    for downs_needed in 0..=k as i64 {
        // M_5 <= -t with t = c·(2·downs - 5) for downs >= 3
        let t = &c * Rational::from_integer(BigInt::from((2 * downs_needed - k as i64).max(0)));
        let report = tail_bound_check(&m, &t).unwrap();
        assert_eq!(report.pr_not_stable, "0");
        let mut exact = Rational::zero();
        for downs in 0..=k as u64 {
            let value = &c * Rational::from_integer(BigInt::from(k as i64 - 2 * downs as i64));
            if value <= -t.clone() {
                exact += Rational::new(BigInt::from(binomial(k as u64, downs)), BigInt::from(1u64 << k));
            }
        }
        assert_eq!(report.lhs, aplab::martingale::format_rational(&exact));
        let tv = 0.1 * (2 * downs_needed - k as i64).max(0) as f64;
        let azuma = (-tv * tv / (10.0 * 0.01)).exp();
        assert!((report.exp_term - azuma).abs() < 1e-12);
        assert!(report.holds);
    }
}

#[test]
fn t_zero_is_trivial() {
    let mut r = rng(3);
    let m = random_martingale(&mut r);
    let rep = tail_bound_check(&m, &Rational::zero()).unwrap();
    assert_eq!(rep.exp_term, 1.0);
    assert!(rep.holds);
}

#[test]
fn size_limits() {
    let dist = two_subset();
    let prop = ContainsEdges::new(vec![e(1, 2)], 3);
    assert!(matches!(exact_doob(&dist, &first_edge(), &prop, 20), Err(MartingaleError::SpaceTooLarge { .. })));
    let rand = FnFactory::new("r", |_| Box::new(FirstEdge)).randomized();
    assert!(matches!(exact_doob(&dist, &rand, &prop, 1), Err(MartingaleError::Randomized(_))));
}
