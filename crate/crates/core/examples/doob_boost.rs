//! Exact Doob martingale of a tiny process, the potential-boost strategy and
//! the stopping-time bound, all in rational arithmetic.

use aplab::graph::Edge;
use aplab::martingale::{
    boost_schedule, exact_doob, find_potential, format_rational, potential_boost_run, rational,
    verify_quantify_boost, BoostParams, RationalDistribution,
};
use aplab::properties::ContainsEdges;
use aplab::strategies::{FirstEdge, FnFactory};

fn main() {
    let e = |u, v| Edge::of(u, v).unwrap();
    let dist = RationalDistribution::new(
        4,
        vec![
            (vec![e(1, 2)], rational(1, 3)),
            (vec![e(2, 3), e(3, 4)], rational(1, 3)),
            (vec![e(1, 4)], rational(1, 3)),
        ],
    )
    .unwrap();
    let strategy = FnFactory::new("first-edge", |_| Box::new(FirstEdge));
    let prop = ContainsEdges::new(vec![e(1, 2), e(2, 3)], 3);
    let horizon = 4;

    let doob = exact_doob(&dist, &strategy, &prop, horizon).unwrap();
    println!("mu = Pr[win within {horizon}] = {}", format_rational(doob.mu()));
    println!("tower property holds: {}", doob.check_tower());

    let params = BoostParams::new(rational(1, 2), doob.mu().clone(), 2).unwrap();
    println!("c^2 = {}  (C(theta) = {})", format_rational(&params.c_squared), format_rational(&params.c_theta));
    let pot = find_potential(&doob, &params);
    println!("Pr[tau <= N] = {}", format_rational(&pot.pr_tau_le_n));

    let boost = potential_boost_run(&dist, &strategy, &prop, &doob, &params).unwrap();
    println!("boosted win = {} (replayed: {}), guarantees hold: {}", boost.boosted_win, boost.boosted_win_replay, boost.all_hold());
    let q = verify_quantify_boost(&doob, &params).unwrap();
    println!("Pr[tau <= N] = {} against bound {}: holds {} (margin {:.4})", q.pr_tau_le_n, q.bound, q.holds, q.margin);

    for m_star in [100, 10_000] {
        let s = boost_schedule(0.5, 0.99, m_star).unwrap();
        println!("schedule theta 0.5 -> 0.99, m* = {m_star}: {} iterations, terminal {:.4}", s.iterations, s.terminal);
    }
}
