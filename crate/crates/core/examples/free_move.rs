//! A free-move strategy on a two-subset distribution and its conversion to
//! an ordinary strategy that pays for the move with a replacement budget.

use std::sync::Arc;

use aplab::graph::{Edge, MultiGraph};
use aplab::process::convert::convert_free_to_standard;
use aplab::process::{
    run_free_move_trial, run_process_trial, DistributionSpec, FreeMoveStrategy, GiveUp, Sample, Strategy,
};
use aplab::properties::{ContainsEdges, Property};
use aplab::rng::StrategyRng;

/// Wants the edge 12; if it is not offered, swaps the subset for {12} once.
struct WantOneTwo {
    used: bool,
}

fn one_two() -> Edge {
    Edge::of(1, 2).unwrap()
}

impl Strategy for WantOneTwo {
    fn name(&self) -> String {
        "want-12".into()
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, s: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        Ok(if s.contains(one_two()) { one_two() } else { s.first_edge() })
    }
}

impl FreeMoveStrategy for WantOneTwo {
    fn free_move(&mut self, _: u64, _: &MultiGraph, presented: &Sample) -> Option<Sample> {
        if self.used || presented.contains(one_two()) {
            return None;
        }
        self.used = true;
        Some(Sample::edges(vec![one_two()]))
    }
}

fn main() {
    let dist = DistributionSpec::explicit(
        3,
        vec![(vec![one_two()], 0.5), (vec![Edge::of(2, 3).unwrap()], 0.5)],
    )
    .unwrap();
    let prop: Arc<dyn Property> = Arc::new(ContainsEdges::new(vec![one_two()], 3));
    let trials = 10_000u64;

    let free_wins = (0..trials)
        .filter(|&t| {
            let mut s = WantOneTwo { used: false };
            run_free_move_trial(&dist, &mut s, prop.as_ref(), 1, 3, t).unwrap().stopping_time.is_some()
        })
        .count();
    println!("free-move process, 1 step:      {:.4}", free_wins as f64 / trials as f64);

    let converted_wins = (0..trials)
        .filter(|&t| {
            let mut s = convert_free_to_standard(Box::new(WantOneTwo { used: false }), prop.clone(), 3).unwrap();
            run_process_trial(&dist, &mut s, prop.as_ref(), 4, 3, t).unwrap().stopping_time.is_some()
        })
        .count();
    println!("converted, 1 + 3 steps:         {:.4}  (exact 15/16 = 0.9375)", converted_wins as f64 / trials as f64);
}
