//! Simple strategies: minimum-degree greedy and fixed-priority choosers for
//! explicit distributions.

use crate::graph::{Edge, MultiGraph};
use crate::process::{GiveUp, Sample, Strategy};
use crate::rng::StrategyRng;

/// Circle at a minimum-degree vertex other than the square (lowest index on
/// ties). On edge-list samples, the edge whose lower endpoint degree is
/// smallest.
#[derive(Debug, Clone)]
pub struct MinDegreeStrategy {
    k: u32,
}

impl MinDegreeStrategy {
    pub fn new(k: u32) -> Self {
        MinDegreeStrategy { k }
    }
}

impl Strategy for MinDegreeStrategy {
    fn name(&self) -> String {
        format!("min-degree:{}", self.k)
    }

    fn decide(&mut self, _: u64, g: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        if let Some(u) = sample.star_center() {
            let v = g.argmin_degree(Some(u)).expect("stars need n >= 2");
            return Ok(Edge::new(u, v).expect("argmin excludes the square"));
        }
        let key = |e: &Edge| {
            let (a, b) = e.endpoints();
            (g.degree(a).min(g.degree(b)), g.degree(a).max(g.degree(b)))
        };
        Ok(sample.iter().min_by_key(key).expect("non-empty sample"))
    }
}

/// Always takes the lexicographically lowest edge of the sample.
#[derive(Debug, Clone, Default)]
pub struct FirstEdge;

impl Strategy for FirstEdge {
    fn name(&self) -> String {
        "first-edge".into()
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        Ok(sample.first_edge())
    }
}

/// Deterministic chooser for tiny explicit instances: at step `t` it takes
/// the first edge of `schedule[(t - 1) % len]` that the sample offers, and
/// the sample's lowest edge if none is offered.
#[derive(Debug, Clone)]
pub struct ScheduleStrategy {
    schedule: Vec<Vec<Edge>>,
}

impl ScheduleStrategy {
    pub fn new(schedule: Vec<Vec<Edge>>) -> Self {
        assert!(!schedule.is_empty(), "schedule needs at least one priority list");
        ScheduleStrategy { schedule }
    }

    pub fn priority(list: Vec<Edge>) -> Self {
        ScheduleStrategy::new(vec![list])
    }
}

impl Strategy for ScheduleStrategy {
    fn name(&self) -> String {
        "schedule".into()
    }
    fn decide(&mut self, step: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        let list = &self.schedule[(step as usize - 1) % self.schedule.len()];
        Ok(list.iter().copied().find(|&e| sample.contains(e)).unwrap_or_else(|| sample.first_edge()))
    }
}

/// Picks a uniformly random edge of the sample from the strategy stream.
/// The only randomized strategy; the martingale lab rejects it.
#[derive(Debug, Clone, Default)]
pub struct RandomEdge;

impl Strategy for RandomEdge {
    fn name(&self) -> String {
        "random-edge".into()
    }
    fn is_deterministic(&self) -> bool {
        false
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        use rand::Rng;
        let i = rng.random_range(0..sample.len());
        Ok(sample.iter().nth(i).expect("index in range"))
    }
}
