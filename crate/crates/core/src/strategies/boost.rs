//! Multi-round boosting and the approximate-then-clean-up composite.

use std::sync::Arc;

use crate::graph::{Edge, MultiGraph};
use crate::process::{GiveUp, Sample, Strategy, StrategyFactory};
use crate::properties::{approx_target, Certificate};
use crate::rng::StrategyRng;

use super::hamilton::HamiltonStrategy;
use super::matching::MatchingStrategy;
use super::state::MatchingState;

/// Number of independent blocks that lift a per-block success probability of
/// at least 1/2 to `theta`: `⌈log2(1/(1-theta))⌉`.
pub fn blocks_for_confidence(theta: f64) -> u64 {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
    (1.0 / (1.0 - theta)).log2().ceil().max(1.0) as u64
}

/// Runs `k` blocks of `m` steps. Each block restarts the inner strategy on an
/// empty virtual graph; the real graph keeps every edge.
pub struct MultiRoundBoost {
    inner: Arc<dyn StrategyFactory>,
    m: u64,
    k: u64,
    n: usize,
    block: u64,
    current: Box<dyn Strategy>,
    virtual_graph: MultiGraph,
}

pub fn multi_round_boost(inner: Arc<dyn StrategyFactory>, m: u64, k: u64, n: usize) -> MultiRoundBoost {
    assert!(m >= 1 && k >= 1, "boost needs m, k >= 1");
    let current = inner.build(n);
    MultiRoundBoost { inner, m, k, n, block: 0, current, virtual_graph: MultiGraph::new(n) }
}

impl Strategy for MultiRoundBoost {
    fn name(&self) -> String {
        format!("boost:{}:{}:{}", self.inner.id(), self.m, self.k)
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn decide(&mut self, step: u64, _: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        let block = (step - 1) / self.m;
        if block >= self.k {
            return Err(GiveUp);
        }
        if block != self.block {
            self.block = block;
            self.current = self.inner.build(self.n);
            self.virtual_graph = MultiGraph::new(self.n);
        }
        let local = step - block * self.m;
        let e = self.current.decide(local, &self.virtual_graph, sample, rng)?;
        self.virtual_graph.add_edge(e).map_err(|_| GiveUp)?;
        Ok(e)
    }

    fn certificate(&self) -> Certificate<'_> {
        // Virtual-graph edges are real edges, so the inner certificate holds.
        self.current.certificate()
    }
}

/// Which approximate/full property pair the composite targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CleanupKind {
    Matching,
    Hamilton,
}

/// Clean-up fragment for near-perfect matchings: extension plus length-3
/// augmentation started from `m`.
pub fn cleanup_matching(m: MatchingState) -> MatchingStrategy {
    MatchingStrategy::from_state(m)
}

enum Stage {
    MatchingBuild(MatchingStrategy),
    MatchingCleanup(MatchingStrategy),
    HamiltonBuild(HamiltonStrategy),
    HamiltonCleanup(HamiltonStrategy),
}

/// Runs the builder until the approximate certificate (ℳ′ or ℋ′) holds,
/// then hands over to the clean-up fragment. `milestone()` reports the
/// switching step.
pub struct ApproxThenCleanup {
    n: usize,
    stage: Stage,
    switched_at: Option<u64>,
}

impl ApproxThenCleanup {
    pub fn new(kind: CleanupKind, n: usize) -> Self {
        let stage = match kind {
            CleanupKind::Matching => Stage::MatchingBuild(MatchingStrategy::new(n)),
            CleanupKind::Hamilton => Stage::HamiltonBuild(HamiltonStrategy::new(n)),
        };
        ApproxThenCleanup { n, stage, switched_at: None }
    }

    fn approx_reached(&self) -> bool {
        let target = approx_target(self.n);
        match &self.stage {
            Stage::MatchingBuild(s) => s.state().saturated_count() >= target,
            Stage::HamiltonBuild(s) => s.master_len() as usize >= target,
            _ => false,
        }
    }

    fn switch(&mut self, step: u64) {
        let stage = std::mem::replace(&mut self.stage, Stage::MatchingBuild(MatchingStrategy::new(0)));
        self.stage = match stage {
            Stage::MatchingBuild(s) => Stage::MatchingCleanup(cleanup_matching(s.state().clone())),
            Stage::HamiltonBuild(s) => Stage::HamiltonCleanup(s),
            other => other,
        };
        self.switched_at = Some(step);
    }
}

impl Strategy for ApproxThenCleanup {
    fn name(&self) -> String {
        match self.stage {
            Stage::MatchingBuild(_) | Stage::MatchingCleanup(_) => "approx-cleanup:matching".into(),
            _ => "approx-cleanup:hamilton".into(),
        }
    }

    fn decide(&mut self, step: u64, g: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        // The approximate property may hold before any step (tiny n).
        if self.switched_at.is_none() && self.approx_reached() {
            self.switch(step - 1);
        }
        let e = match &mut self.stage {
            Stage::MatchingBuild(s) | Stage::MatchingCleanup(s) => s.decide(step, g, sample, rng)?,
            Stage::HamiltonBuild(s) | Stage::HamiltonCleanup(s) => s.decide(step, g, sample, rng)?,
        };
        if self.switched_at.is_none() && self.approx_reached() {
            self.switch(step);
        }
        Ok(e)
    }

    fn certificate(&self) -> Certificate<'_> {
        match &self.stage {
            Stage::MatchingBuild(s) | Stage::MatchingCleanup(s) => s.certificate(),
            Stage::HamiltonBuild(s) | Stage::HamiltonCleanup(s) => s.certificate(),
        }
    }

    fn milestone(&self) -> Option<u64> {
        self.switched_at
    }
}
