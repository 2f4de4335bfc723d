//! Perfect-matching builder with length-3 augmentation.

use crate::graph::{Edge, MultiGraph, VertexId};
use crate::process::{GiveUp, Sample, Strategy};
use crate::properties::Certificate;
use crate::rng::StrategyRng;

use super::state::MatchingState;

/// On an unsaturated square `u`, circle the lowest other unsaturated vertex
/// and match them. On a saturated square `u` with partner `w`: if `w` holds a
/// recorded edge to an unsaturated `x`, circle a fresh unsaturated `y` and
/// augment along `x - w = u - y`; otherwise circle an unsaturated vertex and
/// record that edge at `u` for later.
#[derive(Debug, Clone)]
pub struct MatchingStrategy {
    m: MatchingState,
}

impl MatchingStrategy {
    pub fn new(n: usize) -> Self {
        MatchingStrategy { m: MatchingState::new(n) }
    }

    /// Continues from an existing matching (the clean-up fragment).
    pub fn from_state(m: MatchingState) -> Self {
        MatchingStrategy { m }
    }

    pub fn state(&self) -> &MatchingState {
        &self.m
    }

    fn star(&mut self, u: VertexId) -> Edge {
        let e = |v: VertexId| Edge::new(u, v).expect("circle differs from square");
        match self.m.mate(u) {
            None => match self.m.lowest_unsaturated(&[u]) {
                Some(v) => {
                    self.m.join(u, v);
                    e(v)
                }
                None => e(if u.0 == 1 { VertexId(2) } else { VertexId(1) }),
            },
            Some(w) => {
                if let Some(x) = self.m.live_pending(w, &[]) {
                    if let Some(y) = self.m.lowest_unsaturated(&[x]) {
                        self.m.augment(u, w, x, y);
                        return e(y);
                    }
                }
                match self.m.rotating_unsaturated(&[]) {
                    Some(x) => {
                        self.m.record_pending(u, x);
                        e(x)
                    }
                    None => e(w),
                }
            }
        }
    }
}

impl Strategy for MatchingStrategy {
    fn name(&self) -> String {
        "matching".into()
    }

    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        if let Some(u) = sample.star_center() {
            return Ok(self.star(u));
        }
        let free = sample.iter().find(|e| {
            let (a, b) = e.endpoints();
            !self.m.is_saturated(a) && !self.m.is_saturated(b)
        });
        Ok(match free {
            Some(e) => {
                let (a, b) = e.endpoints();
                self.m.join(a, b);
                e
            }
            None => sample.first_edge(),
        })
    }

    fn certificate(&self) -> Certificate<'_> {
        Certificate::Matching(&self.m)
    }
}
