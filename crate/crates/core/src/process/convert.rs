//! Turning a free-move strategy into a standard one.
//!
//! The converted strategy plays the free strategy on a shadow graph. At the
//! free-move step it takes the lowest edge of the sample it was really dealt
//! and remembers the edge `e` the free strategy chose instead. Once the
//! shadow graph has the property, the real graph is at worst missing `e`, and
//! the property's replacement procedure gets a fixed step budget to repair
//! that.

use std::sync::Arc;

use super::{FreeMoveStrategy, GiveUp, ProcessError, Sample, Strategy};
use crate::graph::{Edge, MultiGraph};
use crate::properties::{Certificate, Property, PropertyMonitor};
use crate::rng::StrategyRng;

enum Phase {
    Mimic,
    Replace { fragment: Box<dyn Strategy>, left: u64 },
}

pub struct ConvertedStrategy {
    free: Box<dyn FreeMoveStrategy>,
    property: Arc<dyn Property>,
    shadow: MultiGraph,
    shadow_monitor: Box<dyn PropertyMonitor>,
    shadow_won: bool,
    used_free: bool,
    missing: Option<Edge>,
    phase: Phase,
    switched_at: Option<u64>,
}

/// Wraps `free` for the standard process on `n` vertices. Fails when the
/// property has no replacement procedure.
pub fn convert_free_to_standard(
    free: Box<dyn FreeMoveStrategy>,
    property: Arc<dyn Property>,
    n: usize,
) -> Result<ConvertedStrategy, ProcessError> {
    if property.replacement().is_none() {
        return Err(ProcessError::Unsupported(format!(
            "property `{}` has no edge-replacement procedure",
            property.id()
        )));
    }
    Ok(ConvertedStrategy {
        shadow_monitor: property.monitor(n),
        free,
        property,
        shadow: MultiGraph::new(n),
        shadow_won: false,
        used_free: false,
        missing: None,
        phase: Phase::Mimic,
        switched_at: None,
    })
}

impl ConvertedStrategy {
    /// The edge the free strategy received but the real process did not.
    pub fn missing_edge(&self) -> Option<Edge> {
        self.missing
    }
}

impl Strategy for ConvertedStrategy {
    fn name(&self) -> String {
        format!("converted:{}", self.free.name())
    }

    fn is_deterministic(&self) -> bool {
        self.free.is_deterministic()
    }

    fn decide(&mut self, step: u64, graph: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        if let Phase::Replace { fragment, left } = &mut self.phase {
            if *left == 0 {
                return Err(GiveUp);
            }
            *left -= 1;
            return fragment.decide(step, graph, sample, rng);
        }
        let swap = if self.used_free { None } else { self.free.free_move(step, &self.shadow, sample) };
        let offered = swap.clone().unwrap_or_else(|| sample.clone());
        let chosen = self.free.decide(step, &self.shadow, &offered, rng)?;
        let real = if swap.is_some() {
            self.used_free = true;
            if sample.contains(chosen) {
                chosen
            } else {
                self.missing = Some(chosen);
                sample.first_edge()
            }
        } else {
            chosen
        };
        self.shadow.add_edge(chosen).map_err(|_| GiveUp)?;
        if !self.shadow_won {
            let cert = self.free.certificate();
            self.shadow_won = self.shadow_monitor.update(&self.shadow, chosen, &cert).map_err(|_| GiveUp)?;
            if self.shadow_won {
                if let Some(e) = self.missing {
                    let mut after = graph.clone();
                    after.add_edge(real).map_err(|_| GiveUp)?;
                    let rep = self.property.replacement().expect("checked at construction");
                    let fragment = rep.start(&after, e, &cert);
                    let left = rep.budget(graph.n());
                    self.phase = Phase::Replace { fragment, left };
                    self.switched_at = Some(step);
                }
            }
        }
        Ok(real)
    }

    fn certificate(&self) -> Certificate<'_> {
        match &self.phase {
            Phase::Replace { fragment, .. } => fragment.certificate(),
            // Before the free move the shadow and real graphs coincide.
            Phase::Mimic if self.missing.is_none() => self.free.certificate(),
            Phase::Mimic => Certificate::None,
        }
    }

    fn milestone(&self) -> Option<u64> {
        self.switched_at
    }
}
