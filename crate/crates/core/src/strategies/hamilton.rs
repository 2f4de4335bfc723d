//! Hamiltonian-cycle builder.
//!
//! One master path absorbs the remaining ("leftover") vertices:
//! a leftover square is appended at an end of the path, an end square pulls
//! in a leftover vertex, and an interior square `u` inserts a leftover `x`
//! between `u` and its path neighbour `y` when `y` already has an edge to
//! `x` (otherwise it records such an edge for later). Once the path is
//! spanning, a square at an end closes the cycle directly and an interior
//! square closes it through a crossing pair of edges to the two ends.

use std::collections::BTreeSet;

use crate::graph::{Edge, MultiGraph, VertexId};
use crate::process::{GiveUp, Sample, Strategy};
use crate::properties::Certificate;
use crate::rng::StrategyRng;

use super::state::PathSystemState;

#[derive(Debug, Clone)]
struct Closing {
    a: VertexId,
    b: VertexId,
    /// Path order from `a` to `b`.
    order: Vec<VertexId>,
    pos: Vec<u32>,
    has_a: Vec<bool>,
    has_b: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct HamiltonStrategy {
    n: usize,
    ps: PathSystemState,
    master: Option<VertexId>,
    leftover: BTreeSet<u32>,
    cursor: u32,
    /// `records[y]`: leftover vertices `x` with a recorded edge `(y, x)`.
    records: Vec<Vec<u32>>,
    closing: Option<Closing>,
}

impl HamiltonStrategy {
    pub fn new(n: usize) -> Self {
        HamiltonStrategy {
            n,
            ps: PathSystemState::new(n),
            master: None,
            leftover: (1..=n as u32).collect(),
            cursor: 0,
            records: vec![Vec::new(); n + 1],
            closing: None,
        }
    }

    pub fn paths(&self) -> &PathSystemState {
        &self.ps
    }

    /// Length (edges) of the master path.
    pub fn master_len(&self) -> u32 {
        self.master.map(|m| self.ps.path_len(m)).unwrap_or(0)
    }

    fn rotating_leftover(&mut self, avoid: VertexId) -> Option<VertexId> {
        let pick = self
            .leftover
            .range(self.cursor + 1..)
            .copied()
            .find(|&x| x != avoid.0)
            .or_else(|| self.leftover.iter().copied().find(|&x| x != avoid.0));
        if let Some(x) = pick {
            self.cursor = x;
        }
        pick.map(VertexId)
    }

    fn absorb(&mut self, x: VertexId) {
        self.leftover.remove(&x.0);
    }

    fn live_record(&mut self, y: VertexId) -> Option<VertexId> {
        let leftover = &self.leftover;
        let list = &mut self.records[y.0 as usize];
        list.retain(|x| leftover.contains(x));
        list.first().map(|&x| VertexId(x))
    }

    fn build_step(&mut self, s: VertexId) -> VertexId {
        let Some(master) = self.master else {
            let v = self.rotating_leftover(s).expect("n >= 2");
            self.ps.link(s, v);
            self.absorb(s);
            self.absorb(v);
            self.master = Some(s);
            return v;
        };
        if self.leftover.contains(&s.0) {
            let (_, end) = self.ps.ends(master);
            self.ps.link(end, s);
            self.absorb(s);
            return end;
        }
        if self.ps.is_endpoint(s) {
            let x = self.rotating_leftover(s).expect("leftovers remain");
            self.ps.link(s, x);
            self.absorb(x);
            return x;
        }
        let nbrs: Vec<VertexId> = self.ps.neighbors(s).collect();
        for y in nbrs {
            if let Some(x) = self.live_record(y) {
                self.ps.insert_between(s, x, y);
                self.absorb(x);
                return x;
            }
        }
        let x = self.rotating_leftover(s).expect("leftovers remain");
        self.records[s.0 as usize].push(x.0);
        x
    }

    fn start_closing(&mut self, g: &MultiGraph) {
        let master = self.master.expect("spanning path exists");
        let order = self.ps.path_vertices(master);
        let (a, b) = (order[0], *order.last().expect("non-empty"));
        let mut pos = vec![0u32; self.n + 1];
        for (i, v) in order.iter().enumerate() {
            pos[v.0 as usize] = i as u32;
        }
        let mut has_a = vec![false; self.n + 1];
        let mut has_b = vec![false; self.n + 1];
        for e in g.edges() {
            if e.contains(a) {
                has_a[e.other(a).0 as usize] = true;
            }
            if e.contains(b) {
                has_b[e.other(b).0 as usize] = true;
            }
        }
        self.closing = Some(Closing { a, b, order, pos, has_a, has_b });
    }

    fn closing_step(&mut self, s: VertexId) -> VertexId {
        let c = self.closing.as_mut().expect("closing stage");
        let (a, b) = (c.a, c.b);
        if s == a || s == b {
            self.ps.close();
            return if s == a { b } else { a };
        }
        let i = c.pos[s.0 as usize] as usize;
        let pred = c.order[i - 1];
        let succ = c.order[i + 1];
        if c.has_b[pred.0 as usize] {
            // a .. pred, b .. s, s - a
            self.ps.unlink(pred, s);
            self.ps.link(pred, b);
            self.ps.close();
            return a;
        }
        if c.has_a[succ.0 as usize] {
            // a .. s, b .. succ, succ - a
            self.ps.unlink(s, succ);
            self.ps.link(s, b);
            self.ps.close();
            return b;
        }
        if !c.has_b[s.0 as usize] {
            c.has_b[s.0 as usize] = true;
            b
        } else {
            c.has_a[s.0 as usize] = true;
            a
        }
    }
}

impl Strategy for HamiltonStrategy {
    fn name(&self) -> String {
        "hamilton".into()
    }

    fn decide(&mut self, _: u64, g: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        let Some(s) = sample.star_center() else { return Ok(sample.first_edge()) };
        let circle = if self.ps.is_closed() || self.n < 3 {
            if s.0 == 1 {
                VertexId(2)
            } else {
                VertexId(1)
            }
        } else if !self.leftover.is_empty() {
            self.build_step(s)
        } else {
            if self.closing.is_none() {
                self.start_closing(g);
            }
            self.closing_step(s)
        };
        Ok(Edge::new(s, circle).expect("circle differs from square"))
    }

    fn certificate(&self) -> Certificate<'_> {
        Certificate::Paths(&self.ps)
    }
}
