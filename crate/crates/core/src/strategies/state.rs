//! Certificate states maintained by the matching and path strategies.

use std::collections::BTreeSet;

use crate::graph::{Edge, MultiGraph, VertexId};

/// A matching together with its unsaturated vertices and the pending halves
/// of length-3 augmenting paths.
#[derive(Debug, Clone)]
pub struct MatchingState {
    n: usize,
    /// 0 when unsaturated, else the 1-based partner.
    mate: Vec<u32>,
    size: usize,
    unsat: BTreeSet<u32>,
    /// Circle targets recorded at a saturated vertex: `pending[v]` lists
    /// vertices `x` with an edge `(v, x)` added while `x` was unsaturated.
    pending: Vec<Vec<u32>>,
    cursor: u32,
}

impl MatchingState {
    pub fn new(n: usize) -> Self {
        MatchingState {
            n,
            mate: vec![0; n + 1],
            size: 0,
            unsat: (1..=n as u32).collect(),
            pending: vec![Vec::new(); n + 1],
            cursor: 0,
        }
    }

    /// Greedy maximal matching over the edges of `g` in insertion order.
    pub fn greedy(g: &MultiGraph) -> Self {
        let mut m = MatchingState::new(g.n());
        for e in g.edges() {
            let (u, v) = e.endpoints();
            if !m.is_saturated(u) && !m.is_saturated(v) {
                m.join(u, v);
            }
        }
        m
    }

    /// Builds a state from explicit disjoint matching edges.
    pub fn from_matching(n: usize, edges: &[Edge]) -> Result<Self, String> {
        let mut m = MatchingState::new(n);
        for e in edges {
            let (u, v) = e.endpoints();
            if m.is_saturated(u) || m.is_saturated(v) {
                return Err(format!("edges of the matching are not disjoint at {}", e));
            }
            m.join(u, v);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn saturated_count(&self) -> usize {
        2 * self.size
    }

    pub fn unsaturated_count(&self) -> usize {
        self.unsat.len()
    }

    #[inline]
    pub fn mate(&self, v: VertexId) -> Option<VertexId> {
        match self.mate[v.0 as usize] {
            0 => None,
            w => Some(VertexId(w)),
        }
    }

    #[inline]
    pub fn is_saturated(&self, v: VertexId) -> bool {
        self.mate[v.0 as usize] != 0
    }

    pub fn unsaturated(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.unsat.iter().map(|&v| VertexId(v))
    }

    /// Lowest-index unsaturated vertex not in `avoid`.
    pub fn lowest_unsaturated(&self, avoid: &[VertexId]) -> Option<VertexId> {
        self.unsat.iter().map(|&v| VertexId(v)).find(|v| !avoid.contains(v))
    }

    /// Next unsaturated vertex after a rotating cursor, skipping `avoid`.
    /// Spreads recorded targets over the unsaturated set.
    pub fn rotating_unsaturated(&mut self, avoid: &[VertexId]) -> Option<VertexId> {
        let after = self.unsat.range(self.cursor + 1..).map(|&v| VertexId(v)).find(|v| !avoid.contains(v));
        let pick = after.or_else(|| self.lowest_unsaturated(avoid));
        if let Some(v) = pick {
            self.cursor = v.0;
        }
        pick
    }

    /// Matches two unsaturated vertices.
    pub fn join(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(u != v && !self.is_saturated(u) && !self.is_saturated(v));
        self.mate[u.0 as usize] = v.0;
        self.mate[v.0 as usize] = u.0;
        self.unsat.remove(&u.0);
        self.unsat.remove(&v.0);
        self.size += 1;
    }

    /// Removes the matching edge `(u, v)`; both become unsaturated.
    pub fn split(&mut self, u: VertexId, v: VertexId) {
        debug_assert_eq!(self.mate(u), Some(v));
        self.mate[u.0 as usize] = 0;
        self.mate[v.0 as usize] = 0;
        self.unsat.insert(u.0);
        self.unsat.insert(v.0);
        self.size -= 1;
    }

    /// Deletes `e` from the matching if it is a matching edge.
    pub fn remove_edge(&mut self, e: Edge) -> bool {
        let (u, v) = e.endpoints();
        if self.mate(u) == Some(v) {
            self.split(u, v);
            true
        } else {
            false
        }
    }

    /// Length-3 augmentation along `x - w = u - y`: drops `(u, w)` and adds
    /// `(w, x)` and `(u, y)`, where `x` and `y` are unsaturated.
    pub fn augment(&mut self, u: VertexId, w: VertexId, x: VertexId, y: VertexId) {
        debug_assert_eq!(self.mate(u), Some(w));
        debug_assert!(x != y && !self.is_saturated(x) && !self.is_saturated(y));
        self.split(u, w);
        self.join(w, x);
        self.join(u, y);
    }

    pub fn record_pending(&mut self, v: VertexId, target: VertexId) {
        self.pending[v.0 as usize].push(target.0);
    }

    /// A recorded target of `v` that is still unsaturated and not in `avoid`.
    /// Dead records are dropped along the way.
    pub fn live_pending(&mut self, v: VertexId, avoid: &[VertexId]) -> Option<VertexId> {
        let mate = &self.mate;
        let list = &mut self.pending[v.0 as usize];
        list.retain(|&x| mate[x as usize] == 0);
        list.iter().map(|&x| VertexId(x)).find(|x| !avoid.contains(x))
    }

    pub fn matching_edges(&self) -> Vec<Edge> {
        (1..=self.n as u32)
            .filter(|&v| self.mate[v as usize] > v)
            .map(|v| Edge::of(v, self.mate[v as usize]).expect("distinct"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Component {
    ends: [u32; 2],
    len: u32,
    size: u32,
}

/// Vertex-disjoint paths covering `[n]` (isolated vertices are trivial
/// paths), optionally closed into a single Hamiltonian cycle.
#[derive(Debug, Clone)]
pub struct PathSystemState {
    n: usize,
    /// Path neighbours, 0 for an empty slot. Index 0 unused.
    nbr: Vec<[u32; 2]>,
    comp: Vec<u32>,
    info: Vec<Component>,
    free_ids: Vec<u32>,
    max_len: u32,
    closed: bool,
}

impl PathSystemState {
    pub fn new(n: usize) -> Self {
        PathSystemState {
            n,
            nbr: vec![[0, 0]; n + 1],
            comp: (0..=n as u32).collect(),
            info: (0..=n as u32).map(|v| Component { ends: [v, v], len: 0, size: 1 }).collect(),
            free_ids: Vec::new(),
            max_len: 0,
            closed: false,
        }
    }

    /// Builds a system from explicit vertex sequences (each of length >= 1).
    pub fn from_paths(n: usize, paths: &[Vec<VertexId>]) -> Result<Self, String> {
        let mut ps = PathSystemState::new(n);
        for p in paths {
            for w in p.windows(2) {
                if !ps.is_endpoint(w[0]) || !ps.is_endpoint(w[1]) || ps.same_path(w[0], w[1]) {
                    return Err(format!("path sequence is not vertex-disjoint at {}", w[1]));
                }
                ps.link(w[0], w[1]);
            }
        }
        Ok(ps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.nbr[v.0 as usize].iter().filter(|&&w| w != 0).map(|&w| VertexId(w))
    }

    pub fn path_degree(&self, v: VertexId) -> usize {
        self.nbr[v.0 as usize].iter().filter(|&&w| w != 0).count()
    }

    pub fn is_isolated(&self, v: VertexId) -> bool {
        self.path_degree(v) == 0
    }

    pub fn is_endpoint(&self, v: VertexId) -> bool {
        !self.closed && self.path_degree(v) <= 1
    }

    pub fn same_path(&self, u: VertexId, v: VertexId) -> bool {
        self.comp[u.0 as usize] == self.comp[v.0 as usize]
    }

    /// Edge count of the path through `v`.
    pub fn path_len(&self, v: VertexId) -> u32 {
        self.info[self.comp[v.0 as usize] as usize].len
    }

    pub fn ends(&self, v: VertexId) -> (VertexId, VertexId) {
        let c = self.info[self.comp[v.0 as usize] as usize];
        (VertexId(c.ends[0]), VertexId(c.ends[1]))
    }

    /// The far endpoint of the path ending at `v`.
    pub fn other_end(&self, v: VertexId) -> VertexId {
        let (a, b) = self.ends(v);
        if a == v {
            b
        } else {
            a
        }
    }

    /// Longest path length (edges). For a closed cycle this is `n`.
    pub fn longest_len(&self) -> u32 {
        self.max_len
    }

    /// Vertex sequence of the path through `v`, from its first recorded end.
    pub fn path_vertices(&self, v: VertexId) -> Vec<VertexId> {
        let (start, _) = self.ends(v);
        let mut out = vec![start];
        let mut prev = 0u32;
        let mut cur = start.0;
        loop {
            let next = self.nbr[cur as usize].iter().copied().find(|&w| w != 0 && w != prev);
            match next {
                Some(w) if !(self.closed && w == start.0) => {
                    out.push(VertexId(w));
                    prev = cur;
                    cur = w;
                    if out.len() > self.n {
                        break;
                    }
                }
                _ => break,
            }
        }
        out
    }

    /// A vertex on a longest path.
    pub fn longest_path_vertex(&self) -> VertexId {
        (1..=self.n as u32)
            .map(VertexId)
            .find(|&v| self.path_len(v) == self.max_len)
            .expect("n >= 1")
    }

    /// All path edges (each once).
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for v in 1..=self.n as u32 {
            for &w in &self.nbr[v as usize] {
                if w > v {
                    out.push(Edge::of(v, w).expect("distinct"));
                }
            }
        }
        out
    }

    fn set_slot(&mut self, v: u32, old: u32, new: u32) {
        let slots = &mut self.nbr[v as usize];
        let i = if slots[0] == old { 0 } else { 1 };
        debug_assert_eq!(slots[i], old);
        slots[i] = new;
    }

    fn relabel(&mut self, start: u32, id: u32) -> u32 {
        let mut count = 0;
        let mut prev = 0u32;
        let mut cur = start;
        loop {
            self.comp[cur as usize] = id;
            count += 1;
            match self.nbr[cur as usize].iter().copied().find(|&w| w != 0 && w != prev) {
                Some(w) => {
                    prev = cur;
                    cur = w;
                }
                None => break,
            }
        }
        count
    }

    /// Joins endpoints `a` and `b` of two different paths.
    pub fn link(&mut self, a: VertexId, b: VertexId) {
        assert!(!self.closed, "cannot link in a closed cycle");
        assert!(self.is_endpoint(a) && self.is_endpoint(b) && !self.same_path(a, b), "link needs endpoints of different paths");
        let (ca, cb) = (self.comp[a.0 as usize], self.comp[b.0 as usize]);
        let (ia, ib) = (self.info[ca as usize], self.info[cb as usize]);
        let far_a = if ia.ends[0] == a.0 { ia.ends[1] } else { ia.ends[0] };
        let far_b = if ib.ends[0] == b.0 { ib.ends[1] } else { ib.ends[0] };
        self.set_slot(a.0, 0, b.0);
        self.set_slot(b.0, 0, a.0);
        let (keep, gone, start) = if ia.size >= ib.size { (ca, cb, b.0) } else { (cb, ca, a.0) };
        // Relabel walks from the absorbed side's joining endpoint; it must not
        // cross into the kept side, so walk it before the link is visible.
        self.set_slot(a.0, b.0, 0);
        self.set_slot(b.0, a.0, 0);
        self.relabel(start, keep);
        self.set_slot(a.0, 0, b.0);
        self.set_slot(b.0, 0, a.0);
        let len = ia.len + ib.len + 1;
        self.info[keep as usize] = Component { ends: [far_a, far_b], len, size: ia.size + ib.size };
        self.free_ids.push(gone);
        self.max_len = self.max_len.max(len);
    }

    /// Removes the path edge `a - b`, splitting its path in two (or opening
    /// a closed cycle into a Hamiltonian path).
    pub fn unlink(&mut self, a: VertexId, b: VertexId) {
        assert!(self.nbr[a.0 as usize].contains(&b.0), "unlink needs a path edge");
        self.set_slot(a.0, b.0, 0);
        self.set_slot(b.0, a.0, 0);
        let c = self.comp[a.0 as usize];
        if self.closed {
            self.closed = false;
            self.info[c as usize] = Component { ends: [a.0, b.0], len: self.n as u32 - 1, size: self.n as u32 };
            self.max_len = self.n as u32 - 1;
            return;
        }
        let old = self.info[c as usize];
        // Walk both sides in lockstep to find the smaller one.
        let (mut pa, mut xa) = (0u32, a.0);
        let (mut pb, mut xb) = (0u32, b.0);
        let mut steps = 1u32;
        let small_is_a = loop {
            let na = self.nbr[xa as usize].iter().copied().find(|&w| w != 0 && w != pa);
            let Some(na) = na else { break true };
            let nb = self.nbr[xb as usize].iter().copied().find(|&w| w != 0 && w != pb);
            let Some(nb) = nb else { break false };
            pa = xa;
            xa = na;
            pb = xb;
            xb = nb;
            steps += 1;
        };
        let (small_start, small_end, large_start) = if small_is_a { (a.0, xa, b.0) } else { (b.0, xb, a.0) };
        let large_far = if old.ends[0] == small_end { old.ends[1] } else { old.ends[0] };
        let id = self.free_ids.pop().expect("a free component id always exists after a split");
        let small_size = self.relabel(small_start, id);
        debug_assert!(small_size >= steps);
        let small = Component { ends: [small_start, small_end], len: small_size - 1, size: small_size };
        let large_size = old.size - small_size;
        self.info[id as usize] = small;
        self.info[c as usize] = Component { ends: [large_start, large_far], len: large_size - 1, size: large_size };
        if old.len == self.max_len {
            self.max_len = self.recompute_max();
        }
    }

    fn recompute_max(&self) -> u32 {
        (1..=self.n).map(|v| self.info[self.comp[v] as usize].len).max().unwrap_or(0)
    }

    /// Inserts the isolated vertex `x` between the adjacent path vertices `u`
    /// and `y`.
    pub fn insert_between(&mut self, u: VertexId, x: VertexId, y: VertexId) {
        assert!(self.is_isolated(x), "inserted vertex must be isolated");
        assert!(self.nbr[u.0 as usize].contains(&y.0), "insert needs a path edge");
        self.set_slot(u.0, y.0, x.0);
        self.set_slot(y.0, u.0, x.0);
        self.nbr[x.0 as usize] = [u.0, y.0];
        let c = self.comp[u.0 as usize];
        self.free_ids.push(self.comp[x.0 as usize]);
        self.comp[x.0 as usize] = c;
        let info = &mut self.info[c as usize];
        info.len += 1;
        info.size += 1;
        self.max_len = self.max_len.max(info.len);
    }

    /// Closes a Hamiltonian path into a Hamiltonian cycle.
    pub fn close(&mut self) {
        assert!(self.n >= 3, "a Hamiltonian cycle needs n >= 3");
        let (a, b) = self.ends(VertexId(1));
        assert_eq!(self.info[self.comp[1] as usize].size as usize, self.n, "close needs a spanning path");
        self.set_slot(a.0, 0, b.0);
        self.set_slot(b.0, 0, a.0);
        self.closed = true;
        self.max_len = self.n as u32;
    }
}
