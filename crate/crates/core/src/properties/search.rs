//! Exhaustive searches for small graphs and subgraph backtracking.

use std::collections::HashSet;

use crate::graph::{Edge, MultiGraph, VertexId};

use super::SmallGraph;

/// Maximum matching size of a graph on at most 16 vertices given as
/// neighbour bitmasks.
pub fn max_matching_size(adj: &[u16]) -> usize {
    let n = adj.len();
    let full: usize = (1usize << n) - 1;
    let mut memo = vec![u8::MAX; 1 << n];
    fn go(mask: usize, adj: &[u16], memo: &mut [u8]) -> u8 {
        if mask == 0 {
            return 0;
        }
        if memo[mask] != u8::MAX {
            return memo[mask];
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut best = go(rest, adj, memo);
        let mut cand = adj[i] as usize & rest;
        while cand != 0 {
            let j = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            best = best.max(1 + go(rest & !(1 << j), adj, memo));
        }
        memo[mask] = best;
        best
    }
    go(full, adj, &mut memo) as usize
}

/// Held–Karp Hamiltonian cycle test; false for fewer than three vertices.
pub fn has_hamiltonian_cycle(adj: &[u16]) -> bool {
    let n = adj.len();
    if n < 3 {
        return false;
    }
    let full = (1usize << n) - 1;
    // ends[mask]: vertices where a path from vertex 0 covering `mask` can end.
    let mut ends = vec![0u16; 1 << n];
    ends[1] = 1;
    for mask in 1..=full {
        if mask & 1 == 0 || ends[mask] == 0 {
            continue;
        }
        let mut e = ends[mask];
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            let mut next = adj[v] as usize & !mask;
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                ends[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    let mut e = ends[full];
    while e != 0 {
        let v = e.trailing_zeros() as usize;
        e &= e - 1;
        if adj[v] & 1 != 0 {
            return true;
        }
    }
    false
}

/// Number of edges of a longest simple path.
pub fn longest_path_len(adj: &[u16]) -> usize {
    let n = adj.len();
    if n == 0 {
        return 0;
    }
    let full = (1usize << n) - 1;
    let mut ends = vec![0u16; 1 << n];
    for v in 0..n {
        ends[1 << v] = 1 << v;
    }
    let mut best = 0;
    for mask in 1..=full {
        if ends[mask] == 0 {
            continue;
        }
        best = best.max(mask.count_ones() as usize - 1);
        let mut e = ends[mask];
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            let mut next = adj[v] as usize & !mask;
            while next != 0 {
                let w = next.trailing_zeros() as usize;
                next &= next - 1;
                ends[mask | (1 << w)] |= 1 << w;
            }
        }
    }
    best
}

/// Simple-graph view of a host graph that grows edge by edge.
#[derive(Debug, Clone)]
pub struct Host {
    adj: Vec<Vec<u32>>,
    set: HashSet<Edge>,
}

impl Host {
    pub fn new(n: usize) -> Self {
        Host { adj: vec![Vec::new(); n + 1], set: HashSet::new() }
    }

    pub fn from_graph(g: &MultiGraph) -> Self {
        let mut h = Host::new(g.n());
        for &e in g.edges() {
            h.add(e);
        }
        h
    }

    pub fn n(&self) -> usize {
        self.adj.len() - 1
    }

    /// Adds `e`; false when it was already present.
    pub fn add(&mut self, e: Edge) -> bool {
        if !self.set.insert(e) {
            return false;
        }
        let (u, v) = e.endpoints();
        self.adj[u.0 as usize].push(v.0);
        self.adj[v.0 as usize].push(u.0);
        true
    }

    #[inline]
    fn has(&self, x: u32, y: u32) -> bool {
        x != y && self.set.contains(&Edge::of(x, y).expect("distinct"))
    }
}

struct Matcher<'a> {
    host: &'a Host,
    h: &'a SmallGraph,
    image: [u32; 16],
    used: HashSet<u32>,
}

impl Matcher<'_> {
    fn consistent(&self, a: usize, x: u32) -> bool {
        if self.used.contains(&x) {
            return false;
        }
        (0..self.h.n()).all(|b| !self.h.adjacent(a, b) || self.image[b] == 0 || self.host.has(self.image[b], x))
    }

    fn extend(&mut self) -> bool {
        // Next pattern vertex: unmapped, non-isolated, most mapped neighbours.
        let next = (0..self.h.n())
            .filter(|&a| self.image[a] == 0 && self.h.degree(a) > 0)
            .max_by_key(|&a| {
                let mapped = (0..self.h.n()).filter(|&b| self.h.adjacent(a, b) && self.image[b] != 0).count();
                (mapped, std::cmp::Reverse(a))
            });
        let Some(a) = next else { return true };
        let anchor = (0..self.h.n()).find(|&b| self.h.adjacent(a, b) && self.image[b] != 0);
        let candidates: Vec<u32> = match anchor {
            Some(b) => self.host.adj[self.image[b] as usize].clone(),
            None => (1..=self.host.n() as u32).collect(),
        };
        for x in candidates {
            if self.consistent(a, x) {
                self.image[a] = x;
                self.used.insert(x);
                if self.extend() {
                    return true;
                }
                self.used.remove(&x);
                self.image[a] = 0;
            }
        }
        false
    }
}

/// Whether `host` contains a copy of `h`; with `through = Some(e)` only
/// copies using the edge `e` are searched. Isolated pattern vertices only
/// need enough host vertices.
pub fn contains_subgraph(host: &Host, h: &SmallGraph, through: Option<Edge>) -> bool {
    if host.n() < h.n() {
        return false;
    }
    let mut m = Matcher { host, h, image: [0; 16], used: HashSet::new() };
    match through {
        None => m.extend(),
        Some(e) => {
            let (u, v) = e.endpoints();
            for &(a, b) in h.edges() {
                for (x, y) in [(u, v), (v, u)] {
                    m.image = [0; 16];
                    m.used.clear();
                    m.image[a as usize] = x.0;
                    m.image[b as usize] = y.0;
                    m.used.insert(x.0);
                    m.used.insert(y.0);
                    if m.extend() {
                        return true;
                    }
                }
            }
            false
        }
    }
}

/// Finds the host images of a copy of `h` (used by tests and examples).
pub fn find_embedding(g: &MultiGraph, h: &SmallGraph) -> Option<Vec<VertexId>> {
    let host = Host::from_graph(g);
    let mut m = Matcher { host: &host, h, image: [0; 16], used: HashSet::new() };
    if !m.extend() {
        return None;
    }
    let mut next = 1u32;
    let mut out = Vec::with_capacity(h.n());
    for a in 0..h.n() {
        if m.image[a] == 0 {
            while m.used.contains(&next) {
                next += 1;
            }
            m.used.insert(next);
            m.image[a] = next;
        }
        out.push(VertexId(m.image[a]));
    }
    Some(out)
}
