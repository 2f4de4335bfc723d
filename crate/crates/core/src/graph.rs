//! Loopless multigraphs on the vertex set `1..=n`.
//!
//! [`MultiGraph`] keeps the edge multiset together with an incrementally
//! maintained degree table. Minimum-degree queries are answered in O(1)
//! (amortized) because the minimum degree of a growing graph never decreases,
//! which lets a forward-only cursor track the lowest-index minimum vertex.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: u32, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge list parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A vertex of `[n]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        VertexId(i as u32 + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An unordered pair of distinct vertices, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    lo: VertexId,
    hi: VertexId,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Result<Self, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.0));
        }
        Ok(if u < v { Edge { lo: u, hi: v } } else { Edge { lo: v, hi: u } })
    }

    /// Convenience constructor from raw 1-based indices.
    pub fn of(u: u32, v: u32) -> Result<Self, GraphError> {
        Edge::new(VertexId(u), VertexId(v))
    }

    #[inline]
    pub fn endpoints(self) -> (VertexId, VertexId) {
        (self.lo, self.hi)
    }

    #[inline]
    pub fn contains(self, v: VertexId) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint that is not `v`. `v` must be an endpoint.
    #[inline]
    pub fn other(self, v: VertexId) -> VertexId {
        debug_assert!(self.contains(v));
        if self.lo == v {
            self.hi
        } else {
            self.lo
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone)]
struct DegreeIndex {
    /// `count[d]` = number of vertices with degree exactly `d`.
    count: Vec<u32>,
    min: u32,
    /// Lowest 0-based index whose degree equals `min`.
    cursor: usize,
}

#[derive(Debug, Clone)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<Edge>,
    degree: Vec<u32>,
    index: DegreeIndex,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        MultiGraph {
            n,
            edges: Vec::new(),
            degree: vec![0; n],
            index: DegreeIndex { count: vec![n as u32], min: 0, cursor: 0 },
        }
    }

    pub fn with_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        let mut g = MultiGraph::new(n);
        for e in edges {
            g.add_edge(e)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in insertion order, with repetitions.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> u32 {
        self.degree[v.index()]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v.0 == 0 || v.0 as usize > self.n {
            return Err(GraphError::VertexOutOfRange { vertex: v.0, n: self.n });
        }
        Ok(())
    }

    pub fn add_edge(&mut self, e: Edge) -> Result<(), GraphError> {
        let (u, v) = e.endpoints();
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        self.edges.push(e);
        self.bump(u.index());
        self.bump(v.index());
        self.settle_index();
        Ok(())
    }

    fn bump(&mut self, i: usize) {
        let old = self.degree[i] as usize;
        self.degree[i] += 1;
        let count = &mut self.index.count;
        count[old] -= 1;
        if count.len() <= old + 1 {
            count.push(0);
        }
        count[old + 1] += 1;
    }

    fn settle_index(&mut self) {
        let idx = &mut self.index;
        if idx.count[idx.min as usize] == 0 {
            while idx.count[idx.min as usize] == 0 {
                idx.min += 1;
            }
            idx.cursor = 0;
        }
        while self.degree[idx.cursor] != idx.min {
            idx.cursor += 1;
        }
    }

    /// Minimum degree; 0 for the empty graph on `n >= 1` vertices.
    #[inline]
    pub fn min_degree(&self) -> u32 {
        if self.n == 0 {
            0
        } else {
            self.index.min
        }
    }

    /// Number of vertices whose degree is below `k`.
    pub fn count_below(&self, k: u32) -> usize {
        self.index.count.iter().take(k as usize).map(|&c| c as usize).sum()
    }

    /// Lowest-index vertex of minimum degree among vertices other than `exclude`.
    ///
    /// Returns `None` only when no candidate exists (`n == 0`, or `n == 1` with
    /// the single vertex excluded).
    pub fn argmin_degree(&self, exclude: Option<VertexId>) -> Option<VertexId> {
        if self.n == 0 {
            return None;
        }
        let skip = exclude.map(VertexId::index);
        let cursor = self.index.cursor;
        if skip != Some(cursor) {
            return Some(VertexId::from_index(cursor));
        }
        let min = self.index.min;
        if let Some(i) = (cursor + 1..self.n).find(|&i| self.degree[i] == min) {
            return Some(VertexId::from_index(i));
        }
        // The excluded vertex is the unique minimum.
        (0..self.n)
            .filter(|&i| i != cursor)
            .min_by_key(|&i| (self.degree[i], i))
            .map(VertexId::from_index)
    }

    pub fn multiplicity(&self, e: Edge) -> usize {
        self.edges.iter().filter(|&&f| f == e).count()
    }

    /// Distinct-edge view as a hash set.
    pub fn edge_set(&self) -> HashSet<Edge> {
        self.edges.iter().copied().collect()
    }

    /// Simple-graph adjacency lists (0-based, sorted, deduplicated).
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            let (u, v) = e.endpoints();
            adj[u.index()].push(v.index() as u32);
            adj[v.index()].push(u.index() as u32);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Writes the edge-list text format: header `n m`, then one `u v` per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.n, self.edges.len())?;
        for e in &self.edges {
            let (u, v) = e.endpoints();
            writeln!(out, "{} {}", u, v)?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("edge list is ASCII")
    }

    /// Parses the edge-list text format. Blank lines and `#` comments are ignored.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut g = MultiGraph::new(0);
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Parse { line: lineno + 1, message: e.to_string() })?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let nums: Vec<u64> = body
                .split_whitespace()
                .map(|tok| tok.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|e| GraphError::Parse { line: lineno + 1, message: e.to_string() })?;
            if nums.len() != 2 {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    message: format!("expected two integers, found {}", nums.len()),
                });
            }
            match header {
                None => {
                    header = Some((nums[0] as usize, nums[1] as usize));
                    g = MultiGraph::new(nums[0] as usize);
                }
                Some(_) => {
                    let e = Edge::of(nums[0] as u32, nums[1] as u32)
                        .map_err(|e| GraphError::Parse { line: lineno + 1, message: e.to_string() })?;
                    g.add_edge(e)
                        .map_err(|e| GraphError::Parse { line: lineno + 1, message: e.to_string() })?;
                }
            }
        }
        let (_, m) = header.ok_or(GraphError::Parse { line: 0, message: "missing `n m` header".into() })?;
        if g.edge_count() != m {
            return Err(GraphError::Parse {
                line: 0,
                message: format!("header declares {} edges, found {}", m, g.edge_count()),
            });
        }
        Ok(g)
    }
}
