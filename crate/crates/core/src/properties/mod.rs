//! Monotone graph properties, their incremental monitors and certificates.

mod replace;
mod search;

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;

use crate::graph::{Edge, GraphError, MultiGraph, VertexId};
use crate::strategies::state::{MatchingState, PathSystemState};

pub use replace::{
    ContainsEdgesReplacement, MatchingReplacement, MinDegreeReplacement, PathReplacement, ReplacementProcedure,
};
pub use search::{contains_subgraph, find_embedding, has_hamiltonian_cycle, longest_path_len, max_matching_size};

/// Largest `n` for which exhaustive matching/Hamiltonicity search is allowed.
pub const EXHAUSTIVE_LIMIT: usize = 12;
/// Largest pattern graph accepted by the subgraph property.
pub const PATTERN_LIMIT: usize = 8;

#[derive(Debug, Error)]
pub enum PropertyError {
    #[error("exhaustive {what} search requested for n = {n} (limit {EXHAUSTIVE_LIMIT})")]
    TooLarge { what: &'static str, n: usize },
    #[error("pattern graph has {0} vertices (limit {PATTERN_LIMIT})")]
    PatternTooLarge(usize),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("unknown property id `{0}`")]
    UnknownId(String),
    #[error("property `{0}` has no edge-replacement procedure")]
    NoReplacement(String),
    #[error("could not read pattern graph {path}: {message}")]
    Pattern { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `⌈n^0.99⌉`, the slack allowed by the approximate properties.
pub fn approx_slack(n: usize) -> usize {
    (n as f64).powf(0.99).ceil() as usize
}

/// Saturation target of ℳ′ and path length target of ℋ′: `n - ⌈n^0.99⌉`.
pub fn approx_target(n: usize) -> usize {
    n.saturating_sub(approx_slack(n))
}

/// A small fixed pattern graph `H` (at most [`PATTERN_LIMIT`] vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallGraph {
    n: usize,
    edges: Vec<(u8, u8)>,
    adj: Vec<u16>,
}

impl SmallGraph {
    /// Builds `H` on vertices `0..n` from 0-based edges; loops and repeated
    /// edges are dropped.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, PropertyError> {
        if n > PATTERN_LIMIT {
            return Err(PropertyError::PatternTooLarge(n));
        }
        let mut adj = vec![0u16; n];
        let mut list = Vec::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(GraphError::VertexOutOfRange { vertex: a.max(b) as u32 + 1, n }.into());
            }
            if a == b || adj[a] & (1 << b) != 0 {
                continue;
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            list.push((a.min(b) as u8, a.max(b) as u8));
        }
        Ok(SmallGraph { n, edges: list, adj })
    }

    pub fn from_multigraph(g: &MultiGraph) -> Result<Self, PropertyError> {
        let edges: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|e| {
                let (u, v) = e.endpoints();
                (u.index(), v.index())
            })
            .collect();
        SmallGraph::new(g.n(), &edges)
    }

    /// Reads an edge-list file (`n m` header, then 1-based `u v` lines).
    pub fn from_file(path: &Path) -> Result<Self, PropertyError> {
        let err = |message: String| PropertyError::Pattern { path: path.display().to_string(), message };
        let file = File::open(path).map_err(|e| err(e.to_string()))?;
        let g = MultiGraph::read_edge_list(BufReader::new(file)).map_err(|e| err(e.to_string()))?;
        SmallGraph::from_multigraph(&g)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        SmallGraph::new(n, &edges).expect("n within limit")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|a| (a, (a + 1) % n)).collect();
        SmallGraph::new(n, &edges).expect("n within limit")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|a| (a - 1, a)).collect();
        SmallGraph::new(n, &edges).expect("n within limit")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u8, u8)] {
        &self.edges
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a] & (1 << b) != 0
    }

    pub fn neighbor_mask(&self, a: usize) -> u16 {
        self.adj[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].count_ones() as usize
    }

    /// Degeneracy ordering `v_1..v_k` (reverse of min-degree peeling, ties to
    /// the lowest index) and the degeneracy `d`.
    pub fn degeneracy_order(&self) -> (Vec<usize>, usize) {
        let mut alive: u16 = if self.n == 16 { u16::MAX } else { (1u16 << self.n) - 1 };
        let mut peeled = Vec::with_capacity(self.n);
        let mut d = 0;
        while alive != 0 {
            let v = (0..self.n)
                .filter(|&v| alive & (1 << v) != 0)
                .min_by_key(|&v| ((self.adj[v] & alive).count_ones(), v))
                .expect("alive non-empty");
            d = d.max((self.adj[v] & alive).count_ones() as usize);
            alive &= !(1 << v);
            peeled.push(v);
        }
        peeled.reverse();
        (peeled, d)
    }
}

/// Structure a strategy maintains that witnesses (part of) a property.
#[derive(Debug, Clone, Copy)]
pub enum Certificate<'a> {
    None,
    Matching(&'a MatchingState),
    Paths(&'a PathSystemState),
    /// `image[a]` is the 1-based host vertex of pattern vertex `a`, 0 if not
    /// yet embedded.
    Embedding { target: &'a SmallGraph, image: &'a [u32] },
}

/// Checks a certificate against the real graph.
pub fn audit_certificate(g: &MultiGraph, cert: &Certificate<'_>) -> Result<(), String> {
    match cert {
        Certificate::None => Ok(()),
        Certificate::Matching(m) => {
            let edges: HashSet<Edge> = g.edge_set();
            let mut covered = 0;
            for v in 1..=m.n() as u32 {
                let v = VertexId(v);
                if let Some(w) = m.mate(v) {
                    if m.mate(w) != Some(v) {
                        return Err(format!("matching is not symmetric at {}", v));
                    }
                    let e = Edge::new(v, w).map_err(|e| e.to_string())?;
                    if !edges.contains(&e) {
                        return Err(format!("matching edge {} is not in the graph", e));
                    }
                    covered += 1;
                }
            }
            if covered != m.saturated_count() || m.unsaturated_count() != m.n() - covered {
                return Err("matching counters disagree with the mate table".into());
            }
            Ok(())
        }
        Certificate::Paths(ps) => {
            let edges: HashSet<Edge> = g.edge_set();
            for v in 1..=ps.n() as u32 {
                let v = VertexId(v);
                for w in ps.neighbors(v) {
                    if !ps.neighbors(w).any(|x| x == v) {
                        return Err(format!("path adjacency is not symmetric at {}", v));
                    }
                    let e = Edge::new(v, w).map_err(|e| e.to_string())?;
                    if !edges.contains(&e) {
                        return Err(format!("path edge {} is not in the graph", e));
                    }
                }
            }
            if ps.is_closed() {
                let walk = ps.path_vertices(VertexId(1));
                let distinct: HashSet<VertexId> = walk.iter().copied().collect();
                if walk.len() != ps.n() || distinct.len() != ps.n() {
                    return Err("closed path system is not a Hamiltonian cycle".into());
                }
            }
            Ok(())
        }
        Certificate::Embedding { target, image } => {
            let mut seen = HashSet::new();
            for &x in image.iter().filter(|&&x| x != 0) {
                if !seen.insert(x) {
                    return Err(format!("embedding maps two pattern vertices to {}", x));
                }
            }
            let edges: HashSet<Edge> = g.edge_set();
            for &(a, b) in target.edges() {
                let (x, y) = (image[a as usize], image[b as usize]);
                if x != 0 && y != 0 {
                    let e = Edge::of(x, y).map_err(|e| e.to_string())?;
                    if !edges.contains(&e) {
                        return Err(format!("embedded pattern edge {} is not in the graph", e));
                    }
                }
            }
            Ok(())
        }
    }
}

/// Incremental, sound membership test: a `true` answer is always correct.
/// Monitors are trial-local and see every added edge in order.
pub trait PropertyMonitor: Send {
    fn update(&mut self, g: &MultiGraph, added: Edge, cert: &Certificate<'_>) -> Result<bool, PropertyError>;
}

/// A monotone property 𝒫.
pub trait Property: Send + Sync {
    fn id(&self) -> String;

    /// Exact membership test.
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError>;

    fn monitor(&self, n: usize) -> Box<dyn PropertyMonitor>;

    fn replacement(&self) -> Option<&dyn ReplacementProcedure> {
        None
    }

    fn replacement_budget(&self, n: usize) -> Option<u64> {
        self.replacement().map(|r| r.budget(n))
    }
}

fn exhaustive_guard(what: &'static str, n: usize) -> Result<(), PropertyError> {
    if n > EXHAUSTIVE_LIMIT {
        Err(PropertyError::TooLarge { what, n })
    } else {
        Ok(())
    }
}

fn bitmask_adjacency(g: &MultiGraph) -> Vec<u16> {
    let mut adj = vec![0u16; g.n()];
    for e in g.edges() {
        let (u, v) = e.endpoints();
        adj[u.index()] |= 1 << v.index();
        adj[v.index()] |= 1 << u.index();
    }
    adj
}

pub fn check_min_degree_k(g: &MultiGraph, k: u32) -> bool {
    g.min_degree() >= k
}

/// Exhaustive perfect-matching test (`n <= 12`); odd `n` asks for `n - 1`
/// saturated vertices.
pub fn check_perfect_matching(g: &MultiGraph) -> Result<bool, PropertyError> {
    exhaustive_guard("matching", g.n())?;
    Ok(2 * max_matching_size(&bitmask_adjacency(g)) >= g.n() - g.n() % 2)
}

/// Exhaustive Hamiltonicity test (`n <= 12`). Graphs on fewer than three
/// vertices have no Hamiltonian cycle.
pub fn check_hamiltonian(g: &MultiGraph) -> Result<bool, PropertyError> {
    exhaustive_guard("hamiltonian", g.n())?;
    Ok(has_hamiltonian_cycle(&bitmask_adjacency(g)))
}

/// ℳ′ via an explicit matching certificate.
pub fn check_approx_matching(g: &MultiGraph, matching: &[Edge]) -> Result<bool, PropertyError> {
    let m = MatchingState::from_matching(g.n(), matching).map_err(PropertyError::InvalidCertificate)?;
    audit_certificate(g, &Certificate::Matching(&m)).map_err(PropertyError::InvalidCertificate)?;
    Ok(m.saturated_count() >= approx_target(g.n()))
}

/// ℋ′ via an explicit path certificate (vertex sequence).
pub fn check_approx_path(g: &MultiGraph, path: &[VertexId]) -> Result<bool, PropertyError> {
    if path.is_empty() {
        return Err(PropertyError::InvalidCertificate("empty path".into()));
    }
    let ps = PathSystemState::from_paths(g.n(), &[path.to_vec()]).map_err(PropertyError::InvalidCertificate)?;
    audit_certificate(g, &Certificate::Paths(&ps)).map_err(PropertyError::InvalidCertificate)?;
    Ok(path.len() - 1 >= approx_target(g.n()))
}

/// Subgraph containment by backtracking.
pub fn check_contains_subgraph(g: &MultiGraph, h: &SmallGraph) -> Result<bool, PropertyError> {
    if h.n() > PATTERN_LIMIT {
        return Err(PropertyError::PatternTooLarge(h.n()));
    }
    let host = search::Host::from_graph(g);
    Ok(contains_subgraph(&host, h, None))
}

/// 𝒫_k: minimum degree at least `k`.
#[derive(Debug, Clone)]
pub struct MinDegree {
    k: u32,
    replace: MinDegreeReplacement,
}

impl MinDegree {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "min-degree needs k >= 1");
        MinDegree { k, replace: MinDegreeReplacement::new(k) }
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

struct MinDegreeMonitor(u32);

impl PropertyMonitor for MinDegreeMonitor {
    fn update(&mut self, g: &MultiGraph, _: Edge, _: &Certificate<'_>) -> Result<bool, PropertyError> {
        Ok(g.min_degree() >= self.0)
    }
}

impl Property for MinDegree {
    fn id(&self) -> String {
        format!("min-degree:{}", self.k)
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        Ok(check_min_degree_k(g, self.k))
    }
    fn monitor(&self, _: usize) -> Box<dyn PropertyMonitor> {
        Box::new(MinDegreeMonitor(self.k))
    }
    fn replacement(&self) -> Option<&dyn ReplacementProcedure> {
        Some(&self.replace)
    }
}

/// Matching monitor shared by ℳ and ℳ′: trusts a strategy's matching,
/// keeps its own greedy matching and, for small `n`, falls back to search.
struct MatchingMonitor {
    target: usize,
    greedy: MatchingState,
}

impl MatchingMonitor {
    fn new(n: usize, target: usize) -> Self {
        MatchingMonitor { target, greedy: MatchingState::new(n) }
    }
}

impl PropertyMonitor for MatchingMonitor {
    fn update(&mut self, g: &MultiGraph, added: Edge, cert: &Certificate<'_>) -> Result<bool, PropertyError> {
        let (u, v) = added.endpoints();
        if !self.greedy.is_saturated(u) && !self.greedy.is_saturated(v) {
            self.greedy.join(u, v);
        }
        if self.greedy.saturated_count() >= self.target {
            return Ok(true);
        }
        if let Certificate::Matching(m) = cert {
            if m.saturated_count() >= self.target {
                return Ok(true);
            }
        }
        if g.n() <= EXHAUSTIVE_LIMIT {
            return Ok(2 * max_matching_size(&bitmask_adjacency(g)) >= self.target);
        }
        Ok(false)
    }
}

/// ℳ: a perfect matching (all but one vertex when `n` is odd).
#[derive(Debug, Clone, Default)]
pub struct PerfectMatching;

impl Property for PerfectMatching {
    fn id(&self) -> String {
        "perfect-matching".into()
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        let greedy = MatchingState::greedy(g);
        if greedy.saturated_count() >= g.n() - g.n() % 2 {
            return Ok(true);
        }
        check_perfect_matching(g)
    }
    fn monitor(&self, n: usize) -> Box<dyn PropertyMonitor> {
        Box::new(MatchingMonitor::new(n, n - n % 2))
    }
}

/// ℳ′: a matching saturating at least `n - ⌈n^0.99⌉` vertices.
#[derive(Debug, Clone, Default)]
pub struct ApproxMatching {
    replace: MatchingReplacement,
}

impl Property for ApproxMatching {
    fn id(&self) -> String {
        "approx-matching".into()
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        let target = approx_target(g.n());
        if MatchingState::greedy(g).saturated_count() >= target {
            return Ok(true);
        }
        exhaustive_guard("matching", g.n())?;
        Ok(2 * max_matching_size(&bitmask_adjacency(g)) >= target)
    }
    fn monitor(&self, n: usize) -> Box<dyn PropertyMonitor> {
        Box::new(MatchingMonitor::new(n, approx_target(n)))
    }
    fn replacement(&self) -> Option<&dyn ReplacementProcedure> {
        Some(&self.replace)
    }
}

struct PathMonitor {
    /// Required path length in edges; `None` means a Hamiltonian cycle.
    target: Option<usize>,
}

impl PropertyMonitor for PathMonitor {
    fn update(&mut self, g: &MultiGraph, _: Edge, cert: &Certificate<'_>) -> Result<bool, PropertyError> {
        if let Certificate::Paths(ps) = cert {
            let ok = match self.target {
                None => ps.is_closed(),
                Some(l) => ps.longest_len() as usize >= l,
            };
            if ok {
                return Ok(true);
            }
        }
        if let Some(0) = self.target {
            return Ok(true);
        }
        if g.n() <= EXHAUSTIVE_LIMIT {
            let adj = bitmask_adjacency(g);
            return Ok(match self.target {
                None => has_hamiltonian_cycle(&adj),
                Some(l) => longest_path_len(&adj) >= l,
            });
        }
        Ok(false)
    }
}

/// ℋ: a Hamiltonian cycle.
#[derive(Debug, Clone, Default)]
pub struct Hamiltonian;

impl Property for Hamiltonian {
    fn id(&self) -> String {
        "hamiltonian".into()
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        check_hamiltonian(g)
    }
    fn monitor(&self, _: usize) -> Box<dyn PropertyMonitor> {
        Box::new(PathMonitor { target: None })
    }
}

/// ℋ′: a path with at least `n - ⌈n^0.99⌉` edges.
#[derive(Debug, Clone, Default)]
pub struct ApproxPath {
    replace: PathReplacement,
}

impl Property for ApproxPath {
    fn id(&self) -> String {
        "approx-path".into()
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        let target = approx_target(g.n());
        if target == 0 {
            return Ok(true);
        }
        exhaustive_guard("path", g.n())?;
        Ok(longest_path_len(&bitmask_adjacency(g)) >= target)
    }
    fn monitor(&self, n: usize) -> Box<dyn PropertyMonitor> {
        Box::new(PathMonitor { target: Some(approx_target(n)) })
    }
    fn replacement(&self) -> Option<&dyn ReplacementProcedure> {
        Some(&self.replace)
    }
}

/// Contains a copy of a fixed pattern graph.
#[derive(Debug, Clone)]
pub struct ContainsSubgraph {
    pattern: SmallGraph,
    label: String,
}

impl ContainsSubgraph {
    pub fn new(pattern: SmallGraph, label: impl Into<String>) -> Self {
        ContainsSubgraph { pattern, label: label.into() }
    }

    pub fn pattern(&self) -> &SmallGraph {
        &self.pattern
    }
}

/// Searches only through each new edge: a copy that appears at step `t`
/// must use the edge added at `t`.
struct SubgraphMonitor {
    pattern: SmallGraph,
    host: search::Host,
}

impl PropertyMonitor for SubgraphMonitor {
    fn update(&mut self, g: &MultiGraph, added: Edge, cert: &Certificate<'_>) -> Result<bool, PropertyError> {
        let fresh = self.host.add(added);
        if let Certificate::Embedding { target, image } = cert {
            if *target == &self.pattern && image.iter().all(|&x| x != 0) {
                return Ok(true);
            }
        }
        if self.pattern.edges().is_empty() {
            return Ok(g.n() >= self.pattern.n());
        }
        Ok(fresh && contains_subgraph(&self.host, &self.pattern, Some(added)))
    }
}

impl Property for ContainsSubgraph {
    fn id(&self) -> String {
        format!("subgraph:{}", self.label)
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        check_contains_subgraph(g, &self.pattern)
    }
    fn monitor(&self, n: usize) -> Box<dyn PropertyMonitor> {
        Box::new(SubgraphMonitor { pattern: self.pattern.clone(), host: search::Host::new(n) })
    }
}

/// Contains every one of a fixed list of labeled edges.
#[derive(Debug, Clone)]
pub struct ContainsEdges {
    edges: Vec<Edge>,
    replace: ContainsEdgesReplacement,
}

impl ContainsEdges {
    /// `budget` is the replacement allowance in steps.
    pub fn new(edges: Vec<Edge>, budget: u64) -> Self {
        ContainsEdges { edges, replace: ContainsEdgesReplacement::new(budget) }
    }
}

struct ContainsEdgesMonitor {
    needed: Vec<Edge>,
}

impl PropertyMonitor for ContainsEdgesMonitor {
    fn update(&mut self, _: &MultiGraph, added: Edge, _: &Certificate<'_>) -> Result<bool, PropertyError> {
        self.needed.retain(|&e| e != added);
        Ok(self.needed.is_empty())
    }
}

impl Property for ContainsEdges {
    fn id(&self) -> String {
        let list: Vec<String> = self.edges.iter().map(|e| {
            let (u, v) = e.endpoints();
            format!("{}-{}", u, v)
        }).collect();
        format!("contains:{}", list.join(","))
    }
    fn check(&self, g: &MultiGraph) -> Result<bool, PropertyError> {
        let set = g.edge_set();
        Ok(self.edges.iter().all(|e| set.contains(e)))
    }
    fn monitor(&self, _: usize) -> Box<dyn PropertyMonitor> {
        let mut needed = self.edges.clone();
        needed.sort();
        needed.dedup();
        Box::new(ContainsEdgesMonitor { needed })
    }
    fn replacement(&self) -> Option<&dyn ReplacementProcedure> {
        Some(&self.replace)
    }
}

/// Parses a CLI property id: `min-degree:k`, `perfect-matching`,
/// `hamiltonian`, `approx-matching`, `approx-path`, `subgraph:<file>` or
/// `contains:u-v,...`.
pub fn parse_property(id: &str) -> Result<Box<dyn Property>, PropertyError> {
    let unknown = || PropertyError::UnknownId(id.to_string());
    let (head, arg) = match id.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (id, None),
    };
    Ok(match (head, arg) {
        ("min-degree", Some(k)) => {
            let k: u32 = k.parse().map_err(|_| unknown())?;
            if k == 0 {
                return Err(unknown());
            }
            Box::new(MinDegree::new(k))
        }
        ("perfect-matching", None) => Box::new(PerfectMatching),
        ("hamiltonian", None) => Box::new(Hamiltonian),
        ("approx-matching", None) => Box::new(ApproxMatching::default()),
        ("approx-path", None) => Box::new(ApproxPath::default()),
        ("subgraph", Some(path)) => Box::new(ContainsSubgraph::new(SmallGraph::from_file(Path::new(path))?, path)),
        ("contains", Some(list)) => {
            let mut edges = Vec::new();
            for item in list.split(',') {
                let (u, v) = item.split_once('-').ok_or_else(unknown)?;
                let u: u32 = u.trim().parse().map_err(|_| unknown())?;
                let v: u32 = v.trim().parse().map_err(|_| unknown())?;
                edges.push(Edge::of(u, v)?);
            }
            Box::new(ContainsEdges::new(edges, 3))
        }
        _ => return Err(unknown()),
    })
}
