//! Edge-replacement procedures: strategy fragments that restore a property
//! after the edge `e` a free-move strategy relied on turned out missing.

use std::collections::BTreeMap;

use crate::graph::{Edge, MultiGraph, VertexId};
use crate::process::{GiveUp, Sample, Strategy};
use crate::rng::StrategyRng;
use crate::strategies::state::{MatchingState, PathSystemState};

use super::Certificate;

pub trait ReplacementProcedure: Send + Sync {
    /// Step allowance for the fragment on `n` vertices.
    fn budget(&self, n: usize) -> u64;

    /// Starts a fragment on the real graph `graph`, which lacks `missing`.
    /// `cert` is the free strategy's certificate for `graph + missing`.
    fn start(&self, graph: &MultiGraph, missing: Edge, cert: &Certificate<'_>) -> Box<dyn Strategy>;
}

fn star_edge(square: VertexId, circle: VertexId) -> Edge {
    Edge::new(square, circle).expect("circle differs from square")
}

/// Lowest vertex other than `v`.
fn any_other(v: VertexId) -> VertexId {
    if v.0 == 1 {
        VertexId(2)
    } else {
        VertexId(1)
    }
}

fn ceil_pow(n: usize, e: f64) -> u64 {
    (n as f64).powf(e).ceil() as u64
}

/// Fixes a degree deficiency by sending each circle to a minimum-degree
/// vertex.
#[derive(Debug, Clone)]
pub struct MinDegreeReplacement {
    k: u32,
}

impl MinDegreeReplacement {
    pub fn new(k: u32) -> Self {
        MinDegreeReplacement { k }
    }
}

struct MinDegreeFragment;

impl Strategy for MinDegreeFragment {
    fn name(&self) -> String {
        "replace-min-degree".into()
    }
    fn decide(&mut self, _: u64, g: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        match sample.star_center() {
            Some(u) => Ok(star_edge(u, g.argmin_degree(Some(u)).expect("n >= 2"))),
            None => Ok(sample
                .iter()
                .min_by_key(|e| {
                    let (a, b) = e.endpoints();
                    g.degree(a).min(g.degree(b))
                })
                .expect("non-empty sample")),
        }
    }
}

impl ReplacementProcedure for MinDegreeReplacement {
    fn budget(&self, _: usize) -> u64 {
        // A missing edge leaves at most two vertices one short of k.
        let _ = self.k;
        2
    }
    fn start(&self, _: &MultiGraph, _: Edge, _: &Certificate<'_>) -> Box<dyn Strategy> {
        Box::new(MinDegreeFragment)
    }
}

/// Waits for a square on an unsaturated vertex and pairs it with another
/// unsaturated vertex.
#[derive(Debug, Clone, Default)]
pub struct MatchingReplacement;

pub(crate) struct MatchingFragment {
    m: MatchingState,
}

impl MatchingFragment {
    pub(crate) fn new(m: MatchingState) -> Self {
        MatchingFragment { m }
    }
}

impl Strategy for MatchingFragment {
    fn name(&self) -> String {
        "replace-matching".into()
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        match sample.star_center() {
            Some(u) => {
                if !self.m.is_saturated(u) {
                    if let Some(v) = self.m.lowest_unsaturated(&[u]) {
                        self.m.join(u, v);
                        return Ok(star_edge(u, v));
                    }
                }
                let v = self.m.lowest_unsaturated(&[u]).unwrap_or_else(|| any_other(u));
                Ok(star_edge(u, v))
            }
            None => {
                let free = sample.iter().find(|e| {
                    let (a, b) = e.endpoints();
                    !self.m.is_saturated(a) && !self.m.is_saturated(b)
                });
                match free {
                    Some(e) => {
                        let (a, b) = e.endpoints();
                        self.m.join(a, b);
                        Ok(e)
                    }
                    None => Ok(sample.first_edge()),
                }
            }
        }
    }
    fn certificate(&self) -> Certificate<'_> {
        Certificate::Matching(&self.m)
    }
}

impl ReplacementProcedure for MatchingReplacement {
    fn budget(&self, n: usize) -> u64 {
        ceil_pow(n, 0.48)
    }
    fn start(&self, graph: &MultiGraph, missing: Edge, cert: &Certificate<'_>) -> Box<dyn Strategy> {
        let m = match cert {
            Certificate::Matching(m) => {
                let mut m = (*m).clone();
                m.remove_edge(missing);
                m
            }
            _ => MatchingState::greedy(graph),
        };
        Box::new(MatchingFragment::new(m))
    }
}

/// Merges the two pieces of a broken long path: squares landing in the
/// longer piece `P1` are joined to one end `p` of the shorter piece `P2`
/// until two such squares lie within distance `⌊n^{1/4}⌋` on `P1`; the
/// second is then joined to the other end `q`, cutting out the segment
/// between them. Afterwards squares off the path extend it.
#[derive(Debug, Clone, Default)]
pub struct PathReplacement;

pub(crate) struct PathMergeFragment {
    ps: PathSystemState,
    /// A vertex of the path being grown.
    master: VertexId,
    /// End of the master path that extensions attach to.
    tail: VertexId,
    merge: Option<MergeState>,
    reach: i64,
}

struct MergeState {
    p: VertexId,
    q: VertexId,
    /// Position of each vertex of `P1`, `i64::MIN` elsewhere.
    pos: Vec<i64>,
    seq: BTreeMap<i64, VertexId>,
    recorded: BTreeMap<i64, VertexId>,
}

impl PathMergeFragment {
    pub(crate) fn new(mut ps: PathSystemState, missing: Option<Edge>) -> Self {
        let n = ps.n();
        let reach = (n as f64).powf(0.25).floor() as i64;
        let mut merge = None;
        let master;
        match missing.filter(|e| {
            let (a, b) = e.endpoints();
            ps.neighbors(a).any(|w| w == b)
        }) {
            Some(e) => {
                let (a, b) = e.endpoints();
                ps.unlink(a, b);
                let (p1, p2) = if ps.path_len(a) >= ps.path_len(b) { (a, b) } else { (b, a) };
                master = p1;
                let (p, q) = ps.ends(p2);
                let mut pos = vec![i64::MIN; n + 1];
                let mut seq = BTreeMap::new();
                for (i, v) in ps.path_vertices(p1).into_iter().enumerate() {
                    pos[v.0 as usize] = i as i64;
                    seq.insert(i as i64, v);
                }
                merge = Some(MergeState { p, q, pos, seq, recorded: BTreeMap::new() });
            }
            None => master = ps.longest_path_vertex(),
        }
        let tail = ps.ends(master).1;
        PathMergeFragment { ps, master, tail, merge, reach }
    }

    /// Detaches `s` from whatever path holds it and appends it at the tail.
    fn extend_with(&mut self, s: VertexId) -> VertexId {
        let nbrs: Vec<VertexId> = self.ps.neighbors(s).collect();
        for w in nbrs {
            self.ps.unlink(s, w);
        }
        let tail = self.tail;
        self.ps.link(tail, s);
        self.tail = s;
        if let Some(m) = self.merge.as_mut() {
            let last = *m.seq.keys().next_back().expect("P1 non-empty");
            m.pos[s.0 as usize] = last + 1;
            m.seq.insert(last + 1, s);
        }
        tail
    }

    fn try_merge(&mut self, s: VertexId) -> Option<VertexId> {
        let m = self.merge.as_mut()?;
        let i = m.pos[s.0 as usize];
        if i == i64::MIN {
            return None;
        }
        let near = m
            .recorded
            .range(i - self.reach..=i + self.reach)
            .find(|(&j, _)| j != i)
            .map(|(&j, &r)| (j, r));
        let Some((j, _)) = near else {
            m.recorded.insert(i, s);
            return Some(m.p);
        };
        let (lo, hi) = (i.min(j), i.max(j));
        let lo_v = m.seq[&lo];
        let hi_v = m.seq[&hi];
        let after_lo = m.seq[&(lo + 1)];
        self.ps.unlink(lo_v, after_lo);
        if hi > lo + 1 {
            let before_hi = m.seq[&(hi - 1)];
            self.ps.unlink(before_hi, hi_v);
        }
        // The earlier square was joined to p; the current one gets q.
        let (first, second) = if j == lo { (m.p, m.q) } else { (m.q, m.p) };
        self.ps.link(lo_v, first);
        self.ps.link(second, hi_v);
        let circle = m.q;
        self.merge = None;
        self.master = s;
        self.tail = self.ps.ends(s).1;
        Some(circle)
    }
}

impl Strategy for PathMergeFragment {
    fn name(&self) -> String {
        "replace-path".into()
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        let Some(s) = sample.star_center() else { return Ok(sample.first_edge()) };
        if let Some(circle) = self.try_merge(s) {
            return Ok(star_edge(s, circle));
        }
        let in_p2 = self.merge.as_ref().is_some_and(|m| self.ps.same_path(s, m.p));
        if !self.ps.same_path(s, self.master) && !in_p2 {
            let tail = self.extend_with(s);
            return Ok(star_edge(s, tail));
        }
        Ok(star_edge(s, any_other(s)))
    }
    fn certificate(&self) -> Certificate<'_> {
        Certificate::Paths(&self.ps)
    }
}

impl ReplacementProcedure for PathReplacement {
    fn budget(&self, n: usize) -> u64 {
        ceil_pow(n, 0.27) + ceil_pow(n, 0.4)
    }
    fn start(&self, graph: &MultiGraph, missing: Edge, cert: &Certificate<'_>) -> Box<dyn Strategy> {
        let ps = match cert {
            Certificate::Paths(ps) => (*ps).clone(),
            _ => PathSystemState::new(graph.n()),
        };
        Box::new(PathMergeFragment::new(ps, Some(missing)))
    }
}

/// Waits for a sample that contains the missing edge and takes it.
#[derive(Debug, Clone)]
pub struct ContainsEdgesReplacement {
    budget: u64,
}

impl ContainsEdgesReplacement {
    pub fn new(budget: u64) -> Self {
        ContainsEdgesReplacement { budget }
    }
}

struct WaitForEdge(Edge);

impl Strategy for WaitForEdge {
    fn name(&self) -> String {
        "replace-wait".into()
    }
    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        Ok(if sample.contains(self.0) { self.0 } else { sample.first_edge() })
    }
}

impl ReplacementProcedure for ContainsEdgesReplacement {
    fn budget(&self, _: usize) -> u64 {
        self.budget
    }
    fn start(&self, _: &MultiGraph, missing: Edge, _: &Certificate<'_>) -> Box<dyn Strategy> {
        Box::new(WaitForEdge(missing))
    }
}
