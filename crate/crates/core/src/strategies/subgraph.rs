//! Degenerate-subgraph builder.
//!
//! With `H`'s vertices in degeneracy order `v_1..v_k`, phase `i` embeds
//! `v_i`. The `j`-th time an unused host vertex arrives as a square during
//! phase `i`, the circle goes to the image of `v_i`'s `j`-th earlier
//! neighbour; the first vertex to collect `d_i` hits (the number of earlier
//! neighbours) becomes the image of `v_i`. Vertices without earlier
//! neighbours are placed on the lowest unused vertex at no cost.

use std::collections::HashMap;

use crate::graph::{Edge, MultiGraph, VertexId};
use crate::process::{GiveUp, Sample, Strategy};
use crate::properties::{Certificate, SmallGraph};
use crate::rng::StrategyRng;

#[derive(Debug, Clone)]
pub struct SubgraphBuildState {
    target: SmallGraph,
    order: Vec<usize>,
    /// `earlier[i]`: pattern vertices adjacent to `order[i]` that come before it.
    earlier: Vec<Vec<usize>>,
    phase: usize,
    hits: HashMap<u32, usize>,
    /// 1-based host vertex of each pattern vertex, 0 if not yet embedded.
    image: Vec<u32>,
    used: Vec<bool>,
}

impl SubgraphBuildState {
    pub fn new(target: SmallGraph, n: usize) -> Self {
        let (order, _) = target.degeneracy_order();
        let earlier = order
            .iter()
            .enumerate()
            .map(|(i, &v)| order[..i].iter().copied().filter(|&w| target.adjacent(v, w)).collect())
            .collect();
        let k = target.n();
        let mut st = SubgraphBuildState {
            target,
            order,
            earlier,
            phase: 0,
            hits: HashMap::new(),
            image: vec![0; k],
            used: vec![false; n + 1],
        };
        st.place_free_vertices();
        st
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn is_complete(&self) -> bool {
        self.phase >= self.order.len()
    }

    pub fn hits(&self, v: VertexId) -> usize {
        self.hits.get(&v.0).copied().unwrap_or(0)
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn target(&self) -> &SmallGraph {
        &self.target
    }

    /// Earlier-neighbour count of the vertex embedded in phase `i`.
    pub fn phase_degree(&self, i: usize) -> usize {
        self.earlier[i].len()
    }

    fn embed(&mut self, host: u32) {
        let v = self.order[self.phase];
        self.image[v] = host;
        self.used[host as usize] = true;
        self.phase += 1;
        self.hits.clear();
        self.place_free_vertices();
    }

    fn place_free_vertices(&mut self) {
        while !self.is_complete() && self.earlier[self.phase].is_empty() {
            let Some(host) = (1..self.used.len()).find(|&x| !self.used[x]) else { return };
            self.embed(host as u32);
        }
    }

    /// Processes square `s`; returns the circle when the square is useful.
    pub fn on_square(&mut self, s: VertexId) -> Option<VertexId> {
        if self.is_complete() || self.used[s.0 as usize] {
            return None;
        }
        let count = self.hits.entry(s.0).or_insert(0);
        let j = *count;
        *count += 1;
        let nbrs = &self.earlier[self.phase];
        let circle = VertexId(self.image[nbrs[j]]);
        if j + 1 == nbrs.len() {
            self.embed(s.0);
        }
        Some(circle)
    }
}

#[derive(Debug, Clone)]
pub struct SubgraphStrategy {
    state: SubgraphBuildState,
    label: String,
}

impl SubgraphStrategy {
    pub fn new(target: SmallGraph, n: usize, label: impl Into<String>) -> Self {
        SubgraphStrategy { state: SubgraphBuildState::new(target, n), label: label.into() }
    }

    pub fn state(&self) -> &SubgraphBuildState {
        &self.state
    }
}

impl Strategy for SubgraphStrategy {
    fn name(&self) -> String {
        format!("subgraph:{}", self.label)
    }

    fn decide(&mut self, _: u64, _: &MultiGraph, sample: &Sample, _: &mut StrategyRng) -> Result<Edge, GiveUp> {
        let Some(s) = sample.star_center() else { return Ok(sample.first_edge()) };
        let circle = self
            .state
            .on_square(s)
            .unwrap_or(if s.0 == 1 { VertexId(2) } else { VertexId(1) });
        Ok(Edge::new(s, circle).expect("images are used, squares are not"))
    }

    fn certificate(&self) -> Certificate<'_> {
        Certificate::Embedding { target: &self.state.target, image: &self.state.image }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_completes_after_d_hits() {
        let st_target = SmallGraph::complete(3);
        let mut st = SubgraphBuildState::new(st_target, 10);
        // v_1 placed for free on vertex 1.
        assert_eq!(st.image().iter().filter(|&&x| x != 0).count(), 1);
        assert_eq!(st.on_square(VertexId(5)), Some(VertexId(1)));
        assert_eq!(st.phase(), 2, "degree-1 vertex embeds on the first hit");
        assert_eq!(st.phase_degree(2), 2);
        assert_eq!(st.on_square(VertexId(7)), Some(VertexId(1)));
        assert_eq!(st.hits(VertexId(7)), 1);
        assert_eq!(st.on_square(VertexId(8)), Some(VertexId(1)));
        assert_eq!(st.on_square(VertexId(7)), Some(VertexId(5)));
        assert!(st.is_complete());
        assert_eq!(st.on_square(VertexId(7)), None);
    }
}
