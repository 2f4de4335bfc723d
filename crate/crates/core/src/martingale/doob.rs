use std::collections::HashMap;

use num_traits::{One, Zero};

use super::{format_rational, to_f64, Factor, FiniteProductSpace, MartingaleError, Rational};
use crate::graph::{Edge, MultiGraph};
use crate::process::{run_scripted, DistributionSpec, Sample, StrategyFactory};
use crate::properties::Property;

/// Upper limit on `|S|^N` for exact enumeration.
pub const MAX_SEQUENCES: u128 = 1_000_000;

/// A finite distribution over edge subsets with exact probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalDistribution {
    n: usize,
    support: Vec<(Vec<Edge>, Rational)>,
}

impl RationalDistribution {
    pub fn new(n: usize, entries: Vec<(Vec<Edge>, Rational)>) -> Result<Self, MartingaleError> {
        // Reuse the engine's validation for the subsets themselves.
        let approx: Vec<(Vec<Edge>, f64)> = entries.iter().map(|(e, p)| (e.clone(), to_f64(p))).collect();
        let spec = DistributionSpec::explicit(n, approx)?;
        Factor::new(entries.iter().map(|(_, p)| p.clone()).collect())?;
        let mut support = Vec::with_capacity(entries.len());
        for (mut edges, p) in entries {
            edges.sort_unstable();
            edges.dedup();
            support.push((edges, p));
        }
        debug_assert!(support.iter().all(|(e, _)| spec.in_support(&Sample::edges(e.clone()))));
        Ok(RationalDistribution { n, support })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(Vec<Edge>, Rational)] {
        &self.support
    }

    pub fn factor(&self) -> Factor {
        Factor { probs: self.support.iter().map(|(_, p)| p.clone()).collect() }
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample::edges(self.support[i].0.clone())
    }

    /// Index of `sample` in the support, if it is one of the subsets.
    pub fn index_of(&self, sample: &Sample) -> Option<usize> {
        let edges: Vec<Edge> = sample.iter().collect();
        self.support.iter().position(|(e, _)| *e == edges)
    }

    /// The engine-side spec (floating-point probabilities).
    pub fn to_spec(&self) -> Result<DistributionSpec, MartingaleError> {
        let approx = self.support.iter().map(|(e, p)| (e.clone(), to_f64(p))).collect();
        Ok(DistributionSpec::explicit(self.n, approx)?)
    }
}

/// The Doob martingale `f_j = E[f | X_1..X_j]` of the win indicator
/// `f = 1{T <= N}` for one strategy, tabulated on every prefix.
#[derive(Debug, Clone)]
pub struct DoobTable {
    space: FiniteProductSpace,
    horizon: usize,
    /// `levels[j][prefix]`, `j = 0..=N`.
    levels: Vec<Vec<Rational>>,
    probs: Vec<Vec<Rational>>,
}

impl DoobTable {
    /// Builds the table from the win indicator of every full sequence.
    pub fn from_outcomes(space: FiniteProductSpace, wins: &[bool]) -> Result<Self, MartingaleError> {
        let horizon = space.depth();
        if wins.len() != space.level_size(horizon) {
            return Err(MartingaleError::Invalid("outcome table has the wrong length".into()));
        }
        let mut levels = vec![Vec::new(); horizon + 1];
        levels[horizon] = wins.iter().map(|&w| if w { Rational::one() } else { Rational::zero() }).collect();
        for j in (0..horizon).rev() {
            let f = &space.factors()[j];
            let next = &levels[j + 1];
            let cur: Vec<Rational> = (0..space.level_size(j))
                .map(|i| f.probs.iter().enumerate().map(|(s, p)| p * &next[space.child(j, i, s)]).sum())
                .collect();
            levels[j] = cur;
        }
        let probs = space.prefix_probabilities();
        Ok(DoobTable { space, horizon, levels, probs })
    }

    pub fn space(&self) -> &FiniteProductSpace {
        &self.space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `μ = f_0 = Pr[T <= N]`.
    pub fn mu(&self) -> &Rational {
        &self.levels[0][0]
    }

    pub fn value(&self, j: usize, prefix: usize) -> &Rational {
        &self.levels[j][prefix]
    }

    pub fn level(&self, j: usize) -> &[Rational] {
        &self.levels[j]
    }

    pub fn prefix_probability(&self, j: usize, prefix: usize) -> &Rational {
        &self.probs[j][prefix]
    }

    pub fn win(&self, sequence: usize) -> bool {
        self.levels[self.horizon][sequence].is_one()
    }

    /// Tower property at every prefix, recomputed from the table.
    pub fn check_tower(&self) -> bool {
        (0..self.horizon).all(|j| {
            let f = &self.space.factors()[j];
            (0..self.space.level_size(j)).all(|i| {
                let e: Rational =
                    f.probs.iter().enumerate().map(|(s, p)| p * &self.levels[j + 1][self.space.child(j, i, s)]).sum();
                e == self.levels[j][i]
            })
        })
    }

    pub fn describe_mu(&self) -> String {
        format_rational(self.mu())
    }
}

/// Enumerates every `X ∈ S^N`, replays the strategy through the engine and
/// tabulates the Doob martingale of `1{T <= N}`.
pub fn exact_doob(
    dist: &RationalDistribution,
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    horizon: usize,
) -> Result<DoobTable, MartingaleError> {
    if !strategy.is_deterministic() {
        return Err(MartingaleError::Randomized(strategy.id()));
    }
    if horizon == 0 {
        return Err(MartingaleError::Invalid("horizon must be at least 1".into()));
    }
    let space = FiniteProductSpace::new(vec![dist.factor(); horizon]);
    let size = space.checked_size();
    if size > MAX_SEQUENCES {
        return Err(MartingaleError::SpaceTooLarge { size, limit: MAX_SEQUENCES });
    }
    let samples: Vec<Sample> = (0..dist.support().len()).map(|i| dist.sample(i)).collect();
    let mut wins = Vec::with_capacity(size as usize);
    let mut script = Vec::with_capacity(horizon);
    for x in 0..size as usize {
        script.clear();
        script.extend(space.decode(horizon, x).into_iter().map(|s| samples[s].clone()));
        let mut s = strategy.build(dist.n());
        let trace = run_scripted(dist.n(), &script, s.as_mut(), property)?;
        wins.push(trace.stopping_time.is_some());
    }
    DoobTable::from_outcomes(space, &wins)
}

/// Expectimax over graph states: the best probability any (adaptive)
/// strategy has of reaching the property within `t` steps.
struct Expectimax<'a> {
    dist: &'a RationalDistribution,
    property: &'a dyn Property,
    universe: Vec<Edge>,
    options: Vec<Vec<usize>>,
    holds: HashMap<u64, bool>,
    memo: HashMap<(u64, u64), Rational>,
}

impl<'a> Expectimax<'a> {
    fn new(dist: &'a RationalDistribution, property: &'a dyn Property) -> Result<Self, MartingaleError> {
        let mut universe: Vec<Edge> = dist.support().iter().flat_map(|(e, _)| e.iter().copied()).collect();
        universe.sort_unstable();
        universe.dedup();
        if universe.len() > 64 {
            return Err(MartingaleError::Invalid("support touches more than 64 distinct edges".into()));
        }
        let options = dist
            .support()
            .iter()
            .map(|(es, _)| es.iter().map(|e| universe.binary_search(e).expect("edge in universe")).collect())
            .collect();
        Ok(Expectimax { dist, property, universe, options, holds: HashMap::new(), memo: HashMap::new() })
    }

    fn holds(&mut self, mask: u64) -> Result<bool, MartingaleError> {
        if let Some(&h) = self.holds.get(&mask) {
            return Ok(h);
        }
        let edges = (0..self.universe.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.universe[i]);
        let g = MultiGraph::with_edges(self.dist.n(), edges).map_err(crate::process::ProcessError::from)?;
        let h = self.property.check(&g).map_err(crate::process::ProcessError::from)?;
        self.holds.insert(mask, h);
        Ok(h)
    }

    fn value(&mut self, mask: u64, t: u64) -> Result<Rational, MartingaleError> {
        // Repeated edges never help a monotone property, so the edge set is
        // a sufficient state.
        if self.holds(mask)? {
            return Ok(Rational::one());
        }
        if t == 0 {
            return Ok(Rational::zero());
        }
        if let Some(v) = self.memo.get(&(mask, t)) {
            return Ok(v.clone());
        }
        let mut total = Rational::zero();
        for i in 0..self.options.len() {
            let mut best = Rational::zero();
            for k in 0..self.options[i].len() {
                let e = self.options[i][k];
                let v = self.value(mask | 1 << e, t - 1)?;
                if v > best {
                    best = v;
                }
            }
            total += &self.dist.support()[i].1 * best;
        }
        self.memo.insert((mask, t), total.clone());
        Ok(total)
    }
}

/// Optimal `Pr[T <= t]` over all strategies, by exact expectimax.
pub fn optimal_win_probability(
    dist: &RationalDistribution,
    property: &dyn Property,
    t: u64,
) -> Result<Rational, MartingaleError> {
    Expectimax::new(dist, property)?.value(0, t)
}

/// Smallest `t <= max_t` whose optimal success probability is at least
/// `theta`; `m_theta(1/2)` is `m*`.
pub fn m_theta(
    dist: &RationalDistribution,
    property: &dyn Property,
    theta: &Rational,
    max_t: u64,
) -> Result<Option<u64>, MartingaleError> {
    let mut em = Expectimax::new(dist, property)?;
    for t in 0..=max_t {
        if em.value(0, t)? >= *theta {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::rational;
    use super::*;
    use crate::properties::ContainsEdges;
    use crate::strategies::{FirstEdge, FnFactory};

    fn two_subsets() -> RationalDistribution {
        RationalDistribution::new(
            3,
            vec![(vec![Edge::of(1, 2).unwrap()], rational(1, 2)), (vec![Edge::of(2, 3).unwrap()], rational(1, 2))],
        )
        .unwrap()
    }

    #[test]
    fn doob_of_waiting_for_an_edge() {
        let dist = two_subsets();
        let prop = ContainsEdges::new(vec![Edge::of(1, 2).unwrap()], 3);
        let f = FnFactory::new("first-edge", |_| Box::new(FirstEdge));
        let doob = exact_doob(&dist, &f, &prop, 2).unwrap();
        assert_eq!(*doob.mu(), rational(3, 4));
        assert_eq!(doob.level(1), &[rational(1, 1), rational(1, 2)]);
        assert!(doob.check_tower());
    }

    #[test]
    fn expectimax_thresholds() {
        let dist = two_subsets();
        let prop = ContainsEdges::new(vec![Edge::of(1, 2).unwrap()], 3);
        assert_eq!(optimal_win_probability(&dist, &prop, 2).unwrap(), rational(3, 4));
        assert_eq!(m_theta(&dist, &prop, &rational(1, 2), 10).unwrap(), Some(1));
        assert_eq!(m_theta(&dist, &prop, &rational(7, 8), 10).unwrap(), Some(3));
    }

    #[test]
    fn rejects_randomized_and_huge() {
        let dist = two_subsets();
        let prop = ContainsEdges::new(vec![Edge::of(1, 2).unwrap()], 3);
        let r = FnFactory::new("r", |_| Box::new(FirstEdge)).randomized();
        assert!(matches!(exact_doob(&dist, &r, &prop, 2), Err(MartingaleError::Randomized(_))));
        let f = FnFactory::new("first-edge", |_| Box::new(FirstEdge));
        assert!(matches!(exact_doob(&dist, &f, &prop, 20), Err(MartingaleError::SpaceTooLarge { .. })));
    }
}
