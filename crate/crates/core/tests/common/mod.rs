//! Generators and brute-force checkers shared by the integration tests.
//! The checkers read only raw prefix values and factor probabilities; they
//! know nothing about how the library builds its answers.
#![allow(dead_code)]

use std::sync::Arc;

use aplab::graph::Edge;
use aplab::martingale::{
    m_theta, rational, DiscreteMartingale, Factor, FiniteProductSpace, Rational, RationalDistribution,
};
use aplab::process::StrategyFactory;
use aplab::properties::{ContainsEdges, MinDegree, PerfectMatching, Property};
use aplab::strategies::{FnFactory, ScheduleStrategy};
use num_traits::{One, Signed, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn e(u: u32, v: u32) -> Edge {
    Edge::of(u, v).unwrap()
}

fn all_edges(n: u32) -> Vec<Edge> {
    let mut out = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            out.push(e(u, v));
        }
    }
    out
}

/// Random positive weights normalised to exact probabilities.
pub fn random_probs(r: &mut ChaCha8Rng, k: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..k).map(|_| r.random_range(1..=5)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| rational(x, total)).collect()
}

/// A tiny 𝒟-process instance with a deterministic strategy.
pub struct TinyInstance {
    pub dist: RationalDistribution,
    pub strategy: Arc<dyn StrategyFactory>,
    pub property: Box<dyn Property>,
    pub horizon: usize,
    pub theta: Rational,
    pub m_star: u64,
    pub label: String,
}

/// One random instance on 4 vertices with `m*` from expectimax; the caller
/// decides about conformity. `None` if `m*` is out of reach.
pub fn random_process_instance(r: &mut ChaCha8Rng) -> Option<TinyInstance> {
    let n = 4u32;
    let edges = all_edges(n);
    let support_size = r.random_range(2..=3);
    let mut subsets: Vec<Vec<Edge>> = Vec::new();
    while subsets.len() < support_size {
        let k = r.random_range(1..=2);
        let mut s: Vec<Edge> = edges.choose_multiple(r, k).copied().collect();
        s.sort_unstable();
        if !subsets.contains(&s) {
            subsets.push(s);
        }
    }
    let probs = random_probs(r, support_size);
    let dist = RationalDistribution::new(n as usize, subsets.into_iter().zip(probs).collect()).ok()?;
    let (property, label): (Box<dyn Property>, String) = match r.random_range(0..3) {
        0 => {
            let k = r.random_range(1..=2);
            let need: Vec<Edge> = edges.choose_multiple(r, k).copied().collect();
            (Box::new(ContainsEdges::new(need.clone(), 3)), format!("contains {:?}", need))
        }
        1 => (Box::new(MinDegree::new(1)), "min-degree:1".into()),
        _ => (Box::new(PerfectMatching), "perfect-matching".into()),
    };
    let lists: Vec<Vec<Edge>> = (0..r.random_range(1..=2))
        .map(|_| {
            let mut l = edges.clone();
            l.shuffle(r);
            l
        })
        .collect();
    let strategy: Arc<dyn StrategyFactory> =
        Arc::new(FnFactory::new("schedule", move |_| Box::new(ScheduleStrategy::new(lists.clone()))));
    let horizon = r.random_range(1..=4);
    let m_star = m_theta(&dist, property.as_ref(), &rational(1, 2), 24).ok()??.max(1);
    let theta = rational(r.random_range(1..=4), 4);
    Some(TinyInstance { dist, strategy, property, horizon, theta, m_star, label })
}

/// A random rational martingale: `|S_0| <= 3`, `k <= 5`, `|S_j| <= 4`,
/// leaf values in `[0, 1]` with denominator 10, random `c_j`.
pub fn random_martingale(r: &mut ChaCha8Rng) -> DiscreteMartingale {
    let k = r.random_range(1..=5);
    let w0 = 1 + r.random_range(0..3);
    let mut factors = vec![Factor::new(random_probs(r, w0)).unwrap()];
    for _ in 0..k {
        let w = r.random_range(1..=4);
        factors.push(Factor::new(random_probs(r, w)).unwrap());
    }
    let space = FiniteProductSpace::new(factors);
    let depth = space.depth();
    let leaves: Vec<Rational> = (0..space.level_size(depth)).map(|_| rational(r.random_range(0..=10), 10)).collect();
    let values = tower(&space, leaves);
    let c: Vec<Rational> = (0..k).map(|_| rational(r.random_range(0..=12), 20)).collect();
    DiscreteMartingale::new(space, values, c).unwrap()
}

/// Conditional means of `leaves` at every level; `out[j]` has prefixes of
/// length `j + 1`.
pub fn tower(space: &FiniteProductSpace, leaves: Vec<Rational>) -> Vec<Vec<Rational>> {
    let depth = space.depth();
    let mut out = vec![leaves];
    for j in (1..depth).rev() {
        let f = &space.factors()[j];
        let next = out.last().unwrap();
        let cur: Vec<Rational> = (0..space.level_size(j))
            .map(|i| f.probs.iter().enumerate().map(|(s, p)| p * &next[i * f.len() + s]).sum())
            .collect();
        out.push(cur);
    }
    out.reverse();
    out
}

/// Coordinates of outcome `x`, first factor most significant.
fn coords(space: &FiniteProductSpace, x: usize) -> Vec<usize> {
    let mut out = vec![0; space.depth()];
    let mut x = x;
    for i in (0..space.depth()).rev() {
        let w = space.factors()[i].len();
        out[i] = x % w;
        x /= w;
    }
    out
}

fn index(space: &FiniteProductSpace, c: &[usize]) -> usize {
    c.iter().enumerate().fold(0, |acc, (i, &s)| acc * space.factors()[i].len() + s)
}

fn outcome_prob(space: &FiniteProductSpace, c: &[usize]) -> Rational {
    c.iter().enumerate().map(|(i, &s)| space.factors()[i].probs[s].clone()).product()
}

/// `m_j` at the length-`j+1` prefix of `c`.
fn value_at(m: &DiscreteMartingale, j: usize, c: &[usize]) -> Rational {
    m.value(j, index(m.space(), &c[..=j])).clone()
}

/// `d <= c` where `c` is known through `c²`.
fn within(d: &Rational, c2: &Rational) -> bool {
    !d.is_positive() || d * d <= *c2
}

/// Stability straight from the definition.
pub fn brute_stable(m: &DiscreteMartingale, x: usize) -> bool {
    let space = m.space();
    let c = coords(space, x);
    (1..=m.k()).all(|j| {
        let here = value_at(m, j, &c);
        (0..space.factors()[j].len()).all(|s| {
            let mut alt = c.clone();
            alt[j] = s;
            within(&(value_at(m, j, &alt) - &here), &m.c_squared()[j - 1])
        })
    })
}

pub fn brute_balanced(m: &DiscreteMartingale) -> bool {
    let space = m.space();
    let total = space.level_size(space.depth());
    (0..total).all(|x| brute_stable(m, x))
}

pub fn brute_martingale(m: &DiscreteMartingale) -> bool {
    let space = m.space();
    (1..=m.k()).all(|j| {
        (0..space.level_size(j)).all(|p| {
            let f = &space.factors()[j];
            let mean: Rational = (0..f.len()).map(|s| &f.probs[s] * m.value(j, p * f.len() + s)).sum();
            mean == *m.value(j - 1, p)
        })
    })
}

/// Same initial values, balance, domination on stable outcomes, the
/// martingale property of `M'` and `|M'_j - M'_{j-1}| <= c_j`.
pub fn check_coupling(m: &DiscreteMartingale, coupled: &DiscreteMartingale) -> Result<(), String> {
    if m.level(0) != coupled.level(0) {
        return Err("initial values differ".into());
    }
    if !brute_balanced(coupled) {
        return Err("coupled martingale not balanced".into());
    }
    if !brute_martingale(coupled) {
        return Err("coupled values are not a martingale".into());
    }
    let space = m.space();
    let total = space.level_size(space.depth());
    for x in 0..total {
        let c = coords(space, x);
        for j in 1..=m.k() {
            let step = value_at(coupled, j, &c) - value_at(coupled, j - 1, &c);
            if !within(&step.abs(), &m.c_squared()[j - 1]) {
                return Err(format!("bounded differences fail at outcome {} level {}", x, j));
            }
        }
        if brute_stable(m, x) {
            for j in 1..=m.k() {
                if value_at(coupled, j, &c) > value_at(m, j, &c) {
                    return Err(format!("M'_{} > M_{} on stable outcome {}", j, j, x));
                }
            }
        }
    }
    Ok(())
}

/// `(Pr[M_k <= M_0 - t], Pr[X ∉ Γ_M])` by enumeration.
pub fn brute_tail(m: &DiscreteMartingale, t: &Rational) -> (Rational, Rational) {
    let space = m.space();
    let total = space.level_size(space.depth());
    let mut lhs = Rational::zero();
    let mut unstable = Rational::zero();
    for x in 0..total {
        let c = coords(space, x);
        let p = outcome_prob(space, &c);
        if value_at(m, m.k(), &c) <= value_at(m, 0, &c) - t {
            lhs += &p;
        }
        if !brute_stable(m, x) {
            unstable += &p;
        }
    }
    (lhs, unstable)
}

pub fn one() -> Rational {
    Rational::one()
}

/// An instance with its exact Doob table and parameters, inside the regime
/// where the quantified boost applies: `0 < θ <= μ < 1` and `N <= C(θ)·m*`.
pub struct Conforming {
    pub inst: TinyInstance,
    pub doob: aplab::martingale::DoobTable,
    pub params: aplab::martingale::BoostParams,
}

/// Draws random instances until `count` conforming ones are found. Also
/// returns how many draws were rejected.
pub fn conforming_instances(seed: u64, count: usize) -> (Vec<Conforming>, usize) {
    use aplab::martingale::{exact_doob, BoostParams};
    use num_bigint::BigInt;
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut rejected = 0;
    while out.len() < count {
        let Some(inst) = random_process_instance(&mut r) else {
            rejected += 1;
            continue;
        };
        let doob = exact_doob(&inst.dist, inst.strategy.as_ref(), inst.property.as_ref(), inst.horizon).unwrap();
        let mu = doob.mu().clone();
        if !mu.is_positive() || mu >= one() || inst.theta > mu {
            rejected += 1;
            continue;
        }
        let params = BoostParams::new(inst.theta.clone(), mu, inst.m_star).unwrap();
        let budget = &params.c_theta * Rational::from_integer(BigInt::from(inst.m_star));
        if Rational::from_integer(BigInt::from(inst.horizon)) > budget {
            rejected += 1;
            continue;
        }
        out.push(Conforming { inst, doob, params });
    }
    (out, rejected)
}
