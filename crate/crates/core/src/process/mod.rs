//! The 𝒟-process engine.
//!
//! Each step draws an edge subset from a [`DistributionSpec`], hands it to a
//! [`Strategy`], adds the chosen edge and updates the property monitor. The
//! free-move variant lets a [`FreeMoveStrategy`] swap the presented subset
//! for any member of the support exactly once.

pub mod convert;

use std::fmt::Write as _;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, GraphError, MultiGraph, VertexId};
use crate::properties::{audit_certificate, Certificate, Property, PropertyError};
use crate::rng::{self, StrategyRng};

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("step {step}: strategy chose {edge} outside the presented sample")]
    OutsideSample { step: u64, edge: Edge },
    #[error("step {step}: free-move subset is not in the support of the distribution")]
    NotInSupport { step: u64 },
    #[error("step {step}: a second free move was requested")]
    MultipleFreeMoves { step: u64 },
    #[error("max_steps must be at least 1")]
    ZeroSteps,
    #[error("step {step}: certificate audit failed: {message}")]
    CertificateAudit { step: u64, message: String },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// The shape of 𝒟.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    /// Uniform over the `n` spanning stars.
    SemiRandomStar,
    /// `k` distinct edges of `K_n`, uniformly.
    UniformKEdges(usize),
    /// Explicit finite support with floating-point probabilities.
    Explicit(Vec<(Vec<Edge>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    n: usize,
    kind: DistributionKind,
    cumulative: Vec<f64>,
}

impl DistributionSpec {
    pub fn semi_random(n: usize) -> Result<Self, ProcessError> {
        if n < 2 {
            return Err(ProcessError::InvalidDistribution("semi-random process needs n >= 2".into()));
        }
        Ok(DistributionSpec { n, kind: DistributionKind::SemiRandomStar, cumulative: Vec::new() })
    }

    pub fn uniform_k_edges(n: usize, k: usize) -> Result<Self, ProcessError> {
        let total = n * n.saturating_sub(1) / 2;
        if k == 0 || k > total {
            return Err(ProcessError::InvalidDistribution(format!("k={} outside 1..={}", k, total)));
        }
        Ok(DistributionSpec { n, kind: DistributionKind::UniformKEdges(k), cumulative: Vec::new() })
    }

    /// Explicit support. Subsets are canonicalised (sorted, deduplicated);
    /// probabilities must be positive and sum to 1 within `1e-9`.
    pub fn explicit(n: usize, entries: Vec<(Vec<Edge>, f64)>) -> Result<Self, ProcessError> {
        if entries.is_empty() {
            return Err(ProcessError::InvalidDistribution("empty support".into()));
        }
        let mut canon = Vec::with_capacity(entries.len());
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for (mut edges, p) in entries {
            if edges.is_empty() {
                return Err(ProcessError::InvalidDistribution("empty subset in support".into()));
            }
            if !(p > 0.0) {
                return Err(ProcessError::InvalidDistribution(format!("non-positive probability {}", p)));
            }
            for e in &edges {
                let (u, v) = e.endpoints();
                if v.0 as usize > n || u.0 == 0 {
                    return Err(ProcessError::InvalidDistribution(format!("edge {} outside [{}]", e, n)));
                }
            }
            edges.sort_unstable();
            edges.dedup();
            if canon.iter().any(|(f, _): &(Vec<Edge>, f64)| *f == edges) {
                return Err(ProcessError::InvalidDistribution("duplicate subset in support".into()));
            }
            acc += p;
            cumulative.push(acc);
            canon.push((edges, p));
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(ProcessError::InvalidDistribution(format!("probabilities sum to {}", acc)));
        }
        Ok(DistributionSpec { n, kind: DistributionKind::Explicit(canon), cumulative })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn id(&self) -> String {
        match &self.kind {
            DistributionKind::SemiRandomStar => format!("semi-random:{}", self.n),
            DistributionKind::UniformKEdges(k) => format!("uniform-k-edges:{}:{}", self.n, k),
            DistributionKind::Explicit(entries) => format!("explicit:{}:{}", self.n, entries.len()),
        }
    }

    /// Decodes one environment word into a sample. This is the whole
    /// sampling contract: one word per step.
    pub fn sample_from_word(&self, word: u64) -> Sample {
        match &self.kind {
            DistributionKind::SemiRandomStar => {
                Sample::Star { center: VertexId::from_index(rng::uniform_index(word, self.n)), n: self.n }
            }
            DistributionKind::UniformKEdges(k) => {
                let mut state = word;
                let mut edges: Vec<Edge> = Vec::with_capacity(*k);
                while edges.len() < *k {
                    let u = rng::uniform_index(rng::splitmix64(&mut state), self.n);
                    let mut v = rng::uniform_index(rng::splitmix64(&mut state), self.n - 1);
                    if v >= u {
                        v += 1;
                    }
                    let e = Edge::new(VertexId::from_index(u), VertexId::from_index(v)).expect("u != v");
                    if !edges.contains(&e) {
                        edges.push(e);
                    }
                }
                edges.sort_unstable();
                Sample::Edges(edges)
            }
            DistributionKind::Explicit(entries) => {
                let x = rng::unit_interval(word);
                let i = self.cumulative.partition_point(|&c| c <= x).min(entries.len() - 1);
                Sample::Edges(entries[i].0.clone())
            }
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Sample {
        self.sample_from_word(rng.next_u64())
    }

    pub fn in_support(&self, sample: &Sample) -> bool {
        match (&self.kind, sample) {
            (DistributionKind::SemiRandomStar, Sample::Star { center, n }) => {
                *n == self.n && center.0 >= 1 && center.0 as usize <= self.n
            }
            (DistributionKind::UniformKEdges(k), Sample::Edges(edges)) => {
                let mut sorted = edges.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() == *k && edges.len() == *k && edges.iter().all(|e| e.endpoints().1 .0 as usize <= self.n)
            }
            (DistributionKind::Explicit(entries), Sample::Edges(edges)) => {
                let mut sorted = edges.clone();
                sorted.sort_unstable();
                sorted.dedup();
                entries.iter().any(|(f, _)| *f == sorted)
            }
            _ => false,
        }
    }
}

/// One presented subset `X_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Sample {
    /// All `n - 1` edges at `center`.
    Star { center: VertexId, n: usize },
    /// An explicit edge list (sorted, duplicate-free).
    Edges(Vec<Edge>),
}

impl Sample {
    pub fn star(center: VertexId, n: usize) -> Self {
        Sample::Star { center, n }
    }

    pub fn edges(mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Sample::Edges(edges)
    }

    pub fn star_center(&self) -> Option<VertexId> {
        match self {
            Sample::Star { center, .. } => Some(*center),
            Sample::Edges(_) => None,
        }
    }

    pub fn contains(&self, e: Edge) -> bool {
        match self {
            Sample::Star { center, .. } => e.contains(*center),
            Sample::Edges(edges) => edges.contains(&e),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sample::Star { n, .. } => n - 1,
            Sample::Edges(edges) => edges.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lazily enumerates the denoted edges in lexicographic order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Edge> + '_> {
        match self {
            Sample::Star { center, n } => {
                let c = *center;
                Box::new(
                    (1..=*n as u32)
                        .filter(move |&v| v != c.0)
                        .map(move |v| Edge::new(c, VertexId(v)).expect("distinct")),
                )
            }
            Sample::Edges(edges) => Box::new(edges.iter().copied()),
        }
    }

    /// The lexicographically smallest edge of the sample.
    pub fn first_edge(&self) -> Edge {
        self.iter().next().expect("samples are non-empty")
    }
}

/// Returned by a strategy that cannot continue (e.g. an exhausted
/// replacement budget). The trial ends as not reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GiveUp;

/// A player of the 𝒟-process.
///
/// `decide` is called before the chosen edge is added; a strategy may update
/// its own state on the assumption that its answer is applied.
pub trait Strategy: Send {
    fn name(&self) -> String;

    fn is_deterministic(&self) -> bool {
        true
    }

    fn decide(&mut self, step: u64, graph: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp>;

    /// Structure the strategy maintains that witnesses a property.
    fn certificate(&self) -> Certificate<'_> {
        Certificate::None
    }

    /// Step at which a multi-stage strategy switched stage, if it did.
    fn milestone(&self) -> Option<u64> {
        None
    }
}

/// A strategy for the free-move process.
pub trait FreeMoveStrategy: Strategy {
    /// Called before `decide` at every step; returning `Some(w)` replaces the
    /// presented subset with `w`. Allowed at most once per run.
    fn free_move(&mut self, step: u64, graph: &MultiGraph, presented: &Sample) -> Option<Sample>;
}

/// Builds fresh strategy instances; shared read-only across workers.
pub trait StrategyFactory: Send + Sync {
    fn id(&self) -> String;
    fn build(&self, n: usize) -> Box<dyn Strategy>;
    fn is_deterministic(&self) -> bool {
        true
    }
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
    fn decide(&mut self, step: u64, graph: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        (**self).decide(step, graph, sample, rng)
    }
    fn certificate(&self) -> Certificate<'_> {
        (**self).certificate()
    }
    fn milestone(&self) -> Option<u64> {
        (**self).milestone()
    }
}

struct NoFreeMove<'a>(&'a mut dyn Strategy);

impl Strategy for NoFreeMove<'_> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn is_deterministic(&self) -> bool {
        self.0.is_deterministic()
    }
    fn decide(&mut self, step: u64, graph: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        self.0.decide(step, graph, sample, rng)
    }
    fn certificate(&self) -> Certificate<'_> {
        self.0.certificate()
    }
    fn milestone(&self) -> Option<u64> {
        self.0.milestone()
    }
}

impl FreeMoveStrategy for NoFreeMove<'_> {
    fn free_move(&mut self, _: u64, _: &MultiGraph, _: &Sample) -> Option<Sample> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub sample: Sample,
    pub chosen: Edge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeMoveRecord {
    pub step: u64,
    pub subset: Sample,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub n: usize,
    pub seed: u64,
    pub trial: u64,
    /// Presented samples (before any free-move substitution) and choices.
    pub steps: Vec<TraceStep>,
    pub graph: MultiGraph,
    pub stopping_time: Option<u64>,
    pub free_move: Option<FreeMoveRecord>,
    pub milestone: Option<u64>,
}

impl Trace {
    /// Line-oriented text: `t center chosen_u chosen_v`, with `-` as the
    /// center for non-star samples.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let (u, v) = s.chosen.endpoints();
            let center = s.sample.star_center().map(|c| c.to_string()).unwrap_or_else(|| "-".into());
            writeln!(out, "{} {} {} {}", i + 1, center, u, v).expect("String write");
        }
        out
    }

    pub fn manifest(&self, dist: &DistributionSpec, strategy: &str, property: &str, max_steps: u64) -> TrialManifest {
        TrialManifest {
            seed: self.seed,
            trial: self.trial,
            dist: dist.id(),
            strategy: strategy.to_string(),
            property: property.to_string(),
            max_steps,
            stopping_time: self.stopping_time,
            free_move_step: self.free_move.as_ref().map(|f| f.step),
        }
    }
}

/// JSON manifest accompanying a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialManifest {
    pub seed: u64,
    pub trial: u64,
    pub dist: String,
    pub strategy: String,
    pub property: String,
    pub max_steps: u64,
    pub stopping_time: Option<u64>,
    pub free_move_step: Option<u64>,
}

/// Compact per-trial outcome used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub stopping_time: Option<u64>,
    pub milestone: Option<u64>,
    pub steps_taken: u64,
}

/// Where samples come from.
pub trait Environment {
    fn next_sample(&mut self, step: u64) -> Option<Sample>;
}

/// Random environment following the per-trial stream contract.
pub struct RandomEnvironment<'a> {
    dist: &'a DistributionSpec,
    stream: ChaCha8Rng,
}

impl<'a> RandomEnvironment<'a> {
    pub fn new(dist: &'a DistributionSpec, seed: u64, trial: u64) -> Self {
        RandomEnvironment { dist, stream: rng::environment_stream(seed, trial) }
    }
}

impl Environment for RandomEnvironment<'_> {
    fn next_sample(&mut self, step: u64) -> Option<Sample> {
        debug_assert_eq!(self.stream.get_word_pos(), 2 * (step as u128 - 1));
        Some(self.dist.sample_from_word(self.stream.next_u64()))
    }
}

/// Replays a fixed sequence of samples; used for exact enumeration.
pub struct ScriptedEnvironment<'a> {
    samples: &'a [Sample],
}

impl<'a> ScriptedEnvironment<'a> {
    pub fn new(samples: &'a [Sample]) -> Self {
        ScriptedEnvironment { samples }
    }
}

impl Environment for ScriptedEnvironment<'_> {
    fn next_sample(&mut self, step: u64) -> Option<Sample> {
        self.samples.get(step as usize - 1).cloned()
    }
}

const AUDIT_INTERVAL: u64 = 1000;

/// Options for [`drive`].
pub struct DriveOptions<'a> {
    pub n: usize,
    pub max_steps: u64,
    pub seed: u64,
    pub trial: u64,
    pub record_steps: bool,
    /// Support used to validate free moves.
    pub support: Option<&'a DistributionSpec>,
    /// Keep stepping after the property first holds (used by exact replay,
    /// where the horizon is fixed).
    pub run_to_horizon: bool,
}

/// The engine loop shared by every entry point.
pub fn drive(
    env: &mut dyn Environment,
    player: &mut dyn FreeMoveStrategy,
    property: &dyn Property,
    opts: &DriveOptions<'_>,
) -> Result<Trace, ProcessError> {
    if opts.max_steps == 0 {
        return Err(ProcessError::ZeroSteps);
    }
    let mut graph = MultiGraph::new(opts.n);
    let mut monitor = property.monitor(opts.n);
    let mut strat_rng = rng::strategy_stream(opts.seed, opts.trial);
    let mut steps = Vec::new();
    let mut free_move: Option<FreeMoveRecord> = None;
    let mut stopping_time = None;
    let audit = cfg!(debug_assertions);

    for t in 1..=opts.max_steps {
        let Some(presented) = env.next_sample(t) else { break };
        let swap = player.free_move(t, &graph, &presented);
        let offered = match swap {
            Some(w) => {
                if free_move.is_some() {
                    return Err(ProcessError::MultipleFreeMoves { step: t });
                }
                let ok = opts.support.map(|d| d.in_support(&w)).unwrap_or(false);
                if !ok {
                    return Err(ProcessError::NotInSupport { step: t });
                }
                free_move = Some(FreeMoveRecord { step: t, subset: w.clone() });
                w
            }
            None => presented.clone(),
        };
        let chosen = match player.decide(t, &graph, &offered, &mut strat_rng) {
            Ok(e) => e,
            Err(GiveUp) => break,
        };
        if !offered.contains(chosen) {
            return Err(ProcessError::OutsideSample { step: t, edge: chosen });
        }
        graph.add_edge(chosen)?;
        if opts.record_steps {
            steps.push(TraceStep { sample: presented, chosen });
        }
        let cert = player.certificate();
        if audit && t % AUDIT_INTERVAL == 0 && !matches!(cert, Certificate::None) {
            audit_certificate(&graph, &cert).map_err(|message| ProcessError::CertificateAudit { step: t, message })?;
        }
        if stopping_time.is_none() && monitor.update(&graph, chosen, &cert)? {
            if audit && !matches!(cert, Certificate::None) {
                audit_certificate(&graph, &cert)
                    .map_err(|message| ProcessError::CertificateAudit { step: t, message })?;
            }
            stopping_time = Some(t);
            if !opts.run_to_horizon {
                break;
            }
        }
    }

    Ok(Trace {
        n: opts.n,
        seed: opts.seed,
        trial: opts.trial,
        steps,
        graph,
        stopping_time,
        free_move,
        milestone: player.milestone(),
    })
}

/// Runs the 𝒟-process for trial 0 of `seed`, recording every step.
pub fn run_process(
    dist: &DistributionSpec,
    strategy: &mut dyn Strategy,
    property: &dyn Property,
    max_steps: u64,
    seed: u64,
) -> Result<Trace, ProcessError> {
    run_process_trial(dist, strategy, property, max_steps, seed, 0)
}

pub fn run_process_trial(
    dist: &DistributionSpec,
    strategy: &mut dyn Strategy,
    property: &dyn Property,
    max_steps: u64,
    seed: u64,
    trial: u64,
) -> Result<Trace, ProcessError> {
    let mut env = RandomEnvironment::new(dist, seed, trial);
    let opts = DriveOptions {
        n: dist.n(),
        max_steps,
        seed,
        trial,
        record_steps: true,
        support: Some(dist),
        run_to_horizon: false,
    };
    drive(&mut env, &mut NoFreeMove(strategy), property, &opts)
}

/// Runs the free-move process for trial 0 of `seed`.
pub fn run_free_move(
    dist: &DistributionSpec,
    strategy: &mut dyn FreeMoveStrategy,
    property: &dyn Property,
    max_steps: u64,
    seed: u64,
) -> Result<Trace, ProcessError> {
    run_free_move_trial(dist, strategy, property, max_steps, seed, 0)
}

pub fn run_free_move_trial(
    dist: &DistributionSpec,
    strategy: &mut dyn FreeMoveStrategy,
    property: &dyn Property,
    max_steps: u64,
    seed: u64,
    trial: u64,
) -> Result<Trace, ProcessError> {
    let mut env = RandomEnvironment::new(dist, seed, trial);
    let opts = DriveOptions {
        n: dist.n(),
        max_steps,
        seed,
        trial,
        record_steps: true,
        support: Some(dist),
        run_to_horizon: false,
    };
    drive(&mut env, strategy, property, &opts)
}

/// One Monte Carlo trial without step recording.
pub fn run_trial(
    dist: &DistributionSpec,
    factory: &dyn StrategyFactory,
    property: &dyn Property,
    max_steps: u64,
    seed: u64,
    trial: u64,
) -> Result<TrialRecord, ProcessError> {
    let mut strategy = factory.build(dist.n());
    let mut env = RandomEnvironment::new(dist, seed, trial);
    let opts = DriveOptions {
        n: dist.n(),
        max_steps,
        seed,
        trial,
        record_steps: false,
        support: Some(dist),
        run_to_horizon: false,
    };
    let trace = drive(&mut env, &mut NoFreeMove(strategy.as_mut()), property, &opts)?;
    Ok(TrialRecord {
        trial,
        stopping_time: trace.stopping_time,
        milestone: trace.milestone,
        steps_taken: trace.graph.edge_count() as u64,
    })
}

/// Replays a deterministic strategy on a fixed sample sequence.
pub fn run_scripted(
    n: usize,
    samples: &[Sample],
    strategy: &mut dyn Strategy,
    property: &dyn Property,
) -> Result<Trace, ProcessError> {
    let mut env = ScriptedEnvironment::new(samples);
    let opts = DriveOptions {
        n,
        max_steps: samples.len().max(1) as u64,
        seed: 0,
        trial: 0,
        record_steps: true,
        support: None,
        run_to_horizon: true,
    };
    drive(&mut env, &mut NoFreeMove(strategy), property, &opts)
}

/// Scripted replay for free-move strategies; `support` validates the swap.
pub fn run_scripted_free(
    support: &DistributionSpec,
    samples: &[Sample],
    strategy: &mut dyn FreeMoveStrategy,
    property: &dyn Property,
) -> Result<Trace, ProcessError> {
    let mut env = ScriptedEnvironment::new(samples);
    let opts = DriveOptions {
        n: support.n(),
        max_steps: samples.len().max(1) as u64,
        seed: 0,
        trial: 0,
        record_steps: true,
        support: Some(support),
        run_to_horizon: true,
    };
    drive(&mut env, strategy, property, &opts)
}
