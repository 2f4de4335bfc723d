use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{
    at_least_sqrt, exceeds_sqrt, format_rational, rational, to_f64, DoobTable, MartingaleError, Rational,
    RationalDistribution,
};
use crate::graph::{Edge, MultiGraph};
use crate::process::{run_scripted_free, FreeMoveStrategy, GiveUp, Sample, Strategy, StrategyFactory};
use crate::properties::{Certificate, Property};
use crate::rng::StrategyRng;

/// Dyadic resolution used when `log2(1/(1-θ))` is irrational.
const LOG_DENOM: i64 = 1 << 20;

/// `θ`, `μ`, `m*` and the derived `C(θ)` and `c²`, all exact.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostParams {
    pub theta: Rational,
    pub mu: Rational,
    pub m_star: u64,
    /// `1 + log2(1/(1-θ))`, exact when `1/(1-θ)` is a power of two and
    /// otherwise rounded up to a multiple of `2^-20`.
    pub c_theta: Rational,
    pub c_theta_exact: bool,
    /// `c² = μ²(1-μ)² / (2 C(θ) m*)`.
    pub c_squared: Rational,
}

impl BoostParams {
    pub fn new(theta: Rational, mu: Rational, m_star: u64) -> Result<Self, MartingaleError> {
        if !theta.is_positive() || theta >= Rational::one() {
            return Err(MartingaleError::Invalid(format!("theta = {} outside (0, 1)", format_rational(&theta))));
        }
        if mu.is_negative() || mu > Rational::one() {
            return Err(MartingaleError::Invalid(format!("mu = {} outside [0, 1]", format_rational(&mu))));
        }
        if m_star == 0 {
            return Err(MartingaleError::Invalid("m* must be positive".into()));
        }
        let (c_theta, c_theta_exact) = c_of_theta(&theta);
        let one_minus = Rational::one() - &mu;
        let num = &mu * &mu * &one_minus * &one_minus;
        let c_squared = num / (rational(2, 1) * &c_theta * Rational::from_integer(BigInt::from(m_star)));
        Ok(BoostParams { theta, mu, m_star, c_theta, c_theta_exact, c_squared })
    }

    pub fn c(&self) -> f64 {
        to_f64(&self.c_squared).sqrt()
    }
}

fn c_of_theta(theta: &Rational) -> (Rational, bool) {
    let inv = (Rational::one() - theta).recip();
    if inv.is_integer() {
        let k = inv.numer();
        let bits = k.bits();
        if k.is_positive() && *k == BigInt::one() << (bits - 1) {
            return (Rational::from_integer(BigInt::from(bits)), true);
        }
    }
    let log = to_f64(&inv).log2();
    let up = (log * LOG_DENOM as f64).ceil() as i64 + 1;
    (Rational::one() + rational(up, LOG_DENOM), false)
}

/// Which prefixes have potential, the stopping time `τ` and the stable set.
#[derive(Debug, Clone)]
pub struct PotentialReport {
    horizon: usize,
    /// `witness[j][prefix]` for prefixes of length `j >= 1`: the first
    /// support index `w` with `f_j(r_1..w) - f_j(r_1..r_j) > c`.
    witness: Vec<Vec<Option<usize>>>,
    /// `stop[j][prefix]`: `τ` restricted to this prefix, if already reached.
    stop: Vec<Vec<Option<usize>>>,
    pub stable_mass: Rational,
    pub pr_tau_le_n: Rational,
}

impl PotentialReport {
    pub fn has_potential(&self, j: usize, prefix: usize) -> bool {
        self.witness[j][prefix].is_some()
    }

    pub fn witness(&self, j: usize, prefix: usize) -> Option<usize> {
        self.witness[j][prefix]
    }

    /// `τ` for the full sequence with index `x`; `None` means `τ > N`.
    pub fn tau(&self, x: usize) -> Option<usize> {
        self.stop[self.horizon][x]
    }

    /// `τ` if it falls within the prefix, else `None`.
    pub fn tau_of_prefix(&self, j: usize, prefix: usize) -> Option<usize> {
        self.stop[j][prefix]
    }

    pub fn is_stable(&self, x: usize) -> bool {
        self.tau(x).is_none()
    }
}

pub fn find_potential(doob: &DoobTable, params: &BoostParams) -> PotentialReport {
    let space = doob.space();
    let horizon = doob.horizon();
    let mut witness = vec![Vec::new(); horizon + 1];
    let mut stop: Vec<Vec<Option<usize>>> = vec![vec![None]; horizon + 1];
    for j in 1..=horizon {
        let width = space.factors()[j - 1].len();
        let size = space.level_size(j);
        let mut wj = vec![None; size];
        let mut sj = vec![None; size];
        for prefix in 0..size {
            let (parent, _) = space.parent(j, prefix);
            let here = doob.value(j, prefix);
            wj[prefix] = (0..width).find(|&w| {
                let gain = doob.value(j, space.child(j - 1, parent, w)) - here;
                exceeds_sqrt(&gain, &params.c_squared)
            });
            sj[prefix] = stop[j - 1][parent].or(wj[prefix].map(|_| j));
        }
        witness[j] = wj;
        stop[j] = sj;
    }
    let stable_mass: Rational = (0..space.level_size(horizon))
        .filter(|&x| stop[horizon][x].is_none())
        .map(|x| doob.prefix_probability(horizon, x))
        .sum();
    let pr_tau_le_n = Rational::one() - &stable_mass;
    PotentialReport { horizon, witness, stop, stable_mass, pr_tau_le_n }
}

/// The free-move strategy that swaps `X_τ` for its witness and otherwise
/// plays the base strategy unchanged.
pub struct PotentialBoostStrategy {
    inner: Box<dyn Strategy>,
    report: Arc<PotentialReport>,
    dist: RationalDistribution,
    widths: Vec<usize>,
    prefix: usize,
    used: bool,
}

impl PotentialBoostStrategy {
    pub fn new(inner: Box<dyn Strategy>, report: Arc<PotentialReport>, dist: RationalDistribution) -> Self {
        let widths = vec![dist.support().len(); report.horizon];
        PotentialBoostStrategy { inner, report, dist, widths, prefix: 0, used: false }
    }
}

impl Strategy for PotentialBoostStrategy {
    fn name(&self) -> String {
        format!("potential-boost:{}", self.inner.name())
    }

    fn decide(&mut self, step: u64, graph: &MultiGraph, sample: &Sample, rng: &mut StrategyRng) -> Result<Edge, GiveUp> {
        self.inner.decide(step, graph, sample, rng)
    }

    fn certificate(&self) -> Certificate<'_> {
        self.inner.certificate()
    }
}

impl FreeMoveStrategy for PotentialBoostStrategy {
    fn free_move(&mut self, step: u64, _graph: &MultiGraph, presented: &Sample) -> Option<Sample> {
        let j = step as usize;
        if self.used || j > self.report.horizon {
            return None;
        }
        let s = self.dist.index_of(presented)?;
        self.prefix = self.prefix * self.widths[j - 1] + s;
        if self.report.tau_of_prefix(j, self.prefix) == Some(j) {
            self.used = true;
            let w = self.report.witness(j, self.prefix).expect("stopped prefix has a witness");
            return Some(self.dist.sample(w));
        }
        None
    }
}

/// Exact outcome of one boosting round, computed two ways: from the Doob
/// table and by replaying the free-move strategy through the engine.
#[derive(Debug, Clone, Serialize)]
pub struct BoostReport {
    pub mu: String,
    pub c_squared: String,
    pub pr_tau_le_n: String,
    pub boosted_win: String,
    pub boosted_win_replay: String,
    pub routes_agree: bool,
    /// `Pr[win, τ > N]` for the base and boosted strategies.
    pub base_win_no_move: String,
    pub boosted_win_no_move: String,
    /// `Pr[win, τ <= N]` for the base and boosted strategies.
    pub base_win_moved: String,
    pub boosted_win_moved: String,
    pub equal_without_move: bool,
    pub gain_when_moved: bool,
    pub lower_bound: bool,
}

impl BoostReport {
    pub fn all_hold(&self) -> bool {
        self.routes_agree && self.equal_without_move && self.gain_when_moved && self.lower_bound
    }
}

pub fn potential_boost_run(
    dist: &RationalDistribution,
    strategy: &dyn StrategyFactory,
    property: &dyn Property,
    doob: &DoobTable,
    params: &BoostParams,
) -> Result<BoostReport, MartingaleError> {
    if !strategy.is_deterministic() {
        return Err(MartingaleError::Randomized(strategy.id()));
    }
    let report = Arc::new(find_potential(doob, params));
    let space = doob.space();
    let horizon = doob.horizon();

    // Route A: sum over stopped prefixes of Pr[prefix]·f_τ(r_1..w_τ),
    // plus the stable sequences at face value.
    let mut boosted_table = Rational::zero();
    for j in 1..=horizon {
        for prefix in 0..space.level_size(j) {
            if report.tau_of_prefix(j, prefix) == Some(j) {
                let (parent, _) = space.parent(j, prefix);
                let w = report.witness(j, prefix).expect("witness");
                boosted_table += doob.prefix_probability(j, prefix) * doob.value(j, space.child(j - 1, parent, w));
            }
        }
    }

    // Route B: replay every sequence through the engine with the swap.
    let spec = dist.to_spec()?;
    let samples: Vec<Sample> = (0..dist.support().len()).map(|i| dist.sample(i)).collect();
    let mut replay = Rational::zero();
    let (mut base_no, mut boost_no, mut base_mv, mut boost_mv) =
        (Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero());
    let mut script = Vec::with_capacity(horizon);
    for x in 0..space.level_size(horizon) {
        script.clear();
        script.extend(space.decode(horizon, x).into_iter().map(|s| samples[s].clone()));
        let mut player = PotentialBoostStrategy::new(strategy.build(dist.n()), report.clone(), dist.clone());
        let trace = run_scripted_free(&spec, &script, &mut player, property)?;
        let p = doob.prefix_probability(horizon, x);
        let boosted = trace.stopping_time.is_some();
        let base = doob.win(x);
        debug_assert_eq!(trace.free_move.is_some(), report.tau(x).is_some());
        if boosted {
            replay += p;
        }
        match report.tau(x) {
            None => {
                if base {
                    base_no += p;
                    boosted_table += p;
                }
                if boosted {
                    boost_no += p;
                }
            }
            Some(_) => {
                if base {
                    base_mv += p;
                }
                if boosted {
                    boost_mv += p;
                }
            }
        }
    }

    let pr = &report.pr_tau_le_n;
    let c2p2 = &params.c_squared * pr * pr;
    let gain_when_moved = if pr.is_zero() { true } else { exceeds_sqrt(&(&boost_mv - &base_mv), &c2p2) };
    let lower_bound = at_least_sqrt(&(&replay - doob.mu()), &c2p2);
    Ok(BoostReport {
        mu: format_rational(doob.mu()),
        c_squared: format_rational(&params.c_squared),
        pr_tau_le_n: format_rational(pr),
        boosted_win: format_rational(&boosted_table),
        boosted_win_replay: format_rational(&replay),
        routes_agree: boosted_table == replay,
        base_win_no_move: format_rational(&base_no),
        boosted_win_no_move: format_rational(&boost_no),
        base_win_moved: format_rational(&base_mv),
        boosted_win_moved: format_rational(&boost_mv),
        equal_without_move: base_no == boost_no,
        gain_when_moved,
        lower_bound,
    })
}

/// Checks `Pr[τ <= N] >= (1-μ)/2` on an instance satisfying its
/// hypotheses: `μ > 0` and `N <= C(θ)·m*`. At `μ = 1` the bound is 0.
#[derive(Debug, Clone, Serialize)]
pub struct QuantifyReport {
    pub mu: String,
    pub horizon: usize,
    pub m_star: u64,
    pub c_theta: String,
    pub pr_tau_le_n: String,
    pub bound: String,
    pub margin: f64,
    pub holds: bool,
}

pub fn verify_quantify_boost(doob: &DoobTable, params: &BoostParams) -> Result<QuantifyReport, MartingaleError> {
    let mu = doob.mu();
    if *mu != params.mu {
        return Err(MartingaleError::Invalid("params.mu differs from the table".into()));
    }
    if !mu.is_positive() {
        return Err(MartingaleError::Precondition("mu = 0".into()));
    }
    let budget = &params.c_theta * Rational::from_integer(BigInt::from(params.m_star));
    let horizon = Rational::from_integer(BigInt::from(doob.horizon()));
    if horizon > budget {
        return Err(MartingaleError::Precondition(format!(
            "N = {} exceeds C(theta)·m* = {}",
            doob.horizon(),
            format_rational(&budget)
        )));
    }
    let report = find_potential(doob, params);
    let bound = (Rational::one() - mu) / rational(2, 1);
    let margin = to_f64(&(&report.pr_tau_le_n - &bound));
    Ok(QuantifyReport {
        mu: format_rational(mu),
        horizon: doob.horizon(),
        m_star: params.m_star,
        c_theta: format_rational(&params.c_theta),
        pr_tau_le_n: format_rational(&report.pr_tau_le_n),
        bound: format_rational(&bound),
        margin,
        holds: report.pr_tau_le_n >= bound,
    })
}

/// The iteration `γ_{i+1} = γ_i + γ_i(1-γ_i)³/(4√m*)` run `⌈√m*⌉` times.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub theta: f64,
    pub theta2: f64,
    pub m_star: u64,
    pub iterations: u64,
    pub terminal: f64,
    pub required: f64,
    pub holds: bool,
}

pub fn boost_schedule(theta: f64, theta2: f64, m_star: u64) -> Result<ScheduleReport, MartingaleError> {
    if !(0.0 < theta && theta < theta2 && theta2 < 1.0) || m_star == 0 {
        return Err(MartingaleError::Invalid("need 0 < theta < theta2 < 1 and m* >= 1".into()));
    }
    let root = (m_star as f64).sqrt();
    let iterations = root.ceil() as u64;
    let mut g = theta;
    for _ in 0..iterations {
        g += g * (1.0 - g).powi(3) / (4.0 * root);
    }
    let required = theta2.min(theta + theta * (1.0 - theta).powi(3) / 32.0);
    Ok(ScheduleReport { theta, theta2, m_star, iterations, terminal: g, required, holds: g >= required })
}
