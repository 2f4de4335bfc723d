//! JSON instance files for the exact checks. Rationals are `"p/q"` strings.
//!
//! ```json
//! {"kind": "process", "n": 3,
//!  "support": [{"edges": [[1, 2]], "p": "1/2"}, {"edges": [[2, 3]], "p": "1/2"}],
//!  "property": "contains:1-2", "strategy": "first-edge",
//!  "horizon": 1, "theta": "1/2"}
//!
//! {"kind": "martingale", "factors": [["1"], ["1/2", "1/2"]],
//!  "values": [["1/2"], ["0", "1"]], "c": ["2/5"], "t": "1/2"}
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    couple_balanced, exact_doob, find_potential, format_rational, is_balanced, m_theta, parse_rational,
    potential_boost_run, rational, tail_bound_check, verify_quantify_boost, BoostParams, DiscreteMartingale, Factor,
    FiniteProductSpace, MartingaleError, Rational, RationalDistribution,
};
use crate::graph::Edge;
use crate::process::StrategyFactory;
use crate::properties::{parse_property, Property};
use crate::strategies::{parse_strategy, FnFactory, ScheduleStrategy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    Process(ProcessInstance),
    Martingale(MartingaleInstance),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportEntry {
    pub edges: Vec<[u32; 2]>,
    pub p: String,
}

/// A strategy id, or a schedule of priority lists (step `t` uses list
/// `(t-1) mod len`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategySpec {
    Id(String),
    Schedule { schedule: Vec<Vec<[u32; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessInstance {
    pub n: usize,
    pub support: Vec<SupportEntry>,
    pub property: String,
    pub strategy: StrategySpec,
    pub horizon: usize,
    pub theta: String,
    /// Computed by expectimax when absent.
    #[serde(default)]
    pub m_star: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleInstance {
    pub factors: Vec<Vec<String>>,
    pub values: Vec<Vec<String>>,
    pub c: Vec<String>,
    pub t: String,
}

pub fn read_instance(path: &Path) -> Result<Instance, MartingaleError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MartingaleError::Invalid(format!("{}: {}", path.display(), e)))?;
    parse_instance(&text)
}

pub fn parse_instance(text: &str) -> Result<Instance, MartingaleError> {
    serde_json::from_str(text).map_err(|e| MartingaleError::Invalid(format!("line {}: {}", e.line(), e)))
}

fn edge(pair: [u32; 2]) -> Result<Edge, MartingaleError> {
    Edge::new(crate::graph::VertexId(pair[0]), crate::graph::VertexId(pair[1]))
        .map_err(|e| MartingaleError::Invalid(e.to_string()))
}

fn rationals(v: &[String]) -> Result<Vec<Rational>, MartingaleError> {
    v.iter().map(|s| parse_rational(s)).collect()
}

impl ProcessInstance {
    pub fn distribution(&self) -> Result<RationalDistribution, MartingaleError> {
        let entries = self
            .support
            .iter()
            .map(|s| Ok((s.edges.iter().map(|&p| edge(p)).collect::<Result<Vec<_>, _>>()?, parse_rational(&s.p)?)))
            .collect::<Result<Vec<_>, MartingaleError>>()?;
        RationalDistribution::new(self.n, entries)
    }

    pub fn strategy(&self) -> Result<Arc<dyn StrategyFactory>, MartingaleError> {
        match &self.strategy {
            StrategySpec::Id(id) => parse_strategy(id).map_err(|e| MartingaleError::Invalid(e.to_string())),
            StrategySpec::Schedule { schedule } => {
                if schedule.is_empty() {
                    return Err(MartingaleError::Invalid("empty schedule".into()));
                }
                let lists = schedule
                    .iter()
                    .map(|l| l.iter().map(|&p| edge(p)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Arc::new(FnFactory::new("schedule", move |_| Box::new(ScheduleStrategy::new(lists.clone())))))
            }
        }
    }

    pub fn property(&self) -> Result<Box<dyn Property>, MartingaleError> {
        parse_property(&self.property).map_err(|e| MartingaleError::Invalid(e.to_string()))
    }
}

impl MartingaleInstance {
    pub fn martingale(&self) -> Result<DiscreteMartingale, MartingaleError> {
        let factors =
            self.factors.iter().map(|f| Factor::new(rationals(f)?)).collect::<Result<Vec<_>, MartingaleError>>()?;
        let values = self.values.iter().map(|v| rationals(v)).collect::<Result<Vec<_>, _>>()?;
        DiscreteMartingale::new(FiniteProductSpace::new(factors), values, rationals(&self.c)?)
    }
}

/// Runs every exact check that applies and returns `(report, all_pass)`.
pub fn verify_instance(instance: &Instance) -> Result<(Value, bool), MartingaleError> {
    match instance {
        Instance::Process(p) => verify_process(p),
        Instance::Martingale(m) => verify_martingale(m),
    }
}

fn verify_process(inst: &ProcessInstance) -> Result<(Value, bool), MartingaleError> {
    let dist = inst.distribution()?;
    let strategy = inst.strategy()?;
    let property = inst.property()?;
    let theta = parse_rational(&inst.theta)?;
    let doob = exact_doob(&dist, strategy.as_ref(), property.as_ref(), inst.horizon)?;
    let tower = doob.check_tower();
    let (m_star, m_star_source) = match inst.m_star {
        Some(m) => (m, "supplied"),
        None => {
            let cap = 64 * inst.horizon as u64 + 64;
            let m = m_theta(&dist, property.as_ref(), &rational(1, 2), cap)?
                .ok_or_else(|| MartingaleError::Invalid(format!("m* exceeds {}", cap)))?;
            (m.max(1), "expectimax")
        }
    };
    let params = BoostParams::new(theta, doob.mu().clone(), m_star)?;
    let potential = find_potential(&doob, &params);
    let martingale = DiscreteMartingale::from_doob(&doob, vec![params.c_squared.clone(); inst.horizon])?;
    let total = doob.space().level_size(inst.horizon);
    let identity = (0..total).all(|x| martingale.is_stable(x) == potential.is_stable(x));
    let boost = potential_boost_run(&dist, strategy.as_ref(), property.as_ref(), &doob, &params)?;
    let quantify = match verify_quantify_boost(&doob, &params) {
        Ok(q) => serde_json::to_value(&q).expect("serializable"),
        Err(MartingaleError::Precondition(msg)) => json!({ "skipped": msg }),
        Err(e) => return Err(e),
    };
    let quantify_ok = quantify.get("holds").map(|h| h == &Value::Bool(true)).unwrap_or(true);
    let pass = tower && identity && boost.all_hold() && quantify_ok;
    let report = json!({
        "kind": "process",
        "mu": format_rational(doob.mu()),
        "tower": tower,
        "m_star": m_star,
        "m_star_source": m_star_source,
        "c_theta": format_rational(&params.c_theta),
        "c_theta_exact": params.c_theta_exact,
        "c_squared": format_rational(&params.c_squared),
        "stable_mass": format_rational(&potential.stable_mass),
        "pr_tau_le_n": format_rational(&potential.pr_tau_le_n),
        "stable_iff_no_stop": identity,
        "boost": boost,
        "quantify": quantify,
        "pass": pass,
    });
    Ok((report, pass))
}

fn verify_martingale(inst: &MartingaleInstance) -> Result<(Value, bool), MartingaleError> {
    let m = inst.martingale()?;
    let t = parse_rational(&inst.t)?;
    let coupling = couple_balanced(&m)?;
    let q1 = coupling.initial_values(&m);
    let q2 = is_balanced(&coupling.coupled);
    let q3 = coupling.dominated(&m);
    let tail = tail_bound_check(&m, &t)?;
    let pass = q1 && q2 && q3 && tail.holds;
    let coupled: Vec<Vec<String>> =
        (0..=m.k()).map(|j| coupling.coupled.level(j).iter().map(format_rational).collect()).collect();
    let report = json!({
        "kind": "martingale",
        "balanced": is_balanced(&m),
        "records": coupling.records,
        "coupled": coupled,
        "initial_values": q1,
        "coupled_balanced": q2,
        "dominated_on_stable": q3,
        "tail": tail,
        "pass": pass,
    });
    Ok((report, pass))
}
