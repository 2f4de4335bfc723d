//! Player algorithms and the strategy-id parser.

mod boost;
mod greedy;
mod hamilton;
mod matching;
pub mod state;
mod subgraph;

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::process::{Strategy, StrategyFactory};
use crate::properties::{PropertyError, SmallGraph};

pub use boost::{blocks_for_confidence, cleanup_matching, multi_round_boost, ApproxThenCleanup, CleanupKind, MultiRoundBoost};
pub use greedy::{FirstEdge, MinDegreeStrategy, RandomEdge, ScheduleStrategy};
pub use hamilton::HamiltonStrategy;
pub use matching::MatchingStrategy;
pub use state::{MatchingState, PathSystemState};
pub use subgraph::{SubgraphBuildState, SubgraphStrategy};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("unknown strategy id `{0}`")]
    UnknownId(String),
    #[error(transparent)]
    Pattern(#[from] PropertyError),
}

type Builder = dyn Fn(usize) -> Box<dyn Strategy> + Send + Sync;

/// A factory from an id and a constructor closure.
#[derive(Clone)]
pub struct FnFactory {
    id: String,
    deterministic: bool,
    build: Arc<Builder>,
}

impl FnFactory {
    pub fn new(id: impl Into<String>, build: impl Fn(usize) -> Box<dyn Strategy> + Send + Sync + 'static) -> Self {
        FnFactory { id: id.into(), deterministic: true, build: Arc::new(build) }
    }

    pub fn randomized(mut self) -> Self {
        self.deterministic = false;
        self
    }
}

impl StrategyFactory for FnFactory {
    fn id(&self) -> String {
        self.id.clone()
    }
    fn build(&self, n: usize) -> Box<dyn Strategy> {
        (self.build)(n)
    }
    fn is_deterministic(&self) -> bool {
        self.deterministic
    }
}

/// Parses a CLI strategy id: `min-degree:k`, `matching`, `hamilton`,
/// `subgraph:<file>`, `boost:<inner>:<m>:<k>`,
/// `approx-cleanup:<matching|hamilton>`, `first-edge` or `random-edge`.
pub fn parse_strategy(id: &str) -> Result<Arc<dyn StrategyFactory>, StrategyError> {
    let unknown = || StrategyError::UnknownId(id.to_string());
    let owned = id.to_string();
    if let Some(rest) = id.strip_prefix("boost:") {
        let mut parts = rest.rsplitn(3, ':');
        let k: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(unknown)?;
        let m: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(unknown)?;
        let inner_id = parts.next().ok_or_else(unknown)?;
        if m == 0 || k == 0 {
            return Err(unknown());
        }
        let inner = parse_strategy(inner_id)?;
        let det = inner.is_deterministic();
        let f = FnFactory::new(owned, move |n| Box::new(multi_round_boost(inner.clone(), m, k, n)));
        return Ok(Arc::new(if det { f } else { f.randomized() }));
    }
    let (head, arg) = match id.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (id, None),
    };
    let f = match (head, arg) {
        ("min-degree", Some(k)) => {
            let k: u32 = k.parse().map_err(|_| unknown())?;
            if k == 0 {
                return Err(unknown());
            }
            FnFactory::new(owned, move |_| Box::new(MinDegreeStrategy::new(k)))
        }
        ("matching", None) => FnFactory::new(owned, |n| Box::new(MatchingStrategy::new(n))),
        ("hamilton", None) => FnFactory::new(owned, |n| Box::new(HamiltonStrategy::new(n))),
        ("subgraph", Some(path)) => {
            let h = SmallGraph::from_file(Path::new(path))?;
            let label = path.to_string();
            FnFactory::new(owned, move |n| Box::new(SubgraphStrategy::new(h.clone(), n, label.clone())))
        }
        ("approx-cleanup", Some("matching")) => {
            FnFactory::new(owned, |n| Box::new(ApproxThenCleanup::new(CleanupKind::Matching, n)))
        }
        ("approx-cleanup", Some("hamilton")) => {
            FnFactory::new(owned, |n| Box::new(ApproxThenCleanup::new(CleanupKind::Hamilton, n)))
        }
        ("first-edge", None) => FnFactory::new(owned, |_| Box::new(FirstEdge)),
        ("random-edge", None) => FnFactory::new(owned, |_| Box::new(RandomEdge)).randomized(),
        _ => return Err(unknown()),
    };
    Ok(Arc::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ids() {
        assert_eq!(parse_strategy("min-degree:3").unwrap().id(), "min-degree:3");
        let b = parse_strategy("boost:min-degree:1:750:4").unwrap();
        assert_eq!(b.id(), "boost:min-degree:1:750:4");
        assert_eq!(b.build(10).name(), "boost:min-degree:1:750:4");
        assert!(parse_strategy("boost:matching:0:2").is_err());
        assert!(parse_strategy("approx-cleanup:tree").is_err());
        assert!(!parse_strategy("random-edge").unwrap().is_deterministic());
        assert!(parse_strategy("nope").is_err());
    }
}
