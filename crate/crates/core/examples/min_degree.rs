//! Greedy min-degree on the semi-random process: mean T/n for k = 1, 2, 3
//! against the known constants h_k.

use aplab::process::DistributionSpec;
use aplab::properties::MinDegree;
use aplab::strategies::parse_strategy;
use aplab::sweep::{run_sweep, stopping_times, SweepSpec};
use aplab::threshold::estimate_i_n_from_times;

fn main() {
    let n = 20_000;
    let dist = DistributionSpec::semi_random(n).unwrap();
    for (k, h) in [(1, 0.6931), (2, 1.2197), (3, 1.7316)] {
        let strategy = parse_strategy(&format!("min-degree:{k}")).unwrap();
        let property = MinDegree::new(k);
        let spec = SweepSpec {
            dist: &dist,
            strategy: strategy.as_ref(),
            property: &property,
            max_steps: 10 * n as u64,
            seed: 1,
            trials: 50,
        };
        let times = stopping_times(&run_sweep(&spec, 4).unwrap());
        let est = estimate_i_n_from_times(&times, n).unwrap();
        println!("k={k}: T/n = {:.4} ± {:.4}  (h_{k} ≈ {h})", est.ratio(), est.ratio_err());
    }
}
