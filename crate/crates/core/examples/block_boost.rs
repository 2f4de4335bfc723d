//! Multi-round boosting: k independent blocks of m steps each lift the
//! success probability of a weak block.

use aplab::process::{run_trial, DistributionSpec};
use aplab::properties::MinDegree;
use aplab::strategies::{blocks_for_confidence, parse_strategy};

fn main() {
    let n = 1000;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let prop = MinDegree::new(1);
    let trials = 400;
    // At n = 1000 a single block of 0.69n steps fails more often than not.
    let m = (0.69 * n as f64) as u64;
    for k in [1, 2, 4] {
        let f = parse_strategy(&format!("boost:min-degree:1:{m}:{k}")).unwrap();
        let wins = (0..trials)
            .filter(|&t| run_trial(&dist, f.as_ref(), &prop, k * m, 4, t).unwrap().stopping_time.is_some())
            .count();
        println!("k = {k}: success {:.3}", wins as f64 / trials as f64);
    }
    println!("blocks needed for 0.75: {}, for 0.99: {}", blocks_for_confidence(0.75), blocks_for_confidence(0.99));
}
