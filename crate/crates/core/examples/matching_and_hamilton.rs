//! Builds a perfect matching and a Hamiltonian cycle, printing the stopping
//! times and, for the two-stage strategies, where the clean-up started.

use aplab::process::{run_trial, DistributionSpec};
use aplab::properties::{approx_target, parse_property};
use aplab::strategies::parse_strategy;

fn main() {
    let n = 10_000;
    let dist = DistributionSpec::semi_random(n).unwrap();
    println!("n = {n}, approximate target = {} vertices", approx_target(n));
    for (strategy, property) in [
        ("matching", "perfect-matching"),
        ("hamilton", "hamiltonian"),
        ("approx-cleanup:matching", "perfect-matching"),
        ("approx-cleanup:hamilton", "hamiltonian"),
    ] {
        let f = parse_strategy(strategy).unwrap();
        let p = parse_property(property).unwrap();
        let r = run_trial(&dist, f.as_ref(), p.as_ref(), 10 * n as u64, 42, 0).unwrap();
        let t = r.stopping_time.expect("finishes well within 10n");
        match r.milestone {
            Some(m) => println!("{strategy:<24} T/n = {:.4}  (switched at {m})", t as f64 / n as f64),
            None => println!("{strategy:<24} T/n = {:.4}", t as f64 / n as f64),
        }
    }
}
