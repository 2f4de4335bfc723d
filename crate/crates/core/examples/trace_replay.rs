//! Replays one small run and prints its trace: step, square, and the edge
//! chosen. Reruns with the same seed print the same lines.

use aplab::process::{run_process, DistributionSpec};
use aplab::properties::Hamiltonian;
use aplab::strategies::HamiltonStrategy;

fn main() {
    let n = 8;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2024);
    let trace = run_process(&dist, &mut HamiltonStrategy::new(n), &Hamiltonian, 200, seed).unwrap();
    print!("{}", trace.to_text());
    println!("stopping time: {:?}", trace.stopping_time);
    let mut edges = Vec::new();
    trace.graph.write_edge_list(&mut edges).unwrap();
    print!("{}", String::from_utf8(edges).unwrap());
}
