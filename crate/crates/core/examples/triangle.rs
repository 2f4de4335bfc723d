//! Degenerate-subgraph builder for K_3: the median stopping time grows like
//! √n, so quadrupling n roughly doubles it.

use aplab::process::{run_process_trial, DistributionSpec};
use aplab::properties::{ContainsSubgraph, SmallGraph};
use aplab::strategies::SubgraphStrategy;

fn median_time(n: usize, trials: u64) -> f64 {
    let dist = DistributionSpec::semi_random(n).unwrap();
    let k3 = SmallGraph::complete(3);
    let prop = ContainsSubgraph::new(k3.clone(), "k3");
    let mut times: Vec<u64> = (0..trials)
        .map(|t| {
            let mut s = SubgraphStrategy::new(k3.clone(), n, "k3");
            run_process_trial(&dist, &mut s, &prop, 100 * n as u64, 5, t).unwrap().stopping_time.unwrap()
        })
        .collect();
    times.sort_unstable();
    let m = times.len() / 2;
    (times[m - 1] + times[m]) as f64 / 2.0
}

fn main() {
    let mut last = None;
    for n in [1000, 4000, 16_000] {
        let med = median_time(n, 200);
        match last {
            Some(prev) => println!("n={n:>6}: median T = {med:>6.1}  ratio {:.3}", med / prev),
            None => println!("n={n:>6}: median T = {med:>6.1}"),
        }
        last = Some(med);
    }
}
