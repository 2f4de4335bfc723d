//! A parallel sweep written as trial CSV; the bytes do not depend on the
//! number of workers.

use aplab::process::DistributionSpec;
use aplab::properties::PerfectMatching;
use aplab::strategies::parse_strategy;
use aplab::sweep::{run_sweep, SweepSpec};
use aplab::threshold::{write_trial_csv, TrialRow};

fn csv(workers: usize) -> Vec<u8> {
    let n = 2000;
    let dist = DistributionSpec::semi_random(n).unwrap();
    let strategy = parse_strategy("matching").unwrap();
    let spec = SweepSpec { dist: &dist, strategy: strategy.as_ref(), property: &PerfectMatching, max_steps: 3 * n as u64, seed: 9, trials: 20 };
    let rows: Vec<TrialRow> = run_sweep(&spec, workers)
        .unwrap()
        .into_iter()
        .map(|r| TrialRow {
            property: "perfect-matching".into(),
            strategy: "matching".into(),
            n,
            seed_base: 9,
            trial: r.trial,
            stopping_time: r.stopping_time,
        })
        .collect();
    let mut out = Vec::new();
    write_trial_csv(&mut out, &["example sweep".to_string()], &rows).unwrap();
    out
}

fn main() {
    let one = csv(1);
    let many = csv(4);
    print!("{}", String::from_utf8_lossy(&one));
    println!("identical with 1 and 4 workers: {}", one == many);
}
