//! Success curves and threshold widths for min-degree:1. The 10%-90% window
//! shrinks relative to n as n grows.

use aplab::properties::MinDegree;
use aplab::strategies::parse_strategy;
use aplab::sweep::{estimate_m_theta, sharpness_width, success_curve};

fn main() {
    let f = parse_strategy("min-degree:1").unwrap();
    let prop = MinDegree::new(1);

    let n = 2000;
    let grid: Vec<u64> = (0..=12).map(|i| (n as u64 * 64) / 100 + i * n as u64 / 100).collect();
    let curve = success_curve(f.as_ref(), &prop, n, &grid, 500, 1, 4).unwrap();
    println!("n = {n}");
    for p in &curve.grid {
        println!("  t/n = {:.2}  p = {:.3}  [{:.3}, {:.3}]", p.t as f64 / n as f64, p.p_hat, p.lo, p.hi);
    }
    let half = estimate_m_theta(f.as_ref(), &prop, n, 0.5, 500, 1, 10 * n as u64, 4).unwrap();
    println!("  m(1/2) = {} (CI {}..{:?})", half.t_hat, half.ci_lo, half.ci_hi);

    for n in [1000, 4000, 16_000] {
        let (w, rel) = sharpness_width(f.as_ref(), &prop, n, 0.1, 0.9, 1000, 2, 10 * n as u64, 4).unwrap();
        println!("n = {n:>6}: m(0.9) - m(0.1) = {w:>5}  ({rel:.4} n)");
    }
}
