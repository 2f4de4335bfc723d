//! Balanced coupling of a small martingale and the resulting tail bound.

use aplab::martingale::{
    couple_balanced, format_rational, is_balanced, rational, tail_bound_check, DiscreteMartingale, Factor,
    FiniteProductSpace,
};

fn main() {
    let point = Factor::new(vec![rational(1, 1)]).unwrap();
    let coin = Factor::new(vec![rational(1, 2), rational(1, 2)]).unwrap();
    let m = DiscreteMartingale::new(
        FiniteProductSpace::new(vec![point, coin]),
        vec![vec![rational(1, 2)], vec![rational(0, 1), rational(1, 1)]],
        vec![rational(2, 5)],
    )
    .unwrap();
    println!("balanced: {}", is_balanced(&m));

    let r = couple_balanced(&m).unwrap();
    for rec in &r.records {
        println!("level {} prefix {}: small {:?} large {:?} gamma {}", rec.level, rec.prefix, rec.small, rec.large, rec.gamma);
    }
    let coupled: Vec<String> = r.coupled.level(1).iter().map(format_rational).collect();
    println!("coupled M'_1 = {coupled:?}, balanced now: {}", is_balanced(&r.coupled));
    println!("initial values kept: {}, dominated on stable outcomes: {}", r.initial_values(&m), r.dominated(&m));

    let tail = tail_bound_check(&m, &rational(1, 2)).unwrap();
    println!(
        "Pr[M_1 <= M_0 - 1/2] = {} <= exp term {:.4} + Pr[unstable] {} : {}",
        tail.lhs, tail.exp_term, tail.pr_not_stable, tail.holds
    );
}
