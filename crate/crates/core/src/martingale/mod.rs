//! Exact verification of the boosting and coupling arguments on tiny
//! instances. All probabilities and martingale values are `BigRational`.

mod coupling;
mod doob;
pub mod instance;
mod potential;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use coupling::{
    couple_balanced, is_balanced, tail_bound_check, CouplingResult, DiscreteMartingale, LevelRecord, TailReport,
    MAX_OUTCOMES,
};
pub use doob::{exact_doob, optimal_win_probability, m_theta, DoobTable, RationalDistribution, MAX_SEQUENCES};
pub use potential::{
    boost_schedule, find_potential, potential_boost_run, verify_quantify_boost, BoostParams, BoostReport,
    PotentialBoostStrategy, PotentialReport, QuantifyReport, ScheduleReport,
};

use crate::process::ProcessError;

pub type Rational = BigRational;

#[derive(Debug, Error)]
pub enum MartingaleError {
    #[error("sample space has {size} sequences (limit {limit})")]
    SpaceTooLarge { size: u128, limit: u128 },
    #[error("strategy `{0}` is randomized; exact enumeration needs a deterministic strategy")]
    Randomized(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("not a martingale at level {level}, prefix {prefix}")]
    NotMartingale { level: usize, prefix: usize },
    #[error("empty interval for gamma at level {level}, prefix {prefix}")]
    EmptyInterval { level: usize, prefix: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

/// Parses `"p/q"` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, MartingaleError> {
    let bad = || MartingaleError::Invalid(format!("`{}` is not a rational of the form p/q", s));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// `"p/q"` (or `"p"` for integers), the inverse of [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact `x > y` where `y >= 0` is only known through `y²`.
pub(crate) fn exceeds_sqrt(x: &Rational, y_squared: &Rational) -> bool {
    x.is_positive() && x * x > *y_squared
}

/// Exact `x >= y` where `y >= 0` is only known through `y²`.
pub(crate) fn at_least_sqrt(x: &Rational, y_squared: &Rational) -> bool {
    !x.is_negative() && x * x >= *y_squared
}

/// One independent coordinate of a product space.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub probs: Vec<Rational>,
}

impl Factor {
    pub fn new(probs: Vec<Rational>) -> Result<Self, MartingaleError> {
        if probs.is_empty() {
            return Err(MartingaleError::Invalid("factor with empty support".into()));
        }
        if probs.iter().any(|p| !p.is_positive()) {
            return Err(MartingaleError::Invalid("factor probabilities must be positive".into()));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(MartingaleError::Invalid(format!("factor probabilities sum to {}", format_rational(&total))));
        }
        Ok(Factor { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// `S_0 × … × S_k` with independent factors. Prefixes of length `j` are
/// indexed in mixed radix with the first factor most significant, so the
/// children of prefix `i` at the next level are `i·|S_j| + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProductSpace {
    factors: Vec<Factor>,
}

impl FiniteProductSpace {
    pub fn new(factors: Vec<Factor>) -> Self {
        FiniteProductSpace { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn depth(&self) -> usize {
        self.factors.len()
    }

    /// Number of prefixes of length `j` (1 for the empty prefix).
    pub fn level_size(&self, j: usize) -> usize {
        self.factors[..j].iter().map(|f| f.len()).product()
    }

    pub fn checked_size(&self) -> u128 {
        self.factors.iter().fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128))
    }

    #[inline]
    pub fn child(&self, j: usize, prefix: usize, s: usize) -> usize {
        prefix * self.factors[j].len() + s
    }

    #[inline]
    pub fn parent(&self, j: usize, prefix: usize) -> (usize, usize) {
        let w = self.factors[j - 1].len();
        (prefix / w, prefix % w)
    }

    /// Coordinates of prefix `index` of length `j`.
    pub fn decode(&self, j: usize, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; j];
        for i in (0..j).rev() {
            let w = self.factors[i].len();
            out[i] = index % w;
            index /= w;
        }
        out
    }

    pub fn encode(&self, coords: &[usize]) -> usize {
        coords.iter().enumerate().fold(0, |acc, (i, &s)| acc * self.factors[i].len() + s)
    }

    /// Probability of every prefix at every level; `table[j][i]`.
    pub fn prefix_probabilities(&self) -> Vec<Vec<Rational>> {
        let mut table = vec![vec![Rational::one()]];
        for j in 0..self.depth() {
            let prev = &table[j];
            let f = &self.factors[j];
            let mut next = Vec::with_capacity(prev.len() * f.len());
            for p in prev {
                for q in &f.probs {
                    next.push(p * q);
                }
            }
            table.push(next);
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        let r = parse_rational("6/8").unwrap();
        assert_eq!(format_rational(&r), "3/4");
        assert_eq!(format_rational(&parse_rational("-2").unwrap()), "-2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn mixed_radix_indexing() {
        let space = FiniteProductSpace::new(vec![
            Factor::new(vec![rational(1, 2), rational(1, 2)]).unwrap(),
            Factor::new(vec![rational(1, 3), rational(1, 3), rational(1, 3)]).unwrap(),
        ]);
        assert_eq!(space.level_size(2), 6);
        assert_eq!(space.encode(&[1, 2]), 5);
        assert_eq!(space.decode(2, 5), vec![1, 2]);
        assert_eq!(space.child(1, 1, 2), 5);
        assert_eq!(space.parent(2, 5), (1, 2));
        let probs = space.prefix_probabilities();
        assert_eq!(probs[2].iter().sum::<Rational>(), Rational::one());
    }

    #[test]
    fn squared_comparisons() {
        assert!(exceeds_sqrt(&rational(1, 2), &rational(1, 64)));
        assert!(!exceeds_sqrt(&rational(-1, 2), &rational(1, 64)));
        assert!(!exceeds_sqrt(&rational(1, 8), &rational(1, 64)));
        assert!(at_least_sqrt(&rational(1, 8), &rational(1, 64)));
    }
}
