use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{exceeds_sqrt, format_rational, to_f64, DoobTable, Factor, FiniteProductSpace, MartingaleError, Rational};

/// A martingale `M_0..M_k` on a product space `S_0 × … × S_k` with
/// independent coordinates, given by its value on every prefix, together
/// with the increment bounds `c_1..c_k`. The bounds are stored squared so
/// irrational `c_j` (as in the boosting argument) stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMartingale {
    space: FiniteProductSpace,
    /// `values[j][prefix]`: `m_j` on prefixes of length `j + 1`.
    values: Vec<Vec<Rational>>,
    c_squared: Vec<Rational>,
}

impl DiscreteMartingale {
    pub fn new(space: FiniteProductSpace, values: Vec<Vec<Rational>>, c: Vec<Rational>) -> Result<Self, MartingaleError> {
        if c.iter().any(|x| x.is_negative()) {
            return Err(MartingaleError::Invalid("c_j must be non-negative".into()));
        }
        let c_squared = c.iter().map(|x| x * x).collect();
        Self::with_c_squared(space, values, c_squared)
    }

    pub fn with_c_squared(
        space: FiniteProductSpace,
        values: Vec<Vec<Rational>>,
        c_squared: Vec<Rational>,
    ) -> Result<Self, MartingaleError> {
        let depth = space.depth();
        if depth == 0 {
            return Err(MartingaleError::Invalid("need at least the factor S_0".into()));
        }
        if values.len() != depth {
            return Err(MartingaleError::Invalid(format!("expected {} levels of values, got {}", depth, values.len())));
        }
        for (j, v) in values.iter().enumerate() {
            if v.len() != space.level_size(j + 1) {
                return Err(MartingaleError::Invalid(format!("level {} has {} values", j, v.len())));
            }
        }
        if c_squared.len() != depth - 1 {
            return Err(MartingaleError::Invalid(format!("expected {} increment bounds", depth - 1)));
        }
        if c_squared.iter().any(|x| x.is_negative()) {
            return Err(MartingaleError::Invalid("c_j² must be non-negative".into()));
        }
        let m = DiscreteMartingale { space, values, c_squared };
        for j in 1..depth {
            for prefix in 0..m.space.level_size(j) {
                if m.conditional_mean(j, prefix) != m.values[j - 1][prefix] {
                    return Err(MartingaleError::NotMartingale { level: j - 1, prefix });
                }
            }
        }
        Ok(m)
    }

    /// The Doob martingale of a win indicator with `S_0` a single point.
    pub fn from_doob(doob: &DoobTable, c_squared: Vec<Rational>) -> Result<Self, MartingaleError> {
        let mut factors = vec![Factor::new(vec![Rational::from_integer(1.into())])?];
        factors.extend(doob.space().factors().iter().cloned());
        let values = (0..=doob.horizon()).map(|j| doob.level(j).to_vec()).collect();
        Self::with_c_squared(FiniteProductSpace::new(factors), values, c_squared)
    }

    pub fn space(&self) -> &FiniteProductSpace {
        &self.space
    }

    /// `k`, the index of the last martingale term.
    pub fn k(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, j: usize, prefix: usize) -> &Rational {
        &self.values[j][prefix]
    }

    pub fn level(&self, j: usize) -> &[Rational] {
        &self.values[j]
    }

    pub fn c_squared(&self) -> &[Rational] {
        &self.c_squared
    }

    /// `E[M_j | prefix]` for a prefix of length `j`.
    fn conditional_mean(&self, j: usize, prefix: usize) -> Rational {
        let f = &self.space.factors()[j];
        f.probs.iter().enumerate().map(|(s, p)| p * &self.values[j][self.space.child(j, prefix, s)]).sum()
    }

    /// Largest `m_j` among the siblings of `prefix` (length `j + 1`).
    fn sibling_max(&self, j: usize, prefix: usize) -> &Rational {
        let (parent, _) = self.space.parent(j + 1, prefix);
        let w = self.space.factors()[j].len();
        (0..w).map(|s| &self.values[j][self.space.child(j, parent, s)]).max().expect("non-empty factor")
    }

    /// Is the full outcome `x` in `Γ_M`?
    pub fn is_stable(&self, x: usize) -> bool {
        let k = self.k();
        let mut prefix = x;
        for j in (1..=k).rev() {
            let gap = self.sibling_max(j, prefix) - &self.values[j][prefix];
            if exceeds_sqrt(&gap, &self.c_squared[j - 1]) {
                return false;
            }
            prefix = self.space.parent(j + 1, prefix).0;
        }
        true
    }

    /// `Pr[X ∉ Γ_M]`.
    pub fn unstable_mass(&self) -> Rational {
        let probs = self.space.prefix_probabilities();
        let depth = self.space.depth();
        (0..self.space.level_size(depth)).filter(|&x| !self.is_stable(x)).map(|x| probs[depth][x].clone()).sum()
    }
}

/// `m_j(s_0..s'_j) - m_j(s_0..s_j) <= c_j` for every prefix and `s'_j`.
pub fn is_balanced(m: &DiscreteMartingale) -> bool {
    (1..=m.k()).all(|j| {
        let w = m.space.factors()[j].len();
        (0..m.space.level_size(j)).all(|parent| {
            let kids = (0..w).map(|s| &m.values[j][m.space.child(j, parent, s)]);
            let (lo, hi) = kids.fold((None::<&Rational>, None::<&Rational>), |(lo, hi), v| {
                (Some(lo.map_or(v, |l| l.min(v))), Some(hi.map_or(v, |h| h.max(v))))
            });
            let gap = hi.expect("non-empty") - lo.expect("non-empty");
            !exceeds_sqrt(&gap, &m.c_squared[j - 1])
        })
    })
}

/// One application of the small/large split.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub prefix: usize,
    /// Indices into `S_j` of the small and large children.
    pub small: Vec<usize>,
    pub large: Vec<usize>,
    pub gamma: String,
    pub gamma_a: String,
    pub gamma_b: String,
}

#[derive(Debug, Clone)]
pub struct CouplingResult {
    pub coupled: DiscreteMartingale,
    pub records: Vec<LevelRecord>,
}

impl CouplingResult {
    /// `M'_0 = M_0` pointwise on `S_0`.
    pub fn initial_values(&self, original: &DiscreteMartingale) -> bool {
        self.coupled.values[0] == original.values[0]
    }

    /// `M'_j <= M_j` for every `j` on every stable outcome of `original`.
    pub fn dominated(&self, original: &DiscreteMartingale) -> bool {
        let k = original.k();
        let depth = original.space.depth();
        (0..original.space.level_size(depth)).filter(|&x| original.is_stable(x)).all(|x| {
            let mut prefix = x;
            for j in (1..=k).rev() {
                if self.coupled.values[j][prefix] > original.values[j][prefix] {
                    return false;
                }
                prefix = original.space.parent(j + 1, prefix).0;
            }
            true
        })
    }
}

/// Builds the balanced martingale `M'` by the level-by-level split: at each
/// prefix the small children are merged to their conditional mean plus
/// `γ/Pr[A]`, the large ones are lowered by `γ/Pr[B]` together with their
/// whole subtree, and the construction recurses into each child. `γ` is the
/// least non-negative value that puts the merged value inside the shifted
/// range of the large children.
pub fn couple_balanced(m: &DiscreteMartingale) -> Result<CouplingResult, MartingaleError> {
    check_size(m)?;
    let space = &m.space;
    let k = m.k();
    let mut y = m.values.clone();
    let mut records = Vec::new();
    for j in 1..=k {
        let f = &space.factors()[j];
        let w = f.len();
        for parent in 0..space.level_size(j) {
            let kids: Vec<usize> = (0..w).map(|s| space.child(j, parent, s)).collect();
            let top = kids.iter().map(|&c| &y[j][c]).max().expect("non-empty").clone();
            let small: Vec<bool> =
                kids.iter().map(|&c| exceeds_sqrt(&(&top - &y[j][c]), &m.c_squared[j - 1])).collect();
            if !small.iter().any(|&a| a) {
                continue;
            }
            let (mut pa, mut pb, mut sum_a) = (Rational::zero(), Rational::zero(), Rational::zero());
            let (mut min_b, mut max_b): (Option<Rational>, Option<Rational>) = (None, None);
            for (s, &c) in kids.iter().enumerate() {
                if small[s] {
                    pa += &f.probs[s];
                    sum_a += &f.probs[s] * &y[j][c];
                } else {
                    pb += &f.probs[s];
                    let v = &y[j][c];
                    min_b = Some(min_b.map_or(v.clone(), |x| x.min(v.clone())));
                    max_b = Some(max_b.map_or(v.clone(), |x| x.max(v.clone())));
                }
            }
            let (min_b, max_b) = (min_b.expect("B non-empty"), max_b.expect("B non-empty"));
            let a_bar = &sum_a / &pa;
            let gamma = if a_bar >= min_b {
                Rational::zero()
            } else {
                (&min_b - &a_bar) / (pa.recip() + pb.recip())
            };
            let gamma_a = &gamma / &pa;
            let gamma_b = &gamma / &pb;
            let merged = &a_bar + &gamma_a;
            if merged < &min_b - &gamma_b || merged > &max_b - &gamma_b {
                return Err(MartingaleError::EmptyInterval { level: j, prefix: parent });
            }
            for (s, &c) in kids.iter().enumerate() {
                if small[s] {
                    set_subtree(space, &mut y, j, c, &merged);
                } else if !gamma_b.is_zero() {
                    shift_subtree(space, &mut y, j, c, &gamma_b);
                }
            }
            records.push(LevelRecord {
                level: j,
                prefix: parent,
                small: (0..w).filter(|&s| small[s]).collect(),
                large: (0..w).filter(|&s| !small[s]).collect(),
                gamma: format_rational(&gamma),
                gamma_a: format_rational(&gamma_a),
                gamma_b: format_rational(&gamma_b),
            });
        }
    }
    let coupled = DiscreteMartingale::with_c_squared(space.clone(), y, m.c_squared.clone())?;
    Ok(CouplingResult { coupled, records })
}

/// Upper limit on `|S|` for coupling and tail checks.
pub const MAX_OUTCOMES: u128 = 100_000;

fn check_size(m: &DiscreteMartingale) -> Result<(), MartingaleError> {
    let size = m.space.checked_size();
    if size > MAX_OUTCOMES {
        return Err(MartingaleError::SpaceTooLarge { size, limit: MAX_OUTCOMES });
    }
    Ok(())
}

/// Descendant index range of `prefix` (length `j + 1`) at level `d >= j`.
fn subtree_range(space: &FiniteProductSpace, j: usize, prefix: usize, d: usize) -> std::ops::Range<usize> {
    let width: usize = space.factors()[j + 1..=d].iter().map(|f| f.len()).product();
    prefix * width..(prefix + 1) * width
}

fn set_subtree(space: &FiniteProductSpace, y: &mut [Vec<Rational>], j: usize, prefix: usize, v: &Rational) {
    for d in j..y.len() {
        for i in subtree_range(space, j, prefix, d) {
            y[d][i] = v.clone();
        }
    }
}

fn shift_subtree(space: &FiniteProductSpace, y: &mut [Vec<Rational>], j: usize, prefix: usize, by: &Rational) {
    for d in j..y.len() {
        for i in subtree_range(space, j, prefix, d) {
            y[d][i] -= by;
        }
    }
}

/// Both sides of `Pr[M_k <= M_0 - t] <= exp(-2t²/Σc_j²) + Pr[X ∉ Γ_M]`.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub t: String,
    pub lhs: String,
    pub pr_not_stable: String,
    pub exp_term: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Absolute tolerance on the floating-point exponential term.
const EXP_TOL: f64 = 1e-12;

pub fn tail_bound_check(m: &DiscreteMartingale, t: &Rational) -> Result<TailReport, MartingaleError> {
    if t.is_negative() {
        return Err(MartingaleError::Invalid("t must be non-negative".into()));
    }
    check_size(m)?;
    let space = &m.space;
    let depth = space.depth();
    let k = m.k();
    let probs = space.prefix_probabilities();
    let mut lhs = Rational::zero();
    for x in 0..space.level_size(depth) {
        let root = subtree_root(space, x);
        if m.values[k][x] <= &m.values[0][root] - t {
            lhs += &probs[depth][x];
        }
    }
    let pr_not_stable = m.unstable_mass();
    let sum_c2: Rational = m.c_squared.iter().sum();
    let exp_term = if t.is_zero() {
        1.0
    } else if sum_c2.is_zero() {
        0.0
    } else {
        (-2.0 * to_f64(&(t * t / &sum_c2))).exp()
    };
    let excess = to_f64(&(&lhs - &pr_not_stable));
    let slack = exp_term - excess;
    Ok(TailReport {
        t: format_rational(t),
        lhs: format_rational(&lhs),
        pr_not_stable: format_rational(&pr_not_stable),
        exp_term,
        slack,
        holds: excess <= exp_term + EXP_TOL,
    })
}

fn subtree_root(space: &FiniteProductSpace, x: usize) -> usize {
    let width: usize = space.factors()[1..].iter().map(|f| f.len()).product();
    x / width
}

#[cfg(test)]
mod tests {
    use super::super::rational;
    use super::*;

    fn coin() -> Factor {
        Factor::new(vec![rational(1, 2), rational(1, 2)]).unwrap()
    }

    fn point() -> Factor {
        Factor::new(vec![rational(1, 1)]).unwrap()
    }

    #[test]
    fn rejects_non_martingale() {
        let space = FiniteProductSpace::new(vec![point(), coin()]);
        let r = DiscreteMartingale::new(space, vec![vec![rational(1, 2)], vec![rational(0, 1), rational(1, 2)]], vec![
            rational(1, 1),
        ]);
        assert!(matches!(r, Err(MartingaleError::NotMartingale { .. })));
    }

    #[test]
    fn one_step_split() {
        // M_1 ∈ {0, 1} with c = 2/5: the 0 branch is small.
        let space = FiniteProductSpace::new(vec![point(), coin()]);
        let m = DiscreteMartingale::new(space, vec![vec![rational(1, 2)], vec![rational(0, 1), rational(1, 1)]], vec![
            rational(2, 5),
        ])
        .unwrap();
        assert!(!is_balanced(&m));
        let r = couple_balanced(&m).unwrap();
        // γ = (1 - 0)/(2 + 2) = 1/4, so both children become 1/2.
        assert_eq!(r.records[0].gamma, "1/4");
        assert_eq!(r.records[0].small, vec![0]);
        assert_eq!(r.records[0].gamma_a, "1/2");
        assert_eq!(r.coupled.level(1), &[rational(1, 2), rational(1, 2)]);
        assert!(is_balanced(&r.coupled));
        assert!(r.initial_values(&m));
        assert!(r.dominated(&m));
        let tail = tail_bound_check(&m, &rational(1, 2)).unwrap();
        assert_eq!(tail.lhs, "1/2");
        assert_eq!(tail.pr_not_stable, "1/2");
        assert!(tail.holds);
    }
}
