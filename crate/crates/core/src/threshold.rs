//! Threshold estimation from pools of per-trial stopping times.
//!
//! Every estimator here works on one pool of stopping times: `p̂(t)` is the
//! fraction of trials with `T <= t`, so thresholds for different `theta` are
//! quantiles of a single empirical distribution and are monotone in `theta`.
//! Censored trials (`None`) count as `T = ∞`. Estimates describe the given
//! strategy and are upper bounds on the strategy-optimal quantities.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error("success probability never reaches {theta} within the horizon ({reached} of {trials} trials finished)")]
    NotReached { theta: f64, reached: usize, trials: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error("{censored} of {trials} trials censored (more than 10%)")]
    TooMuchCensoring { censored: usize, trials: usize },
    #[error("no estimate for n = {0}")]
    MissingEstimate(usize),
}

/// Normal quantile for 95% two-sided intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At p̂ = 0 or 1 one root is exactly 0 or 1; avoid rounding past it.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub n: usize,
    pub strategy: String,
    pub property: String,
    pub grid: Vec<CurvePoint>,
}

fn sorted_finite(times: &[Option<u64>]) -> Vec<u64> {
    let mut v: Vec<u64> = times.iter().flatten().copied().collect();
    v.sort_unstable();
    v
}

/// Bins stopping times against a sorted grid.
pub fn success_curve_from_times(
    times: &[Option<u64>],
    grid: &[u64],
    n: usize,
    strategy: &str,
    property: &str,
) -> Result<SuccessCurve, ThresholdError> {
    if times.is_empty() {
        return Err(ThresholdError::InvalidInput("success curve needs at least one trial".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(ThresholdError::InvalidInput("t grid must be sorted".into()));
    }
    let sorted = sorted_finite(times);
    let trials = times.len();
    let grid = grid
        .iter()
        .map(|&t| {
            let successes = sorted.partition_point(|&x| x <= t);
            let (lo, hi) = wilson_interval(successes, trials, Z95);
            CurvePoint { t, trials, successes, p_hat: successes as f64 / trials as f64, lo, hi }
        })
        .collect();
    Ok(SuccessCurve { n, strategy: strategy.into(), property: property.into(), grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub theta: f64,
    pub n: usize,
    /// Least `t` with `p̂(t) >= theta`.
    pub t_hat: u64,
    /// Least `t` whose Wilson upper bound reaches `theta`.
    pub ci_lo: u64,
    /// Least `t` whose Wilson lower bound reaches `theta`, if any trial time
    /// gets there.
    pub ci_hi: Option<u64>,
    pub trials_used: usize,
}

/// Smallest success count `k` with `k / trials >= theta`.
fn needed_successes(theta: f64, trials: usize) -> usize {
    let mut k = (theta * trials as f64).ceil() as usize;
    while k > 0 && (k - 1) as f64 >= theta * trials as f64 {
        k -= 1;
    }
    while (k as f64) < theta * trials as f64 {
        k += 1;
    }
    k.max(1)
}

/// Empirical `theta`-quantile of the stopping times with a Wilson band.
pub fn estimate_m_theta_from_times(times: &[Option<u64>], theta: f64, n: usize) -> Result<ThresholdEstimate, ThresholdError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(ThresholdError::InvalidInput(format!("theta = {} is not in (0, 1)", theta)));
    }
    let trials = times.len();
    let sorted = sorted_finite(times);
    let k = needed_successes(theta, trials);
    if k > sorted.len() {
        return Err(ThresholdError::NotReached { theta, reached: sorted.len(), trials });
    }
    let t_hat = sorted[k - 1];
    // Count after the i-th sorted time is the number of times <= it.
    let count_at = |i: usize| sorted.partition_point(|&x| x <= sorted[i]);
    let ci_lo = if wilson_interval(0, trials, Z95).1 >= theta {
        1
    } else {
        (0..sorted.len())
            .find(|&i| wilson_interval(count_at(i), trials, Z95).1 >= theta)
            .map(|i| sorted[i])
            .unwrap_or(t_hat)
    };
    let ci_hi = (0..sorted.len()).find(|&i| wilson_interval(count_at(i), trials, Z95).0 >= theta).map(|i| sorted[i]);
    Ok(ThresholdEstimate { theta, n, t_hat, ci_lo: ci_lo.min(t_hat), ci_hi, trials_used: trials })
}

/// `m̂(theta2) - m̂(theta1)` and its ratio to `n`, from one pool.
pub fn sharpness_width_from_times(
    times: &[Option<u64>],
    theta1: f64,
    theta2: f64,
    n: usize,
) -> Result<(u64, f64), ThresholdError> {
    if theta1 > theta2 {
        return Err(ThresholdError::InvalidInput("theta1 must not exceed theta2".into()));
    }
    let lo = estimate_m_theta_from_times(times, theta1, n)?;
    let hi = estimate_m_theta_from_times(times, theta2, n)?;
    let width = hi.t_hat - lo.t_hat;
    Ok((width, width as f64 / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub n: usize,
    pub mean: f64,
    pub std_err: f64,
    /// Finished trials used for the mean.
    pub trials: usize,
    pub censored: usize,
}

impl MeanEstimate {
    pub fn ratio(&self) -> f64 {
        self.mean / self.n as f64
    }

    pub fn ratio_err(&self) -> f64 {
        self.std_err / self.n as f64
    }
}

/// Mean stopping time and its standard error; censored trials are excluded
/// and reported.
pub fn estimate_i_n_from_times(times: &[Option<u64>], n: usize) -> Result<MeanEstimate, ThresholdError> {
    let trials = times.len();
    if trials < 30 {
        return Err(ThresholdError::InvalidInput(format!("I_n needs at least 30 trials, got {}", trials)));
    }
    let finished: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    let censored = trials - finished.len();
    if censored * 10 > trials {
        return Err(ThresholdError::TooMuchCensoring { censored, trials });
    }
    let k = finished.len() as f64;
    let mean = finished.iter().sum::<f64>() / k;
    let var = finished.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    Ok(MeanEstimate { n, mean, std_err: (var / k).sqrt(), trials: finished.len(), censored })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub n: usize,
    pub i: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// `rhs + slack - lhs`; non-negative when the inequality holds.
    pub margin: f64,
    pub holds: bool,
}

/// Checks `Î_n/n <= max(Î_i/i, Î_{n-i}/(n-i)) + slack` with
/// `slack = 3·(combined standard error) + n^{-0.1}`.
pub fn subadditivity_check(points: &[MeanEstimate], n: usize, i: usize) -> Result<SubadditivityReport, ThresholdError> {
    if i == 0 || i >= n {
        return Err(ThresholdError::InvalidInput(format!("split {} is not inside (0, {})", i, n)));
    }
    let floor = (n as f64).powf(0.8);
    if (i as f64) < floor || ((n - i) as f64) < floor {
        return Err(ThresholdError::InvalidInput(format!("split parts must be at least n^0.8 = {:.1}", floor)));
    }
    let find = |m: usize| points.iter().find(|p| p.n == m).ok_or(ThresholdError::MissingEstimate(m));
    let (pn, pi, pr) = (find(n)?, find(i)?, find(n - i)?);
    let lhs = pn.ratio();
    let (rhs, side_err) = if pi.ratio() >= pr.ratio() { (pi.ratio(), pi.ratio_err()) } else { (pr.ratio(), pr.ratio_err()) };
    let combined = (pn.ratio_err().powi(2) + side_err.powi(2)).sqrt();
    let slack = 3.0 * combined + (n as f64).powf(-0.1);
    let margin = rhs + slack - lhs;
    Ok(SubadditivityReport { n, i, lhs, rhs, slack, margin, holds: margin >= 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub points: Vec<MeanEstimate>,
    pub ratios: Vec<f64>,
    /// Largest change of `Î_n/n` between consecutive doublings.
    pub drift: f64,
    /// Change between the last two doublings.
    pub last_drift: f64,
    /// False when the last drift exceeds three combined standard errors.
    pub converged: bool,
    /// `Î_n/n` at the largest `n`.
    pub limit_estimate: f64,
}

pub fn linear_fit(points: &[MeanEstimate]) -> Result<LinearFit, ThresholdError> {
    if points.len() < 3 {
        return Err(ThresholdError::InvalidInput("linear fit needs at least three n values".into()));
    }
    if points.windows(2).any(|w| w[1].n != 2 * w[0].n) {
        return Err(ThresholdError::InvalidInput("n values must double".into()));
    }
    if points.iter().any(|p| !p.mean.is_finite()) {
        return Err(ThresholdError::InvalidInput("every estimate must be finite".into()));
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio()).collect();
    let drift = ratios.windows(2).map(|w| (w[0] - w[1]).abs()).fold(0.0, f64::max);
    let k = points.len();
    let last_drift = (ratios[k - 1] - ratios[k - 2]).abs();
    let combined = (points[k - 1].ratio_err().powi(2) + points[k - 2].ratio_err().powi(2)).sqrt();
    Ok(LinearFit {
        points: points.to_vec(),
        converged: last_drift <= 3.0 * combined || last_drift == 0.0,
        limit_estimate: ratios[k - 1],
        ratios,
        drift,
        last_drift,
    })
}

pub const TRIAL_CSV_HEADER: &str = "property,strategy,n,seed_base,trial,stopping_time,censored";
pub const SUMMARY_CSV_HEADER: &str = "property,strategy,n,theta,t_hat,ci_lo,ci_hi,trials";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRow {
    pub property: String,
    pub strategy: String,
    pub n: usize,
    pub seed_base: u64,
    pub trial: u64,
    pub stopping_time: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub property: String,
    pub strategy: String,
    pub n: usize,
    pub estimate: ThresholdEstimate,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Trial CSV. Optional leading `# ...` comment lines precede the header; a
/// censored trial has an empty `stopping_time` and `censored = 1`.
pub fn write_trial_csv<W: Write>(mut out: W, comments: &[String], rows: &[TrialRow]) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {}", c)?;
    }
    writeln!(out, "{}", TRIAL_CSV_HEADER)?;
    for r in rows {
        let t = r.stopping_time.map(|t| t.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&r.property),
            csv_field(&r.strategy),
            r.n,
            r.seed_base,
            r.trial,
            t,
            u8::from(r.stopping_time.is_none())
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut out: W, comments: &[String], rows: &[SummaryRow]) -> std::io::Result<()> {
    for c in comments {
        writeln!(out, "# {}", c)?;
    }
    writeln!(out, "{}", SUMMARY_CSV_HEADER)?;
    for r in rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.property),
            csv_field(&r.strategy),
            r.n,
            e.theta,
            e.t_hat,
            e.ci_lo,
            e.ci_hi.map(|t| t.to_string()).unwrap_or_default(),
            e.trials_used
        )?;
    }
    Ok(())
}
