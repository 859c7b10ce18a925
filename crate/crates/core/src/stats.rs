//! Tail-bound evaluators and the exact/Monte-Carlo machinery that checks
//! them: Cantelli's one-sided inequality, the multiplicative Chernoff bound,
//! and the clipped-sum excess bound, together with exact big-rational
//! binomial oracles (pmf, tails, truncation excess) so the bounds can be
//! compared against ground truth rather than against another approximation.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("alpha must be positive")]
    NonPositiveAlpha,
    #[error("tau must exceed the mean mu*m")]
    InvalidTau,
    #[error("mu must lie in [0, 1]")]
    InvalidMu,
}

/// Cantelli: for a zero-mean variable with variance σ², P(X ≥ α) ≤ σ²/(σ²+α²).
pub fn cantelli_bound(sigma_sq: Rational64, alpha: Rational64) -> Result<Rational64, StatsError> {
    if alpha <= Rational64::zero() {
        return Err(StatsError::NonPositiveAlpha);
    }
    assert!(sigma_sq >= Rational64::zero(), "variance must be nonnegative");
    Ok(sigma_sq / (sigma_sq + alpha * alpha))
}

/// Multiplicative Chernoff: P(S > (1+δ)μ) ≤ (e^δ/(1+δ)^{1+δ})^μ, evaluated
/// in the log domain so large μ cannot overflow.
pub fn chernoff_bound(mu: f64, delta: f64) -> f64 {
    assert!(mu > 0.0 && delta > 0.0, "mu and delta must be positive");
    (mu * (delta - (1.0 + delta) * delta.ln_1p())).exp()
}

/// Clip bound right-hand side: E[S − min(S, τ)] ≤ (μm/(τ − μm))² for a sum
/// S of m Bernoulli(μ) variables truncated at τ > μm.
pub fn clip_analytic_bound(mu: Rational64, m: u64, tau: u64) -> Result<Rational64, StatsError> {
    if mu < Rational64::zero() || mu > Rational64::one() {
        return Err(StatsError::InvalidMu);
    }
    let mean = mu * Rational64::from_integer(m as i64);
    let tau = Rational64::from_integer(tau as i64);
    if tau <= mean {
        return Err(StatsError::InvalidTau);
    }
    let ratio = mean / (tau - mean);
    Ok(ratio * ratio)
}

/// An analytic bound next to its empirical estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub analytic_bound: f64,
    pub empirical_estimate: f64,
    pub trials: u64,
    pub standard_error: f64,
}

impl BoundReport {
    /// Whether the estimate respects the bound with `sigmas`·SE slack.
    pub fn holds(&self, sigmas: f64) -> bool {
        self.empirical_estimate <= self.analytic_bound + sigmas * self.standard_error
    }
}

fn bernoulli_sum(rng: &mut ChaCha8Rng, m: u64, num: u64, den: u64) -> u64 {
    (0..m).filter(|_| rng.gen_range(0..den) < num).count() as u64
}

/// Monte-Carlo check of the clip bound: sample S ~ Binomial(m, μ) with
/// per-trial derived seeds, estimate E[S − min(S, τ)], and report it next
/// to the analytic bound. Deterministic given `seed` (trials accumulate
/// integer sums, so the parallel and sequential paths agree bit-for-bit).
pub fn clip_bound_check(
    mu: Rational64,
    m: u64,
    tau: u64,
    trials: u64,
    seed: u64,
) -> Result<BoundReport, StatsError> {
    let analytic = clip_analytic_bound(mu, m, tau)?;
    assert!(trials >= 1, "at least one trial required");
    let num = *mu.numer() as u64;
    let den = *mu.denom() as u64;

    let excess_of = |t: u64| -> (u128, u128) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
        let s = bernoulli_sum(&mut rng, m, num, den);
        let x = s.saturating_sub(tau) as u128;
        (x, x * x)
    };
    #[cfg(feature = "parallel")]
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(excess_of)
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    #[cfg(not(feature = "parallel"))]
    let (sum, sum_sq) = (0..trials).map(excess_of).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let t = trials as f64;
    let mean = sum as f64 / t;
    let variance = if trials > 1 {
        ((sum_sq as f64) - (sum as f64) * mean).max(0.0) / (t - 1.0)
    } else {
        0.0
    };
    Ok(BoundReport {
        analytic_bound: analytic.to_f64().expect("small rational"),
        empirical_estimate: mean,
        trials,
        standard_error: (variance / t).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Exact binomial oracles (big-rational arithmetic, no rounding anywhere)
// ---------------------------------------------------------------------------

fn big(p: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*p.numer()), BigInt::from(*p.denom()))
}

/// All binomial probabilities P(S = s) for S ~ Binomial(m, p), exact.
fn binomial_pmf_table(m: u64, p: Rational64) -> Vec<BigRational> {
    let p = big(p);
    let q = BigRational::one() - p.clone();
    if p.is_zero() {
        let mut t = vec![BigRational::zero(); m as usize + 1];
        t[0] = BigRational::one();
        return t;
    }
    if q.is_zero() {
        let mut t = vec![BigRational::zero(); m as usize + 1];
        t[m as usize] = BigRational::one();
        return t;
    }
    let ratio = p / q.clone();
    let mut table = Vec::with_capacity(m as usize + 1);
    let mut pmf = pow_big(&q, m);
    table.push(pmf.clone());
    for s in 1..=m {
        pmf = pmf * ratio.clone()
            * BigRational::from_integer(BigInt::from(m - s + 1))
            / BigRational::from_integer(BigInt::from(s));
        table.push(pmf.clone());
    }
    table
}

fn pow_big(x: &BigRational, e: u64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x.clone();
    }
    acc
}

/// Exact P(S = s) for S ~ Binomial(m, p).
pub fn binomial_pmf(m: u64, p: Rational64, s: u64) -> BigRational {
    binomial_pmf_table(m, p)[s as usize].clone()
}

/// Exact P(S > t).
pub fn binomial_tail_gt(m: u64, p: Rational64, t: u64) -> BigRational {
    binomial_pmf_table(m, p)
        .into_iter()
        .enumerate()
        .filter(|(s, _)| *s as u64 > t)
        .map(|(_, pr)| pr)
        .sum()
}

/// Exact P(S ≥ threshold) for a (possibly fractional) threshold.
pub fn binomial_tail_ge_threshold(m: u64, p: Rational64, threshold: &BigRational) -> BigRational {
    binomial_pmf_table(m, p)
        .into_iter()
        .enumerate()
        .filter(|(s, _)| &BigRational::from_integer(BigInt::from(*s)) >= threshold)
        .map(|(_, pr)| pr)
        .sum()
}

/// Exact truncation excess E[S − min(S, τ)] = Σ_{s>τ} (s − τ)·P(S = s).
pub fn binomial_excess(m: u64, p: Rational64, tau: u64) -> BigRational {
    binomial_pmf_table(m, p)
        .into_iter()
        .enumerate()
        .filter(|(s, _)| *s as u64 > tau)
        .map(|(s, pr)| pr * BigRational::from_integer(BigInt::from(s as u64 - tau)))
        .sum()
}

/// f64 view of a big rational, safe for the huge denominators exact
/// binomials produce (scales through an integer quotient first).
pub fn big_to_f64(x: &BigRational) -> f64 {
    const SHIFT: i32 = 127;
    let scaled = (x.numer() * (BigInt::one() << SHIFT as usize)) / x.denom();
    let sign = if scaled.is_negative() { -1.0 } else { 1.0 };
    sign * scaled.magnitude().to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(SHIFT)
}
