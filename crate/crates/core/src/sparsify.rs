//! Randomized degree reduction for d-regular CSPs.
//!
//! Each constraint survives independently with probability p = (1−λ)R/d;
//! then every vertex whose degree still exceeds R sheds its highest-id
//! surviving constraints until it sits at exactly R, making the result
//! R-degree-bounded. `check_events` evaluates, in exact rational
//! arithmetic, the three concentration events the analysis rests on:
//!
//! - E1: enough satisfied constraints survive sampling,
//!   |E₁(ψ)| ≥ m·(val(ψ) − 2λ);
//! - E2: trimming deletes few constraints, |E₁ \ E₂| ≤ λm;
//! - E3: the sample size concentrates, |E₁| ∈ [(1−2λ)m, m];
//!
//! with the reference scale m = nR/k. `event_frequencies` measures how
//! often they hold across seeds, and `r0_threshold` / `target_soundness`
//! expose the alphabet threshold and the soundness value the events
//! translate into.

use crate::csp::{Assignment, CspInstance};
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparsifyError {
    #[error("instance is not d-regular")]
    NotRegular,
    #[error("lambda must lie strictly between 0 and 1")]
    InvalidLambda,
    #[error("gamma must exceed 1")]
    InvalidGamma,
    #[error("the soundness constant must be positive")]
    InvalidConstant,
    #[error("outcome does not belong to this instance: {0}")]
    MismatchedProvenance(String),
    #[error("assignment shape does not match the instance")]
    AssignmentShape,
}

/// Parameters of a sparsification run. `gamma` and `c_const` only enter the
/// threshold formulas, not the sampling itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsifyConfig {
    pub lambda: Rational64,
    pub seed: u64,
    pub gamma: Rational64,
    pub c_const: Rational64,
}

impl SparsifyConfig {
    pub fn new(lambda: Rational64, seed: u64) -> Result<Self, SparsifyError> {
        if lambda <= Rational64::zero() || lambda >= Rational64::one() {
            return Err(SparsifyError::InvalidLambda);
        }
        Ok(SparsifyConfig {
            lambda,
            seed,
            gamma: Rational64::from_integer(2),
            c_const: Rational64::one(),
        })
    }

    pub fn with_gamma(mut self, gamma: Rational64) -> Result<Self, SparsifyError> {
        if gamma <= Rational64::one() {
            return Err(SparsifyError::InvalidGamma);
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_c_const(mut self, c_const: Rational64) -> Result<Self, SparsifyError> {
        if c_const <= Rational64::zero() {
            return Err(SparsifyError::InvalidConstant);
        }
        self.c_const = c_const;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Result of [`sparsify`]: the trimmed instance plus full provenance.
/// Constraint ids in `retained_ids`/`deleted_ids` refer to the original
/// instance; `result` renumbers the survivors densely in ascending
/// original-id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsifyOutcome {
    pub result: CspInstance,
    /// Ids that survived sampling (the set E₁), ascending.
    pub retained_ids: Vec<usize>,
    /// Sampled ids later deleted by trimming (E₁ \ E₂), ascending.
    pub deleted_ids: Vec<usize>,
    /// Sampling probability actually used (1 for the d ≤ R passthrough).
    pub p_used: Rational64,
    /// Reference scale m = nR/k.
    pub m_ref: Rational64,
    /// Constraint count of the original instance.
    pub original_m: usize,
}

impl SparsifyOutcome {
    /// Original ids of the constraints present in `result` (E₂), ascending.
    pub fn kept_ids(&self) -> Vec<usize> {
        let mut deleted = self.deleted_ids.iter().peekable();
        self.retained_ids
            .iter()
            .copied()
            .filter(|id| {
                if deleted.peek() == Some(&id) {
                    deleted.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }

    /// Provenance sidecar:
    ///
    /// ```text
    /// sparsify <original_m> <retained> <deleted>
    /// p <num>/<den>
    /// mref <num>/<den>
    /// ret <ids...>
    /// del <ids...>
    /// ```
    pub fn provenance_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "sparsify {} {} {}",
            self.original_m,
            self.retained_ids.len(),
            self.deleted_ids.len()
        )
        .unwrap();
        writeln!(out, "p {}/{}", self.p_used.numer(), self.p_used.denom()).unwrap();
        writeln!(out, "mref {}/{}", self.m_ref.numer(), self.m_ref.denom()).unwrap();
        let join = |ids: &[usize]| {
            ids.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "ret {}", join(&self.retained_ids)).unwrap();
        writeln!(out, "del {}", join(&self.deleted_ids)).unwrap();
        out
    }
}

fn reference_scale(inst: &CspInstance) -> Rational64 {
    Rational64::new(
        inst.num_vertices() as i64 * inst.alphabet() as i64,
        inst.arity() as i64,
    )
}

/// Sample constraints with probability (1−λ)R/d, then trim every vertex
/// back to degree R by deleting its highest-id surviving constraints
/// (vertices processed in part-major order; a deletion is global, so later
/// vertices see the reduced degrees). Deterministic given the seed. When
/// d ≤ R the instance is already degree-bounded and passes through intact.
pub fn sparsify(
    inst: &CspInstance,
    cfg: &SparsifyConfig,
) -> Result<SparsifyOutcome, SparsifyError> {
    let report = inst.validate();
    let d = report.regular_degree().ok_or(SparsifyError::NotRegular)?;
    let r = inst.alphabet() as usize;
    let m = inst.num_constraints();
    let m_ref = reference_scale(inst);

    if d <= r {
        return Ok(SparsifyOutcome {
            result: inst.clone(),
            retained_ids: (0..m).collect(),
            deleted_ids: Vec::new(),
            p_used: Rational64::one(),
            m_ref,
            original_m: m,
        });
    }

    let p = (Rational64::one() - cfg.lambda) * Rational64::new(r as i64, d as i64);
    let (num, den) = (*p.numer() as u64, *p.denom() as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alive: Vec<bool> = (0..m).map(|_| rng.gen_range(0..den) < num).collect();
    let retained_ids: Vec<usize> = (0..m).filter(|&id| alive[id]).collect();

    // degree of each global vertex among surviving constraints
    let offsets = inst.part_offsets();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); inst.num_vertices()];
    let mut degree = vec![0usize; inst.num_vertices()];
    for c in inst.constraints() {
        if alive[c.id] {
            for v in &c.scope {
                let g = offsets[v.part] + v.index;
                incident[g].push(c.id);
                degree[g] += 1;
            }
        }
    }

    let mut deleted_ids = Vec::new();
    for g in 0..inst.num_vertices() {
        if degree[g] <= r {
            continue;
        }
        // incident lists are ascending; walk from the back for highest ids
        let mut idx = incident[g].len();
        while degree[g] > r && idx > 0 {
            idx -= 1;
            let id = incident[g][idx];
            if !alive[id] {
                continue;
            }
            alive[id] = false;
            deleted_ids.push(id);
            for v in &inst.constraints()[id].scope {
                degree[offsets[v.part] + v.index] -= 1;
            }
        }
    }
    deleted_ids.sort_unstable();

    let survivors: Vec<_> = inst
        .constraints()
        .iter()
        .filter(|c| alive[c.id])
        .cloned()
        .collect();
    let result = inst
        .with_constraints(survivors)
        .expect("surviving constraints stay well-formed");
    Ok(SparsifyOutcome {
        result,
        retained_ids,
        deleted_ids,
        p_used: p,
        m_ref,
        original_m: m,
    })
}

/// The three concentration events for one outcome and one assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventFlags {
    /// |E₁(ψ)| ≥ m(val(ψ) − 2λ)
    pub e1: bool,
    /// |E₁ \ E₂| ≤ λm
    pub e2: bool,
    /// (1−2λ)m ≤ |E₁| ≤ m
    pub e3: bool,
}

impl EventFlags {
    pub fn all(&self) -> bool {
        self.e1 && self.e2 && self.e3
    }
}

fn check_provenance(
    original: &CspInstance,
    outcome: &SparsifyOutcome,
) -> Result<(), SparsifyError> {
    let m = original.num_constraints();
    let err = |msg: String| Err(SparsifyError::MismatchedProvenance(msg));
    if outcome.original_m != m {
        return err(format!(
            "outcome records {} original constraints, instance has {m}",
            outcome.original_m
        ));
    }
    if outcome.retained_ids.windows(2).any(|w| w[0] >= w[1]) {
        return err("retained ids are not strictly ascending".into());
    }
    if outcome.retained_ids.last().is_some_and(|&id| id >= m) {
        return err("retained id out of range".into());
    }
    let mut retained = outcome.retained_ids.iter().peekable();
    for &id in &outcome.deleted_ids {
        while retained.next_if(|&&rid| rid < id).is_some() {}
        if retained.peek() != Some(&&id) {
            return err(format!("deleted id {id} was never retained"));
        }
    }
    let expected = outcome.retained_ids.len() - outcome.deleted_ids.len();
    if outcome.result.num_constraints() != expected {
        return err(format!(
            "result has {} constraints, retained − deleted = {expected}",
            outcome.result.num_constraints()
        ));
    }
    Ok(())
}

fn events_from_counts(
    satisfied_retained: Option<usize>,
    val: Option<Rational64>,
    retained: usize,
    deleted: usize,
    m_ref: Rational64,
    lambda: Rational64,
) -> EventFlags {
    let two = Rational64::from_integer(2);
    let e1 = match (satisfied_retained, val) {
        (Some(count), Some(val)) => {
            Rational64::from_integer(count as i64) >= m_ref * (val - two * lambda)
        }
        _ => true, // no assignment under test
    };
    let e2 = Rational64::from_integer(deleted as i64) <= lambda * m_ref;
    let retained = Rational64::from_integer(retained as i64);
    let e3 = (Rational64::one() - two * lambda) * m_ref <= retained && retained <= m_ref;
    EventFlags { e1, e2, e3 }
}

/// Evaluate the events E1/E2/E3 exactly for an outcome of `original` and an
/// assignment ψ (E1 is about the constraints of the *original* instance
/// that ψ satisfies and sampling retained).
pub fn check_events(
    original: &CspInstance,
    outcome: &SparsifyOutcome,
    psi: &Assignment,
    lambda: Rational64,
) -> Result<EventFlags, SparsifyError> {
    check_provenance(original, outcome)?;
    let satisfied = original
        .satisfied_set(psi)
        .map_err(|_| SparsifyError::AssignmentShape)?;
    let val = original
        .value(psi)
        .map_err(|_| SparsifyError::AssignmentShape)?
        .fraction;
    // |E₁(ψ)|: satisfied ∩ retained, both ascending
    let mut retained = outcome.retained_ids.iter().peekable();
    let mut in_both = 0usize;
    for id in &satisfied {
        while retained.next_if(|&&rid| rid < *id).is_some() {}
        if retained.peek() == Some(&id) {
            in_both += 1;
        }
    }
    Ok(events_from_counts(
        Some(in_both),
        Some(val),
        outcome.retained_ids.len(),
        outcome.deleted_ids.len(),
        outcome.m_ref,
        lambda,
    ))
}

/// Empirical event rates over `trials` consecutive seeds starting at
/// `cfg.seed`. E1 is only measured when an assignment is supplied. Also
/// accumulates retained/deleted totals for law-of-large-numbers checks.
/// Integer accumulation keeps the parallel and sequential paths identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventFrequencies {
    pub trials: u64,
    pub e1_true: Option<u64>,
    pub e2_true: u64,
    pub e3_true: u64,
    pub all_true: u64,
    pub retained_total: u64,
    pub deleted_total: u64,
}

impl EventFrequencies {
    pub fn e2_rate(&self) -> f64 {
        self.e2_true as f64 / self.trials as f64
    }

    pub fn e3_rate(&self) -> f64 {
        self.e3_true as f64 / self.trials as f64
    }

    pub fn mean_retained(&self) -> f64 {
        self.retained_total as f64 / self.trials as f64
    }
}

fn frequency_trial(
    inst: &CspInstance,
    cfg: &SparsifyConfig,
    psi: Option<&Assignment>,
    satisfied: Option<&[usize]>,
    val: Option<Rational64>,
    seed: u64,
) -> Result<(u64, u64, u64, u64, u64, u64), SparsifyError> {
    let outcome = sparsify(inst, &cfg.clone().with_seed(seed))?;
    let satisfied_retained = satisfied.map(|sat| {
        let mut retained = outcome.retained_ids.iter().peekable();
        let mut count = 0;
        for id in sat {
            while retained.next_if(|&&rid| rid < *id).is_some() {}
            if retained.peek() == Some(&id) {
                count += 1;
            }
        }
        count
    });
    let flags = events_from_counts(
        satisfied_retained,
        val,
        outcome.retained_ids.len(),
        outcome.deleted_ids.len(),
        outcome.m_ref,
        cfg.lambda,
    );
    let _ = psi;
    Ok((
        (flags.e1 && satisfied.is_some()) as u64,
        flags.e2 as u64,
        flags.e3 as u64,
        flags.all() as u64,
        outcome.retained_ids.len() as u64,
        outcome.deleted_ids.len() as u64,
    ))
}

fn event_frequencies_impl(
    inst: &CspInstance,
    cfg: &SparsifyConfig,
    psi: Option<&Assignment>,
    trials: u64,
    parallel: bool,
) -> Result<EventFrequencies, SparsifyError> {
    assert!(trials >= 1, "at least one trial required");
    let satisfied = match psi {
        Some(psi) => Some(
            inst.satisfied_set(psi)
                .map_err(|_| SparsifyError::AssignmentShape)?,
        ),
        None => None,
    };
    let val = match psi {
        Some(psi) => Some(
            inst.value(psi)
                .map_err(|_| SparsifyError::AssignmentShape)?
                .fraction,
        ),
        None => None,
    };
    let run = |t: u64| {
        frequency_trial(
            inst,
            cfg,
            psi,
            satisfied.as_deref(),
            val,
            cfg.seed.wrapping_add(t),
        )
    };
    let add = |a: (u64, u64, u64, u64, u64, u64), b: (u64, u64, u64, u64, u64, u64)| {
        (
            a.0 + b.0,
            a.1 + b.1,
            a.2 + b.2,
            a.3 + b.3,
            a.4 + b.4,
            a.5 + b.5,
        )
    };
    #[cfg(feature = "parallel")]
    let totals = if parallel {
        (0..trials)
            .into_par_iter()
            .map(run)
            .try_reduce(|| (0, 0, 0, 0, 0, 0), |a, b| Ok(add(a, b)))?
    } else {
        let mut acc = (0, 0, 0, 0, 0, 0);
        for t in 0..trials {
            acc = add(acc, run(t)?);
        }
        acc
    };
    #[cfg(not(feature = "parallel"))]
    let totals = {
        let _ = parallel;
        let mut acc = (0, 0, 0, 0, 0, 0);
        for t in 0..trials {
            acc = add(acc, run(t)?);
        }
        acc
    };
    Ok(EventFrequencies {
        trials,
        e1_true: psi.is_some().then_some(totals.0),
        e2_true: totals.1,
        e3_true: totals.2,
        all_true: totals.3,
        retained_total: totals.4,
        deleted_total: totals.5,
    })
}

pub fn event_frequencies(
    inst: &CspInstance,
    cfg: &SparsifyConfig,
    psi: Option<&Assignment>,
    trials: u64,
) -> Result<EventFrequencies, SparsifyError> {
    event_frequencies_impl(inst, cfg, psi, trials, true)
}

/// Single-threaded [`event_frequencies`], kept public for bench comparison.
pub fn event_frequencies_seq(
    inst: &CspInstance,
    cfg: &SparsifyConfig,
    psi: Option<&Assignment>,
    trials: u64,
) -> Result<EventFrequencies, SparsifyError> {
    event_frequencies_impl(inst, cfg, psi, trials, false)
}

/// The four terms of the alphabet threshold
/// R₀ = max{ k·100λ⁻³, (eC(1−λ)/(k(1+λ)))^{1/λ}, 100^{1/λ}, C(γ−1)(1−λ²)/(k(1+λ)) }.
/// The two power terms are transcendental and reported as f64 (evaluated
/// via `powf`, i.e. IEEE double precision); the other two stay rational.
#[derive(Debug, Clone, PartialEq)]
pub struct R0Terms {
    /// k·100·λ⁻³, exact.
    pub degree_term: Rational64,
    /// (e·C·(1−λ)/(k(1+λ)))^{1/λ}.
    pub exp_c_term: f64,
    /// 100^{1/λ}.
    pub exp_100_term: f64,
    /// C·(γ−1)·(1−λ²)/(k(1+λ)), exact.
    pub linear_c_term: Rational64,
}

impl R0Terms {
    /// The threshold itself: the maximum of the four terms.
    pub fn value(&self) -> f64 {
        let a = self.degree_term.to_f64().expect("desk-scale rational");
        let d = self.linear_c_term.to_f64().expect("desk-scale rational");
        a.max(self.exp_c_term).max(self.exp_100_term).max(d)
    }
}

pub fn r0_threshold(k: u64, lambda: Rational64, gamma: Rational64, c_const: Rational64) -> R0Terms {
    assert!(
        lambda > Rational64::zero() && lambda < Rational64::one(),
        "lambda must lie in (0, 1)"
    );
    let one = Rational64::one();
    let k_rat = Rational64::from_integer(k as i64);
    let lambda_f = lambda.to_f64().expect("desk-scale rational");
    let inv_lambda = 1.0 / lambda_f;

    let degree_term = k_rat * Rational64::from_integer(100) / (lambda * lambda * lambda);
    let exp_c_base = std::f64::consts::E * c_const.to_f64().unwrap() * (one - lambda).to_f64().unwrap()
        / (k as f64 * (one + lambda).to_f64().unwrap());
    R0Terms {
        degree_term,
        exp_c_term: exp_c_base.powf(inv_lambda),
        exp_100_term: 100f64.powf(inv_lambda),
        linear_c_term: c_const * (gamma - one) * (one - lambda * lambda) / (k_rat * (one + lambda)),
    }
}

/// Soundness value the sparsified instance is analyzed against:
/// k(1+λ) / ((γ−1)(1−λ)²R), exact.
pub fn target_soundness(k: u64, gamma: Rational64, lambda: Rational64, r: u64) -> Rational64 {
    assert!(gamma > Rational64::one(), "gamma must exceed 1");
    assert!(
        lambda >= Rational64::zero() && lambda < Rational64::one(),
        "lambda must lie in [0, 1)"
    );
    assert!(r >= 2, "alphabet must have at least two labels");
    let one = Rational64::one();
    let k_rat = Rational64::from_integer(k as i64);
    let one_minus = one - lambda;
    k_rat * (one + lambda)
        / ((gamma - one) * one_minus * one_minus * Rational64::from_integer(r as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{gen_planted, gen_random_regular};

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn regular(k: usize, alphabet: u32, d: usize, n: usize, seed: u64) -> CspInstance {
        gen_random_regular(k, alphabet, d, n, r(1, 2), seed).unwrap()
    }

    #[test]
    fn passthrough_when_degree_already_bounded() {
        let inst = regular(2, 3, 2, 3, 0);
        let cfg = SparsifyConfig::new(r(1, 2), 99).unwrap();
        let out = sparsify(&inst, &cfg).unwrap();
        assert_eq!(out.result, inst);
        assert_eq!(out.p_used, Rational64::one());
        assert_eq!(out.retained_ids.len(), inst.num_constraints());
        assert!(out.deleted_ids.is_empty());
    }

    #[test]
    fn sampling_probability_formula() {
        // d = 2R, λ = 1/2 → p = (1/2)·R/(2R) = 1/4
        let inst = regular(2, 2, 4, 2, 3);
        let cfg = SparsifyConfig::new(r(1, 2), 7).unwrap();
        let out = sparsify(&inst, &cfg).unwrap();
        assert_eq!(out.p_used, r(1, 4));
        assert_eq!(out.m_ref, r(4, 1)); // nR/k = 4·2/2
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let inst = regular(2, 3, 9, 4, 5);
        let cfg = SparsifyConfig::new(r(1, 4), 11).unwrap();
        assert_eq!(sparsify(&inst, &cfg).unwrap(), sparsify(&inst, &cfg).unwrap());
        let other = sparsify(&inst, &cfg.clone().with_seed(12)).unwrap();
        assert_ne!(sparsify(&inst, &cfg).unwrap().retained_ids, other.retained_ids);
    }

    #[test]
    fn result_is_degree_bounded_with_consistent_provenance() {
        for seed in 0..30 {
            let inst = regular(2, 2, 8, 3, seed);
            let cfg = SparsifyConfig::new(r(1, 4), seed * 31).unwrap();
            let out = sparsify(&inst, &cfg).unwrap();
            let report = out.result.validate();
            assert!(report.is_degree_bounded(2), "seed {seed}");
            assert_eq!(
                out.result.num_constraints(),
                out.retained_ids.len() - out.deleted_ids.len()
            );
            assert_eq!(out.kept_ids().len(), out.result.num_constraints());
            // deleted ⊆ retained ⊆ original ids
            assert!(out.deleted_ids.iter().all(|id| out.retained_ids.contains(id)));
            assert!(out.retained_ids.iter().all(|&id| id < inst.num_constraints()));
            check_provenance(&inst, &out).unwrap();
        }
    }

    #[test]
    fn kept_constraints_match_originals() {
        let inst = regular(2, 2, 6, 4, 2);
        let cfg = SparsifyConfig::new(r(1, 3), 8).unwrap();
        let out = sparsify(&inst, &cfg).unwrap();
        for (new_id, &orig_id) in out.kept_ids().iter().enumerate() {
            let kept = &out.result.constraints()[new_id];
            let orig = &inst.constraints()[orig_id];
            assert_eq!(kept.scope, orig.scope);
            assert_eq!(kept.sat(), orig.sat());
        }
    }

    #[test]
    fn irregular_instance_rejected() {
        let inst = regular(2, 2, 2, 2, 0);
        let mut constraints: Vec<_> = inst.constraints().to_vec();
        constraints.pop();
        let irregular = inst.with_constraints(constraints).unwrap();
        let cfg = SparsifyConfig::new(r(1, 2), 0).unwrap();
        assert_eq!(sparsify(&irregular, &cfg), Err(SparsifyError::NotRegular));
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            SparsifyConfig::new(r(0, 1), 0),
            Err(SparsifyError::InvalidLambda)
        );
        assert_eq!(
            SparsifyConfig::new(r(5, 4), 0),
            Err(SparsifyError::InvalidLambda)
        );
        let cfg = SparsifyConfig::new(r(1, 2), 0).unwrap();
        assert_eq!(
            cfg.clone().with_gamma(r(1, 1)),
            Err(SparsifyError::InvalidGamma)
        );
        assert_eq!(
            cfg.with_c_const(r(0, 1)),
            Err(SparsifyError::InvalidConstant)
        );
    }

    #[test]
    fn events_zero_deletions_make_e2_true() {
        let inst = regular(2, 3, 2, 3, 1);
        let cfg = SparsifyConfig::new(r(1, 4), 5).unwrap();
        let out = sparsify(&inst, &cfg).unwrap(); // passthrough: no deletions
        let psi = Assignment::zeros(&inst);
        let flags = check_events(&inst, &out, &psi, cfg.lambda).unwrap();
        assert!(flags.e2);
    }

    #[test]
    fn events_flag_oversized_retained_set() {
        // hand-crafted "outcome" retaining everything: |E₁| = 8 > m_ref = 4
        let inst = regular(2, 2, 4, 2, 3);
        let out = SparsifyOutcome {
            result: inst.clone(),
            retained_ids: (0..8).collect(),
            deleted_ids: vec![],
            p_used: Rational64::one(),
            m_ref: reference_scale(&inst),
            original_m: 8,
        };
        let psi = Assignment::zeros(&inst);
        let flags = check_events(&inst, &out, &psi, r(1, 4)).unwrap();
        assert!(!flags.e3);
        assert!(flags.e2);
    }

    #[test]
    fn events_e1_trivial_when_value_small() {
        // val − 2λ < 0 makes E1 vacuous regardless of sampling
        let inst = gen_random_regular(2, 2, 4, 2, r(0, 1), 4).unwrap();
        let cfg = SparsifyConfig::new(r(1, 2), 3).unwrap();
        let out = sparsify(&inst, &cfg).unwrap();
        let psi = Assignment::zeros(&inst);
        assert!(check_events(&inst, &out, &psi, cfg.lambda).unwrap().e1);
    }

    #[test]
    fn mismatched_provenance_detected() {
        let a = regular(2, 2, 4, 2, 0);
        let b = regular(2, 2, 4, 3, 0); // 12 constraints, not 8
        let out = sparsify(&a, &SparsifyConfig::new(r(1, 2), 1).unwrap()).unwrap();
        let psi = Assignment::zeros(&b);
        assert!(matches!(
            check_events(&b, &out, &psi, r(1, 2)),
            Err(SparsifyError::MismatchedProvenance(_))
        ));
    }

    #[test]
    fn frequencies_match_sequential_path() {
        let inst = regular(2, 3, 9, 3, 6);
        let cfg = SparsifyConfig::new(r(1, 4), 100).unwrap();
        let (pinst, psi) = gen_planted(2, 3, 9, 3, 6).unwrap();
        let a = event_frequencies(&pinst, &cfg, Some(&psi), 64).unwrap();
        let b = event_frequencies_seq(&pinst, &cfg, Some(&psi), 64).unwrap();
        assert_eq!(a, b);
        let c = event_frequencies(&inst, &cfg, None, 64).unwrap();
        assert_eq!(c.e1_true, None);
        assert_eq!(c.trials, 64);
    }

    #[test]
    fn planted_events_hold_often() {
        // satisfied retained count tracks |E₁| exactly for a perfect plant
        let (inst, psi) = gen_planted(2, 5, 10, 4, 9).unwrap();
        let cfg = SparsifyConfig::new(r(1, 4), 0).unwrap();
        let freq = event_frequencies(&inst, &cfg, Some(&psi), 200).unwrap();
        let e1 = freq.e1_true.unwrap();
        assert!(e1 >= 160, "E1 held only {e1}/200 times");
    }

    #[test]
    fn completeness_trend_conditioned_on_events() {
        // whenever all three events hold, val(Π′) ≥ val(Π) − 3λ exactly
        let (inst, psi) = gen_planted(2, 5, 10, 4, 13).unwrap();
        let lambda = r(1, 4);
        let cfg = SparsifyConfig::new(lambda, 0).unwrap();
        let mut conditioned = 0;
        for t in 0..200 {
            let out = sparsify(&inst, &cfg.clone().with_seed(t)).unwrap();
            let flags = check_events(&inst, &out, &psi, lambda).unwrap();
            if !flags.all() || out.result.num_constraints() == 0 {
                continue;
            }
            conditioned += 1;
            let val_orig = inst.value(&psi).unwrap().fraction;
            let val_new = out.result.value(&psi).unwrap().fraction;
            assert!(
                val_new >= val_orig - Rational64::from_integer(3) * lambda,
                "seed {t}: {val_new} < {val_orig} − 3λ"
            );
        }
        assert!(conditioned >= 100, "only {conditioned} conditioned samples");
    }

    #[test]
    fn empty_survivor_set_is_well_formed() {
        // λ near 1 makes p tiny; some seed must wipe out every constraint,
        // and the empty result still reduces and solves without panicking
        let inst = regular(2, 2, 4, 2, 3);
        let cfg = SparsifyConfig::new(r(99, 100), 0).unwrap();
        let mut saw_empty = false;
        for seed in 0..50 {
            let out = sparsify(&inst, &cfg.clone().with_seed(seed)).unwrap();
            if out.result.num_constraints() == 0 {
                saw_empty = true;
                let red = crate::reduce::reduce_to_packing(&out.result).unwrap();
                assert_eq!(red.packing().num_edges(), 0);
                assert_eq!(red.packing().solve_exact(None).unwrap().len(), 0);
                assert_eq!(out.result.solve_exact(None).unwrap().satisfied, 0);
                let text = out.result.to_text();
                assert_eq!(CspInstance::from_text(&text).unwrap(), out.result);
            }
        }
        assert!(saw_empty, "no seed produced an empty survivor set");
    }

    #[test]
    fn r0_terms_example() {
        let terms = r0_threshold(6, r(1, 2), r(2, 1), r(1, 100));
        assert_eq!(terms.degree_term, r(4800, 1));
        assert!((terms.exp_100_term - 10_000.0).abs() < 1e-6);
        assert_eq!(terms.linear_c_term, r(1, 1200));
        let base = std::f64::consts::E * 0.01 * 0.5 / 9.0;
        assert!((terms.exp_c_term - base * base).abs() < 1e-12);
        assert!((terms.value() - 10_000.0).abs() < 1e-6);
    }

    #[test]
    fn r0_limits_and_monotonicity() {
        // λ→1⁻ sends 100^{1/λ} toward 100
        let terms = r0_threshold(6, r(999, 1000), r(2, 1), r(1, 1));
        assert!(terms.exp_100_term > 100.0 && terms.exp_100_term < 101.0);
        // first term shrinks as λ grows
        let lo = r0_threshold(6, r(1, 4), r(2, 1), r(1, 1)).degree_term;
        let hi = r0_threshold(6, r(1, 2), r(2, 1), r(1, 1)).degree_term;
        assert_eq!(lo, r(38_400, 1));
        assert!(lo > hi);
    }

    #[test]
    fn target_soundness_examples() {
        assert_eq!(target_soundness(6, r(4, 1), r(0, 1), 5), r(2, 5));
        assert_eq!(target_soundness(6, r(4, 1), r(0, 1), 7), r(2, 7));
        assert_eq!(target_soundness(4, r(2, 1), r(0, 1), 8), r(1, 2));
        // strictly increasing in λ
        assert!(
            target_soundness(6, r(4, 1), r(1, 10), 5) < target_soundness(6, r(4, 1), r(2, 10), 5)
        );
    }
}
