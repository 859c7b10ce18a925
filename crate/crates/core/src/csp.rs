//! k-partite k-CSP instances with explicit satisfying-tuple sets.
//!
//! A constraint names one vertex in each of the k parts and carries the set
//! of label tuples that satisfy it. Values are exact: satisfied counts are
//! integers, fractions are rationals. `solve_exact` enumerates all `R^n`
//! assignments (parallel by default) and is the oracle the reduction and
//! sparsifier tests are checked against.

use num_rational::Rational64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Enumeration cap for [`CspInstance::solve_exact`] when none is given.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Per-constraint tuple-space cap for the random generators.
const GEN_TUPLE_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("value is undefined on an empty constraint set")]
    EmptyConstraintSet,
    #[error("enumeration space {alphabet}^{vertices} exceeds cap {cap}")]
    TooLarge {
        alphabet: u32,
        vertices: usize,
        cap: u64,
    },
    #[error("no d-regular k-partite multigraph with these parameters")]
    InfeasibleDegree,
    #[error("satisfaction density must lie in [0, 1]")]
    InvalidDensity,
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("assignment shape does not match the instance parts")]
    AssignmentShape,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A vertex named by its part and index within the part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub part: usize,
    pub index: usize,
}

impl VertexRef {
    pub fn new(part: usize, index: usize) -> Self {
        VertexRef { part, index }
    }
}

/// One constraint: a scope of k vertices and its satisfying label tuples.
///
/// Tuples are kept sorted and deduplicated so iteration order (and therefore
/// every downstream edge numbering) is canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub id: usize,
    pub scope: Vec<VertexRef>,
    sat: Vec<Vec<u32>>,
}

impl Constraint {
    pub fn new(id: usize, scope: Vec<VertexRef>, sat: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut sat: Vec<Vec<u32>> = sat.into_iter().collect();
        sat.sort();
        sat.dedup();
        Constraint { id, scope, sat }
    }

    /// Satisfying tuples in ascending lexicographic order.
    pub fn sat(&self) -> &[Vec<u32>] {
        &self.sat
    }

    pub fn is_satisfied_by(&self, tuple: &[u32]) -> bool {
        self.sat
            .binary_search_by(|t| t.as_slice().cmp(tuple))
            .is_ok()
    }
}

/// A k-partite k-CSP instance over alphabet `0..R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    k: usize,
    alphabet: u32,
    parts: Vec<usize>,
    constraints: Vec<Constraint>,
}

/// A total assignment: one label per vertex, grouped by part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub labels: Vec<Vec<u32>>,
}

impl Assignment {
    /// All-zero assignment for `inst`.
    pub fn zeros(inst: &CspInstance) -> Self {
        Assignment {
            labels: inst.parts.iter().map(|&n| vec![0; n]).collect(),
        }
    }

    pub fn label(&self, v: VertexRef) -> u32 {
        self.labels[v.part][v.index]
    }

    fn matches(&self, inst: &CspInstance) -> bool {
        self.labels.len() == inst.parts.len()
            && self
                .labels
                .iter()
                .zip(&inst.parts)
                .all(|(l, &n)| l.len() == n)
            && self
                .labels
                .iter()
                .all(|l| l.iter().all(|&x| (x as u64) < inst.alphabet as u64))
    }
}

/// Exact value of an assignment: satisfied count and fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CspValue {
    pub satisfied: u64,
    pub fraction: Rational64,
}

/// Output of [`CspInstance::solve_exact`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspSolution {
    pub assignment: Assignment,
    pub satisfied: u64,
}

/// Findings of [`CspInstance::validate`]. Construction only bounds-checks,
/// so ill-formed instances (non-partite scopes, out-of-range labels) are
/// representable and get reported here rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Constraint ids whose scope does not hit every part exactly once.
    pub partite_violations: Vec<usize>,
    /// Constraint ids with a satisfying tuple outside `0..R`.
    pub label_violations: Vec<usize>,
    /// Pairs of constraint ids sharing the same vertex set.
    pub duplicate_scopes: Vec<(usize, usize)>,
    /// Per-part, per-vertex constraint counts.
    pub degrees: Vec<Vec<usize>>,
    pub min_degree: usize,
    pub max_degree: usize,
}

impl ValidationReport {
    pub fn is_partite(&self) -> bool {
        self.partite_violations.is_empty()
    }

    pub fn labels_in_range(&self) -> bool {
        self.label_violations.is_empty()
    }

    pub fn is_well_formed(&self) -> bool {
        self.is_partite() && self.labels_in_range()
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.min_degree == d && self.max_degree == d
    }

    pub fn is_degree_bounded(&self, d: usize) -> bool {
        self.max_degree <= d
    }

    /// The common degree when the instance is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        (self.min_degree == self.max_degree).then_some(self.max_degree)
    }
}

impl CspInstance {
    /// Build an instance, checking only what later evaluation relies on:
    /// arity and alphabet minimums, scope arity and index ranges, tuple
    /// arity, and dense constraint ids. Partiteness and label ranges are
    /// `validate`'s job.
    pub fn new(
        k: usize,
        alphabet: u32,
        parts: Vec<usize>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, CspError> {
        if k < 2 {
            return Err(CspError::Malformed(format!("arity k={k} must be >= 2")));
        }
        if alphabet < 2 {
            return Err(CspError::Malformed(format!(
                "alphabet R={alphabet} must be >= 2"
            )));
        }
        if parts.len() != k {
            return Err(CspError::Malformed(format!(
                "expected {k} parts, got {}",
                parts.len()
            )));
        }
        for (id, c) in constraints.iter().enumerate() {
            if c.id != id {
                return Err(CspError::Malformed(format!(
                    "constraint ids must be dense: expected {id}, got {}",
                    c.id
                )));
            }
            if c.scope.len() != k {
                return Err(CspError::Malformed(format!(
                    "constraint {id} has scope arity {}, expected {k}",
                    c.scope.len()
                )));
            }
            for v in &c.scope {
                if v.part >= k || v.index >= parts[v.part] {
                    return Err(CspError::Malformed(format!(
                        "constraint {id} references vertex {}:{} out of range",
                        v.part, v.index
                    )));
                }
            }
            for t in c.sat() {
                if t.len() != k {
                    return Err(CspError::Malformed(format!(
                        "constraint {id} has a tuple of arity {}, expected {k}",
                        t.len()
                    )));
                }
            }
        }
        Ok(CspInstance {
            k,
            alphabet,
            parts,
            constraints,
        })
    }

    pub fn arity(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Offset of each part in the flat `0..n` vertex numbering (part-major).
    pub fn part_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.k);
        let mut acc = 0;
        for &n in &self.parts {
            off.push(acc);
            acc += n;
        }
        off
    }

    pub fn global_index(&self, v: VertexRef) -> usize {
        self.part_offsets()[v.part] + v.index
    }

    /// Replace the constraint list, renumbering ids densely in the given
    /// order. Scopes must already be in range.
    pub fn with_constraints(&self, constraints: Vec<Constraint>) -> Result<Self, CspError> {
        let constraints = constraints
            .into_iter()
            .enumerate()
            .map(|(id, c)| Constraint::new(id, c.scope, c.sat))
            .collect();
        CspInstance::new(self.k, self.alphabet, self.parts.clone(), constraints)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut partite_violations = Vec::new();
        let mut label_violations = Vec::new();
        let mut degrees: Vec<Vec<usize>> = self.parts.iter().map(|&n| vec![0; n]).collect();
        let mut seen_scopes: std::collections::HashMap<Vec<VertexRef>, usize> =
            std::collections::HashMap::new();
        let mut duplicate_scopes = Vec::new();

        for c in &self.constraints {
            let mut hits = vec![0usize; self.k];
            for v in &c.scope {
                hits[v.part] += 1;
                degrees[v.part][v.index] += 1;
            }
            if hits.iter().any(|&h| h != 1) {
                partite_violations.push(c.id);
            }
            if c.sat()
                .iter()
                .any(|t| t.iter().any(|&l| l >= self.alphabet))
            {
                label_violations.push(c.id);
            }
            let mut key = c.scope.clone();
            key.sort();
            match seen_scopes.entry(key) {
                std::collections::hash_map::Entry::Occupied(first) => {
                    duplicate_scopes.push((*first.get(), c.id));
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(c.id);
                }
            }
        }

        let all_degrees = degrees.iter().flatten().copied();
        let min_degree = all_degrees.clone().min().unwrap_or(0);
        let max_degree = all_degrees.max().unwrap_or(0);
        ValidationReport {
            partite_violations,
            label_violations,
            duplicate_scopes,
            degrees,
            min_degree,
            max_degree,
        }
    }

    /// Ids of constraints satisfied by `psi`, ascending.
    pub fn satisfied_set(&self, psi: &Assignment) -> Result<Vec<usize>, CspError> {
        if !psi.matches(self) {
            return Err(CspError::AssignmentShape);
        }
        let mut tuple = vec![0u32; self.k];
        let mut out = Vec::new();
        for c in &self.constraints {
            for (slot, v) in c.scope.iter().enumerate() {
                tuple[slot] = psi.label(*v);
            }
            if c.is_satisfied_by(&tuple) {
                out.push(c.id);
            }
        }
        Ok(out)
    }

    /// Satisfied count and exact fraction. Undefined (an error) when the
    /// instance has no constraints.
    pub fn value(&self, psi: &Assignment) -> Result<CspValue, CspError> {
        if self.constraints.is_empty() {
            return Err(CspError::EmptyConstraintSet);
        }
        let satisfied = self.satisfied_set(psi)?.len() as u64;
        Ok(CspValue {
            satisfied,
            fraction: Rational64::new(satisfied as i64, self.constraints.len() as i64),
        })
    }

    fn enum_space(&self, cap: u64) -> Result<u64, CspError> {
        let n = self.num_vertices();
        let mut total: u64 = 1;
        for _ in 0..n {
            total = total
                .checked_mul(self.alphabet as u64)
                .filter(|&t| t <= cap)
                .ok_or(CspError::TooLarge {
                    alphabet: self.alphabet,
                    vertices: n,
                    cap,
                })?;
        }
        Ok(total)
    }

    fn eval_ctx(&self) -> EvalCtx<'_> {
        let offsets = self.part_offsets();
        let scopes = self
            .constraints
            .iter()
            .map(|c| c.scope.iter().map(|v| offsets[v.part] + v.index).collect())
            .collect();
        EvalCtx {
            inst: self,
            scopes,
        }
    }

    fn assignment_from_flat(&self, flat: &[u32]) -> Assignment {
        let offsets = self.part_offsets();
        Assignment {
            labels: self
                .parts
                .iter()
                .zip(&offsets)
                .map(|(&n, &off)| flat[off..off + n].to_vec())
                .collect(),
        }
    }

    /// Maximizing assignment by full enumeration; ties broken by the
    /// lexicographically smallest label vector. Uses the rayon path when the
    /// `parallel` feature is enabled; results are identical either way.
    pub fn solve_exact(&self, cap: Option<u64>) -> Result<CspSolution, CspError> {
        let cap = cap.unwrap_or(DEFAULT_ENUM_CAP);
        let total = self.enum_space(cap)?;
        let ctx = self.eval_ctx();

        #[cfg(feature = "parallel")]
        let (count, index) = {
            let chunk = (total / (8 * rayon::current_num_threads().max(1) as u64)).clamp(1, 65_536);
            let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
            starts
                .into_par_iter()
                .map(|start| ctx.best_in_range(start, (start + chunk).min(total)))
                .reduce(|| (0, 0), better)
        };
        #[cfg(not(feature = "parallel"))]
        let (count, index) = ctx.best_in_range(0, total);

        let flat = decode_assignment(index, self.num_vertices(), self.alphabet);
        Ok(CspSolution {
            assignment: self.assignment_from_flat(&flat),
            satisfied: count,
        })
    }

    /// Single-threaded [`solve_exact`](Self::solve_exact); kept public so
    /// benches can compare it against the parallel path.
    pub fn solve_exact_seq(&self, cap: Option<u64>) -> Result<CspSolution, CspError> {
        let cap = cap.unwrap_or(DEFAULT_ENUM_CAP);
        let total = self.enum_space(cap)?;
        let ctx = self.eval_ctx();
        let (count, index) = ctx.best_in_range(0, total);
        let flat = decode_assignment(index, self.num_vertices(), self.alphabet);
        Ok(CspSolution {
            assignment: self.assignment_from_flat(&flat),
            satisfied: count,
        })
    }
}

/// Prefer higher count; among equals prefer the smaller (earlier, hence
/// lexicographically smaller) assignment index.
fn better(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// Digits of `index` base R, most significant digit = vertex 0, so index
/// order equals lexicographic order on label vectors.
fn decode_assignment(index: u64, n: usize, alphabet: u32) -> Vec<u32> {
    let r = alphabet as u64;
    let mut flat = vec![0u32; n];
    let mut rest = index;
    for slot in (0..n).rev() {
        flat[slot] = (rest % r) as u32;
        rest /= r;
    }
    flat
}

struct EvalCtx<'a> {
    inst: &'a CspInstance,
    scopes: Vec<Vec<usize>>,
}

impl EvalCtx<'_> {
    fn count_satisfied(&self, flat: &[u32], tuple: &mut [u32]) -> u64 {
        let mut count = 0;
        for (c, scope) in self.inst.constraints.iter().zip(&self.scopes) {
            for (slot, &g) in scope.iter().enumerate() {
                tuple[slot] = flat[g];
            }
            if c.is_satisfied_by(tuple) {
                count += 1;
            }
        }
        count
    }

    /// Best assignment in `[start, end)`; returns `(count, index)` of the
    /// first maximizer.
    fn best_in_range(&self, start: u64, end: u64) -> (u64, u64) {
        let n = self.inst.num_vertices();
        let r = self.inst.alphabet;
        let mut flat = decode_assignment(start, n, r);
        let mut tuple = vec![0u32; self.inst.k];
        let mut best = (self.count_satisfied(&flat, &mut tuple), start);
        for index in start + 1..end {
            // odometer increment of the flat label vector
            for slot in (0..n).rev() {
                if flat[slot] + 1 < r {
                    flat[slot] += 1;
                    break;
                }
                flat[slot] = 0;
            }
            let count = self.count_satisfied(&flat, &mut tuple);
            if count > best.0 {
                best = (count, index);
            }
        }
        best
    }
}

fn regular_scaffold(
    k: usize,
    n_per_part: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<VertexRef>> {
    // Each part contributes every vertex d times; shuffling each list and
    // reading column j across parts yields a d-regular k-partite multigraph.
    let mut lists: Vec<Vec<usize>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut slots: Vec<usize> = (0..n_per_part).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        slots.shuffle(rng);
        lists.push(slots);
    }
    let m = n_per_part * d;
    (0..m)
        .map(|j| {
            (0..k)
                .map(|p| VertexRef::new(p, lists[p][j]))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn density_parts(density: Rational64) -> Result<(u64, u64), CspError> {
    if density < Rational64::new(0, 1) || density > Rational64::new(1, 1) {
        return Err(CspError::InvalidDensity);
    }
    Ok((*density.numer() as u64, *density.denom() as u64))
}

fn tuple_space(alphabet: u32, k: usize) -> Result<u64, CspError> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total
            .checked_mul(alphabet as u64)
            .filter(|&t| t <= GEN_TUPLE_CAP)
            .ok_or(CspError::TooLarge {
                alphabet,
                vertices: k,
                cap: GEN_TUPLE_CAP,
            })?;
    }
    Ok(total)
}

fn decode_tuple(mut index: u64, k: usize, alphabet: u32) -> Vec<u32> {
    let r = alphabet as u64;
    let mut tuple = vec![0u32; k];
    for slot in (0..k).rev() {
        tuple[slot] = (index % r) as u32;
        index /= r;
    }
    tuple
}

/// Seeded d-regular k-partite instance with i.i.d. satisfying tuples.
///
/// Every part has `n_per_part` vertices and every vertex appears in exactly
/// `d` constraints (a multigraph, so scopes may repeat). Each of the `R^k`
/// tuples enters each constraint's satisfying set independently with
/// probability `sat_density`.
pub fn gen_random_regular(
    k: usize,
    alphabet: u32,
    d: usize,
    n_per_part: usize,
    sat_density: Rational64,
    seed: u64,
) -> Result<CspInstance, CspError> {
    if n_per_part == 0 || d == 0 {
        return Err(CspError::InfeasibleDegree);
    }
    let (num, den) = density_parts(sat_density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scopes = regular_scaffold(k, n_per_part, d, &mut rng);

    let mut constraints = Vec::with_capacity(scopes.len());
    if num == 0 {
        for (id, scope) in scopes.into_iter().enumerate() {
            constraints.push(Constraint::new(id, scope, Vec::new()));
        }
    } else {
        let tuples = tuple_space(alphabet, k)?;
        for (id, scope) in scopes.into_iter().enumerate() {
            let mut sat = Vec::new();
            for t in 0..tuples {
                if rng.gen_range(0..den) < num {
                    sat.push(decode_tuple(t, k, alphabet));
                }
            }
            constraints.push(Constraint::new(id, scope, sat));
        }
    }
    CspInstance::new(k, alphabet, vec![n_per_part; k], constraints)
}

/// Seeded d-regular k-partite instance together with an assignment that
/// satisfies every constraint. Each constraint's satisfying set contains the
/// planted tuple plus every other tuple independently with probability 1/2.
pub fn gen_planted(
    k: usize,
    alphabet: u32,
    d: usize,
    n_per_part: usize,
    seed: u64,
) -> Result<(CspInstance, Assignment), CspError> {
    if n_per_part == 0 || d == 0 {
        return Err(CspError::InfeasibleDegree);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scopes = regular_scaffold(k, n_per_part, d, &mut rng);

    let labels: Vec<Vec<u32>> = (0..k)
        .map(|_| (0..n_per_part).map(|_| rng.gen_range(0..alphabet)).collect())
        .collect();
    let planted = Assignment { labels };

    let tuples = tuple_space(alphabet, k)?;
    let mut constraints = Vec::with_capacity(scopes.len());
    for (id, scope) in scopes.into_iter().enumerate() {
        let witness: Vec<u32> = scope.iter().map(|&v| planted.label(v)).collect();
        let mut sat = vec![witness.clone()];
        for t in 0..tuples {
            let tuple = decode_tuple(t, k, alphabet);
            if tuple != witness && rng.gen_range(0..2u32) == 0 {
                sat.push(tuple);
            }
        }
        constraints.push(Constraint::new(id, scope, sat));
    }
    let inst = CspInstance::new(k, alphabet, vec![n_per_part; k], constraints)?;
    Ok((inst, planted))
}

// ---------------------------------------------------------------------------
// Text format
//
//   csp <k> <R> <m>
//   parts <n_1> ... <n_k>
//   con <id> <p_1>:<i_1> ... <p_k>:<i_k> <t>
//   sat <l_1> ... <l_k>        (t lines)
//
// Blank lines and lines starting with '#' are ignored.
// ---------------------------------------------------------------------------

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
        }
    }

    /// Next meaningful line as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.iter.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some((i + 1, line.split_whitespace().collect()));
        }
        None
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> CspError {
    CspError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, CspError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what}: {tok:?}")))
}

impl CspInstance {
    pub fn from_text(text: &str) -> Result<Self, CspError> {
        let mut lines = Lines::new(text);

        let (ln, head) = lines
            .next_tokens()
            .ok_or_else(|| parse_err(0, "empty input"))?;
        if head.len() != 4 || head[0] != "csp" {
            return Err(parse_err(ln, "expected header `csp <k> <R> <m>`"));
        }
        let k: usize = parse_num(head[1], ln, "arity")?;
        let alphabet: u32 = parse_num(head[2], ln, "alphabet")?;
        let m: usize = parse_num(head[3], ln, "constraint count")?;

        let (ln, ptoks) = lines
            .next_tokens()
            .ok_or_else(|| parse_err(ln, "missing parts line"))?;
        if ptoks.len() != k + 1 || ptoks[0] != "parts" {
            return Err(parse_err(ln, format!("expected `parts` with {k} sizes")));
        }
        let parts: Vec<usize> = ptoks[1..]
            .iter()
            .map(|t| parse_num(t, ln, "part size"))
            .collect::<Result<_, _>>()?;

        let mut slots: Vec<Option<Constraint>> = vec![None; m];
        for _ in 0..m {
            let (ln, ctoks) = lines
                .next_tokens()
                .ok_or_else(|| parse_err(0, "unexpected end of input: missing con line"))?;
            if ctoks.len() != k + 3 || ctoks[0] != "con" {
                return Err(parse_err(
                    ln,
                    format!("expected `con <id> <{k} vertex refs> <t>`"),
                ));
            }
            let id: usize = parse_num(ctoks[1], ln, "constraint id")?;
            if id >= m {
                return Err(parse_err(ln, format!("constraint id {id} out of range")));
            }
            if slots[id].is_some() {
                return Err(parse_err(ln, format!("duplicate constraint id {id}")));
            }
            let mut scope = Vec::with_capacity(k);
            for tok in &ctoks[2..2 + k] {
                let (p, i) = tok
                    .split_once(':')
                    .ok_or_else(|| parse_err(ln, format!("expected part:index, got {tok:?}")))?;
                let part: usize = parse_num(p, ln, "part")?;
                let index: usize = parse_num(i, ln, "vertex index")?;
                if part >= k || index >= parts[part] {
                    return Err(parse_err(ln, format!("vertex {part}:{index} out of range")));
                }
                scope.push(VertexRef::new(part, index));
            }
            let t: usize = parse_num(ctoks[2 + k], ln, "tuple count")?;
            let mut sat = Vec::with_capacity(t);
            for _ in 0..t {
                let (ln, stoks) = lines
                    .next_tokens()
                    .ok_or_else(|| parse_err(0, "unexpected end of input: missing sat line"))?;
                if stoks.len() != k + 1 || stoks[0] != "sat" {
                    return Err(parse_err(ln, format!("expected `sat` with {k} labels")));
                }
                let tuple: Vec<u32> = stoks[1..]
                    .iter()
                    .map(|t| parse_num::<u32>(t, ln, "label"))
                    .collect::<Result<_, _>>()?;
                if let Some(&bad) = tuple.iter().find(|&&l| l >= alphabet) {
                    return Err(parse_err(ln, format!("label {bad} out of range 0..{alphabet}")));
                }
                sat.push(tuple);
            }
            let constraint = Constraint::new(id, scope, sat);
            if constraint.sat().len() != t {
                return Err(parse_err(ln, format!("constraint {id} has duplicate sat tuples")));
            }
            slots[id] = Some(constraint);
        }
        if let Some((ln, _)) = lines.next_tokens() {
            return Err(parse_err(ln, "trailing content after last constraint"));
        }
        let constraints = slots
            .into_iter()
            .map(|s| s.ok_or_else(|| parse_err(0, "missing constraint id")))
            .collect::<Result<Vec<_>, _>>()?;
        CspInstance::new(k, alphabet, parts, constraints)
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "csp {} {} {}",
            self.k,
            self.alphabet,
            self.constraints.len()
        )
        .unwrap();
        let sizes: Vec<String> = self.parts.iter().map(|n| n.to_string()).collect();
        writeln!(out, "parts {}", sizes.join(" ")).unwrap();
        for c in &self.constraints {
            let scope: Vec<String> = c
                .scope
                .iter()
                .map(|v| format!("{}:{}", v.part, v.index))
                .collect();
            writeln!(out, "con {} {} {}", c.id, scope.join(" "), c.sat().len()).unwrap();
            for t in c.sat() {
                let labels: Vec<String> = t.iter().map(|l| l.to_string()).collect();
                writeln!(out, "sat {}", labels.join(" ")).unwrap();
            }
        }
        out
    }
}
