//! Set-packing / k-dimensional-matching instances and their solvers.
//!
//! An instance is a hypergraph given by a vertex count and a list of
//! hyperedges (sorted vertex-id sets). An optional partition of the vertex
//! set marks the dimensional-matching case: the instance is p-partite when
//! every edge meets every part exactly once. The exact solver is a
//! branch-and-bound over edges in id order with a node budget; `greedy`
//! gives a seeded maximal-matching baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackingError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("unknown edge id {0}")]
    UnknownEdgeId(usize),
    #[error("branch-and-bound node budget {0} exceeded")]
    BudgetExceeded(u64),
    #[error("instance declares no vertex partition")]
    NoPartitionDeclared,
    #[error("edge {edge} does not meet every part exactly once")]
    PartiteViolation { edge: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Default node budget for [`SetPackingInstance::solve_exact`].
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// A set of pairwise-disjoint hyperedges, stored as sorted edge ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub edge_ids: Vec<usize>,
}

impl Matching {
    pub fn new(mut edge_ids: Vec<usize>) -> Self {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        Matching { edge_ids }
    }

    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPackingInstance {
    num_vertices: usize,
    /// Each edge is a strictly ascending vertex-id list.
    edges: Vec<Vec<usize>>,
    /// Disjoint vertex sets covering `0..num_vertices`, when declared.
    partition: Option<Vec<Vec<usize>>>,
}

impl SetPackingInstance {
    pub fn new(
        num_vertices: usize,
        edges: Vec<Vec<usize>>,
        partition: Option<Vec<Vec<usize>>>,
    ) -> Result<Self, PackingError> {
        let mut norm_edges = Vec::with_capacity(edges.len());
        for (id, mut e) in edges.into_iter().enumerate() {
            if e.is_empty() {
                return Err(PackingError::Malformed(format!("edge {id} is empty")));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(PackingError::Malformed(format!(
                    "edge {id} repeats a vertex"
                )));
            }
            if *e.last().unwrap() >= num_vertices {
                return Err(PackingError::Malformed(format!(
                    "edge {id} references vertex {} out of range",
                    e.last().unwrap()
                )));
            }
            norm_edges.push(e);
        }
        if let Some(parts) = &partition {
            let mut owner = vec![usize::MAX; num_vertices];
            for (p, part) in parts.iter().enumerate() {
                for &v in part {
                    if v >= num_vertices {
                        return Err(PackingError::Malformed(format!(
                            "partition part {p} references vertex {v} out of range"
                        )));
                    }
                    if owner[v] != usize::MAX {
                        return Err(PackingError::Malformed(format!(
                            "vertex {v} appears in parts {} and {p}",
                            owner[v]
                        )));
                    }
                    owner[v] = p;
                }
            }
            if let Some(v) = owner.iter().position(|&p| p == usize::MAX) {
                return Err(PackingError::Malformed(format!(
                    "vertex {v} missing from the partition"
                )));
            }
        }
        Ok(SetPackingInstance {
            num_vertices,
            edges: norm_edges,
            partition,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn partition(&self) -> Option<&[Vec<usize>]> {
        self.partition.as_deref()
    }

    /// Largest edge cardinality (the `k` of "k-set packing"); 0 if edgeless.
    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn check_ids(&self, m: &Matching) -> Result<(), PackingError> {
        match m.edge_ids.iter().find(|&&id| id >= self.edges.len()) {
            Some(&id) => Err(PackingError::UnknownEdgeId(id)),
            None => Ok(()),
        }
    }

    /// True iff the referenced edges are pairwise disjoint.
    pub fn validate_matching(&self, m: &Matching) -> Result<bool, PackingError> {
        self.check_ids(m)?;
        let mut used = vec![false; self.num_vertices];
        for &id in &m.edge_ids {
            for &v in &self.edges[id] {
                if used[v] {
                    return Ok(false);
                }
                used[v] = true;
            }
        }
        Ok(true)
    }

    /// Maximum matching by branch-and-bound over edges in id order,
    /// include-branch first, pruned by the count of still-compatible edges.
    /// Visiting a node costs one unit of `budget` (default
    /// [`DEFAULT_NODE_BUDGET`]). The include-first order makes the returned
    /// matching the lexicographically smallest maximizer by sorted edge ids.
    pub fn solve_exact(&self, budget: Option<u64>) -> Result<Matching, PackingError> {
        let budget = budget.unwrap_or(DEFAULT_NODE_BUDGET);
        let mut search = Search {
            inst: self,
            nodes: 0,
            budget,
            best: Vec::new(),
            chosen: Vec::new(),
            used: vec![false; self.num_vertices],
        };
        // Candidate list shrinks as the recursion deepens; start with all.
        let all: Vec<usize> = (0..self.edges.len()).collect();
        search.explore(&all)?;
        Ok(Matching::new(search.best))
    }

    /// Maximal matching grown by scanning the edges in a seeded random
    /// order. Always valid; never larger than the exact optimum.
    pub fn greedy(&self, seed: u64) -> Matching {
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut used = vec![false; self.num_vertices];
        let mut picked = Vec::new();
        for id in order {
            if self.edges[id].iter().all(|&v| !used[v]) {
                for &v in &self.edges[id] {
                    used[v] = true;
                }
                picked.push(id);
            }
        }
        Matching::new(picked)
    }

    /// Check the declared partition: every edge must meet every part
    /// exactly once. Returns the number of parts on success.
    pub fn is_partite(&self) -> Result<usize, PackingError> {
        let parts = self
            .partition
            .as_ref()
            .ok_or(PackingError::NoPartitionDeclared)?;
        let mut owner = vec![usize::MAX; self.num_vertices];
        for (p, part) in parts.iter().enumerate() {
            for &v in part {
                owner[v] = p;
            }
        }
        let mut hits = vec![0usize; parts.len()];
        for (id, edge) in self.edges.iter().enumerate() {
            hits.iter_mut().for_each(|h| *h = 0);
            for &v in edge {
                hits[owner[v]] += 1;
            }
            if hits.iter().any(|&h| h != 1) {
                return Err(PackingError::PartiteViolation { edge: id });
            }
        }
        Ok(parts.len())
    }
}

struct Search<'a> {
    inst: &'a SetPackingInstance,
    nodes: u64,
    budget: u64,
    best: Vec<usize>,
    chosen: Vec<usize>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn explore(&mut self, candidates: &[usize]) -> Result<(), PackingError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(PackingError::BudgetExceeded(self.budget));
        }
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        // Admissible bound: no extension can add more than all remaining
        // compatible candidates.
        if self.chosen.len() + candidates.len() <= self.best.len() {
            return Ok(());
        }
        for (pos, &id) in candidates.iter().enumerate() {
            if self.inst.edges[id].iter().any(|&v| self.used[v]) {
                continue;
            }
            for &v in &self.inst.edges[id] {
                self.used[v] = true;
            }
            self.chosen.push(id);
            let rest: Vec<usize> = candidates[pos + 1..]
                .iter()
                .copied()
                .filter(|&j| self.inst.edges[j].iter().all(|&v| !self.used[v]))
                .collect();
            self.explore(&rest)?;
            self.chosen.pop();
            for &v in &self.inst.edges[id] {
                self.used[v] = false;
            }
        }
        Ok(())
    }
}

/// Independent oracle for tests: maximum matching by enumerating all edge
/// subsets. Only for instances with at most `max_edges` edges (≤ 20).
pub fn max_matching_by_enumeration(
    inst: &SetPackingInstance,
    max_edges: usize,
) -> Option<usize> {
    let m = inst.num_edges();
    if m > max_edges || max_edges > 20 {
        return None;
    }
    let mut best = 0usize;
    'subsets: for mask in 0u32..(1 << m) {
        let ids: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let mut used = vec![false; inst.num_vertices()];
        for &id in &ids {
            for &v in &inst.edges()[id] {
                if used[v] {
                    continue 'subsets;
                }
                used[v] = true;
            }
        }
        best = best.max(ids.len());
    }
    Some(best)
}

// ---------------------------------------------------------------------------
// Text format
//
//   sp <num_vertices> <num_edges>
//   parts <P> <size_1> ... <size_P>    (optional; contiguous blocks)
//   edge <id> <v_1> ... <v_j>
//
// The parts line assigns vertices 0..n−1 to parts in contiguous blocks, so it
// is written only when the in-memory partition is itself a run of contiguous
// blocks; other partitions survive in memory only.
// ---------------------------------------------------------------------------

fn parse_err(line: usize, msg: impl Into<String>) -> PackingError {
    PackingError::Parse {
        line,
        msg: msg.into(),
    }
}

impl SetPackingInstance {
    /// The partition as contiguous block sizes, if it has that shape.
    fn contiguous_part_sizes(&self) -> Option<Vec<usize>> {
        let parts = self.partition.as_ref()?;
        let mut next = 0usize;
        let mut sizes = Vec::with_capacity(parts.len());
        for part in parts {
            let mut sorted = part.clone();
            sorted.sort_unstable();
            if sorted
                .iter()
                .enumerate()
                .any(|(off, &v)| v != next + off)
            {
                return None;
            }
            next += sorted.len();
            sizes.push(sorted.len());
        }
        (next == self.num_vertices).then_some(sizes)
    }

    pub fn from_text(text: &str) -> Result<Self, PackingError> {
        let mut next_tokens = {
            let mut iter = text.lines().enumerate();
            move || -> Option<(usize, Vec<&str>)> {
                for (i, raw) in iter.by_ref() {
                    let line = raw.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    return Some((i + 1, line.split_whitespace().collect()));
                }
                None
            }
        };
        let parse_usize = |tok: &str, line: usize, what: &str| -> Result<usize, PackingError> {
            tok.parse()
                .map_err(|_| parse_err(line, format!("invalid {what}: {tok:?}")))
        };

        let (ln, head) = next_tokens().ok_or_else(|| parse_err(0, "empty input"))?;
        if head.len() != 3 || head[0] != "sp" {
            return Err(parse_err(ln, "expected header `sp <num_vertices> <num_edges>`"));
        }
        let nv = parse_usize(head[1], ln, "vertex count")?;
        let ne = parse_usize(head[2], ln, "edge count")?;

        let mut partition = None;
        let mut pending: Option<(usize, Vec<&str>)> = next_tokens();
        if let Some((ln, toks)) = &pending {
            if toks.first() == Some(&"parts") {
                let ln = *ln;
                if toks.len() < 2 {
                    return Err(parse_err(ln, "expected `parts <P> <sizes...>`"));
                }
                let p = parse_usize(toks[1], ln, "part count")?;
                if toks.len() != 2 + p {
                    return Err(parse_err(ln, format!("expected {p} part sizes")));
                }
                let sizes: Vec<usize> = toks[2..]
                    .iter()
                    .map(|t| parse_usize(t, ln, "part size"))
                    .collect::<Result<_, _>>()?;
                if sizes.iter().sum::<usize>() != nv {
                    return Err(parse_err(ln, "part sizes do not sum to the vertex count"));
                }
                let mut next = 0usize;
                partition = Some(
                    sizes
                        .iter()
                        .map(|&s| {
                            let block: Vec<usize> = (next..next + s).collect();
                            next += s;
                            block
                        })
                        .collect::<Vec<_>>(),
                );
                pending = next_tokens();
            }
        }

        let mut slots: Vec<Option<Vec<usize>>> = vec![None; ne];
        for _ in 0..ne {
            let (ln, toks) = pending
                .take()
                .ok_or_else(|| parse_err(0, "unexpected end of input: missing edge line"))?;
            if toks.len() < 3 || toks[0] != "edge" {
                return Err(parse_err(ln, "expected `edge <id> <v...>`"));
            }
            let id = parse_usize(toks[1], ln, "edge id")?;
            if id >= ne {
                return Err(parse_err(ln, format!("edge id {id} out of range")));
            }
            if slots[id].is_some() {
                return Err(parse_err(ln, format!("duplicate edge id {id}")));
            }
            let vs: Vec<usize> = toks[2..]
                .iter()
                .map(|t| parse_usize(t, ln, "vertex id"))
                .collect::<Result<_, _>>()?;
            if let Some(&v) = vs.iter().find(|&&v| v >= nv) {
                return Err(parse_err(ln, format!("vertex {v} out of range")));
            }
            slots[id] = Some(vs);
            pending = next_tokens();
        }
        if let Some((ln, _)) = pending {
            return Err(parse_err(ln, "trailing content after last edge"));
        }
        let edges = slots
            .into_iter()
            .map(|s| s.ok_or_else(|| parse_err(0, "missing edge id")))
            .collect::<Result<Vec<_>, _>>()?;
        SetPackingInstance::new(nv, edges, partition)
            .map_err(|e| parse_err(0, e.to_string()))
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "sp {} {}", self.num_vertices, self.edges.len()).unwrap();
        if let Some(sizes) = self.contiguous_part_sizes() {
            let sizes_s: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
            writeln!(out, "parts {} {}", sizes.len(), sizes_s.join(" ")).unwrap();
        }
        for (id, e) in self.edges.iter().enumerate() {
            let vs: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            writeln!(out, "edge {} {}", id, vs.join(" ")).unwrap();
        }
        out
    }
}
