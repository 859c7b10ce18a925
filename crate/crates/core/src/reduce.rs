//! Reduction from R-degree-bounded k-CSPs over a prime alphabet R to
//! kR-set packing (kR-dimensional matching when the CSP is k-partite).
//!
//! Every variable gets a gadget on its own R×R grid (see [`crate::gadget`]).
//! Every pair (constraint C, satisfying tuple t) becomes one hyperedge: for
//! each scope position j with variable v and label t_j, the hyperedge
//! absorbs the gadget line of slope t_j in the intercept slot C owns inside
//! v's gadget. Hyperedges of one constraint pairwise intersect (same slot,
//! different slopes), and hyperedges of different constraints on a shared
//! variable agree on at most one slope per gadget — so maximum matchings
//! correspond exactly to maximizing assignments, which
//! [`ReducedInstance::assignment_to_matching`] and
//! [`ReducedInstance::matching_to_assignment`] make constructive.
//!
//! Vertex numbering is pinned for byte-exact serialization: grid point
//! (x, y) of the variable with global index g has id `g·R² + x·R + y`;
//! global variable order is part-major.

use crate::csp::{Assignment, CspInstance};
use crate::ff;
use crate::gadget::{build_gadget, GadgetError, VariableGadget};
use crate::packing::{Matching, PackingError, SetPackingInstance};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error("alphabet size {0} is not prime")]
    NonPrimeAlphabet(u32),
    #[error("vertex {part}:{index} has degree {degree} > alphabet size {alphabet}")]
    DegreeExceedsAlphabet {
        part: usize,
        index: usize,
        degree: usize,
        alphabet: u32,
    },
    #[error("constraint {constraint} references the same vertex twice")]
    RepeatedVertexInScope { constraint: usize },
    #[error("constraint {constraint} has a satisfying label outside the alphabet")]
    LabelOutOfRange { constraint: usize },
    #[error("source CSP is not k-partite; no kR-part partition exists")]
    NotPartite,
    #[error("edge set is not a matching")]
    NotAMatching,
    #[error("unknown edge id {0}")]
    UnknownEdgeId(usize),
    #[error("assignment shape does not match the source instance")]
    AssignmentShape,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl From<GadgetError> for ReduceError {
    fn from(_: GadgetError) -> Self {
        ReduceError::NotAMatching
    }
}

/// The packing instance produced by [`reduce_to_packing`] together with
/// everything needed to translate between the two worlds: the source CSP,
/// per-variable gadgets, and the hyperedge ↔ (constraint, tuple) map.
#[derive(Debug, Clone)]
pub struct ReducedInstance {
    source: CspInstance,
    packing: SetPackingInstance,
    gadgets: Vec<VariableGadget>,
    /// Hyperedge id → (constraint id, satisfying tuple).
    edge_info: Vec<(usize, Vec<u32>)>,
    /// Constraint id → first hyperedge id (prefix sums, length m+1).
    edge_offsets: Vec<usize>,
    part_offsets: Vec<usize>,
}

fn check_preconditions(inst: &CspInstance) -> Result<Vec<Vec<usize>>, ReduceError> {
    let r = inst.alphabet();
    if !ff::is_prime(r as u64) {
        return Err(ReduceError::NonPrimeAlphabet(r));
    }
    let offsets = inst.part_offsets();
    // incident constraint ids per global variable
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); inst.num_vertices()];
    for c in inst.constraints() {
        let mut seen: Vec<usize> = c.scope.iter().map(|v| offsets[v.part] + v.index).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ReduceError::RepeatedVertexInScope { constraint: c.id });
        }
        if c.sat().iter().any(|t| t.iter().any(|&l| l >= r)) {
            return Err(ReduceError::LabelOutOfRange { constraint: c.id });
        }
        for v in &c.scope {
            incident[offsets[v.part] + v.index].push(c.id);
        }
    }
    for (g, ids) in incident.iter().enumerate() {
        if ids.len() as u64 > r as u64 {
            let part = offsets.iter().rposition(|&off| off <= g).unwrap();
            return Err(ReduceError::DegreeExceedsAlphabet {
                part,
                index: g - offsets[part],
                degree: ids.len(),
                alphabet: r,
            });
        }
    }
    Ok(incident)
}

fn hyperedge_for(
    inst: &CspInstance,
    gadgets: &[VariableGadget],
    part_offsets: &[usize],
    cid: usize,
    tuple: &[u32],
) -> Vec<usize> {
    let r = inst.alphabet() as usize;
    let r_sq = r * r;
    let mut vertices = Vec::with_capacity(inst.arity() * r);
    for (j, v) in inst.constraints()[cid].scope.iter().enumerate() {
        let g = part_offsets[v.part] + v.index;
        let gadget = &gadgets[g];
        let slot = gadget
            .slot_of(cid)
            .expect("constraint is incident to its scope variables");
        for &(x, y) in &gadget.edge(tuple[j] as u64, slot).points {
            vertices.push(g * r_sq + x as usize * r + y as usize);
        }
    }
    vertices.sort_unstable();
    vertices
}

fn build_reduced(inst: &CspInstance, parallel: bool) -> Result<ReducedInstance, ReduceError> {
    let incident = check_preconditions(inst)?;
    let r = inst.alphabet() as usize;
    let part_offsets = inst.part_offsets();

    let gadgets: Vec<VariableGadget> = incident
        .iter()
        .map(|ids| build_gadget(inst.alphabet() as u64, ids).expect("preconditions checked"))
        .collect();

    let mut edge_info = Vec::new();
    let mut edge_offsets = Vec::with_capacity(inst.num_constraints() + 1);
    edge_offsets.push(0);
    for c in inst.constraints() {
        for t in c.sat() {
            edge_info.push((c.id, t.clone()));
        }
        edge_offsets.push(edge_info.len());
    }

    let materialize = |(cid, tuple): &(usize, Vec<u32>)| {
        hyperedge_for(inst, &gadgets, &part_offsets, *cid, tuple)
    };
    #[cfg(feature = "parallel")]
    let edges: Vec<Vec<usize>> = if parallel {
        edge_info.par_iter().map(materialize).collect()
    } else {
        edge_info.iter().map(materialize).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let edges: Vec<Vec<usize>> = {
        let _ = parallel;
        edge_info.iter().map(materialize).collect()
    };

    let num_vertices = inst.num_vertices() * r * r;
    let partition = inst.validate().is_partite().then(|| {
        let mut parts = Vec::with_capacity(inst.arity() * r);
        for (i, &n_i) in inst.parts().iter().enumerate() {
            for x in 0..r {
                let mut part = Vec::with_capacity(n_i * r);
                for v in 0..n_i {
                    let g = part_offsets[i] + v;
                    let base = g * r * r + x * r;
                    part.extend(base..base + r);
                }
                parts.push(part);
            }
        }
        parts
    });

    let packing = SetPackingInstance::new(num_vertices, edges, partition)
        .expect("construction yields in-range, duplicate-free edges");
    Ok(ReducedInstance {
        source: inst.clone(),
        packing,
        gadgets,
        edge_info,
        edge_offsets,
        part_offsets,
    })
}

/// Reduce a CSP to its packing instance. Requires a prime alphabet, labels
/// inside the alphabet, pairwise-distinct scope vertices, and every vertex
/// degree at most R. Parallelizes hyperedge materialization under the
/// `parallel` feature; output is identical either way.
pub fn reduce_to_packing(inst: &CspInstance) -> Result<ReducedInstance, ReduceError> {
    build_reduced(inst, true)
}

/// Single-threaded [`reduce_to_packing`], kept public for bench comparison.
pub fn reduce_to_packing_seq(inst: &CspInstance) -> Result<ReducedInstance, ReduceError> {
    build_reduced(inst, false)
}

impl ReducedInstance {
    pub fn source(&self) -> &CspInstance {
        &self.source
    }

    pub fn packing(&self) -> &SetPackingInstance {
        &self.packing
    }

    pub fn gadgets(&self) -> &[VariableGadget] {
        &self.gadgets
    }

    /// The (constraint id, satisfying tuple) behind a hyperedge.
    pub fn edge_source(&self, edge_id: usize) -> Option<(usize, &[u32])> {
        self.edge_info
            .get(edge_id)
            .map(|(c, t)| (*c, t.as_slice()))
    }

    /// The hyperedge of a (constraint, satisfying tuple) pair.
    pub fn edge_of(&self, constraint_id: usize, tuple: &[u32]) -> Option<usize> {
        let c = self.source.constraints().get(constraint_id)?;
        let rank = c
            .sat()
            .binary_search_by(|t| t.as_slice().cmp(tuple))
            .ok()?;
        Some(self.edge_offsets[constraint_id] + rank)
    }

    pub fn num_variables(&self) -> usize {
        self.source.num_vertices()
    }

    /// Decompose a packing vertex id into (global variable, x, y).
    pub fn vertex_info(&self, vertex_id: usize) -> (usize, u64, u64) {
        let r = self.source.alphabet() as usize;
        (
            vertex_id / (r * r),
            (vertex_id % (r * r) / r) as u64,
            (vertex_id % r) as u64,
        )
    }

    pub fn vertex_id(&self, variable: usize, x: u64, y: u64) -> usize {
        let r = self.source.alphabet() as usize;
        variable * r * r + x as usize * r + y as usize
    }

    /// The matching encoding an assignment: one hyperedge per satisfied
    /// constraint, namely the edge of (C, ψ restricted to C's scope).
    pub fn assignment_to_matching(&self, psi: &Assignment) -> Result<Matching, ReduceError> {
        let satisfied = self
            .source
            .satisfied_set(psi)
            .map_err(|_| ReduceError::AssignmentShape)?;
        let ids = satisfied
            .into_iter()
            .map(|cid| {
                let tuple: Vec<u32> = self.source.constraints()[cid]
                    .scope
                    .iter()
                    .map(|v| psi.label(*v))
                    .collect();
                self.edge_of(cid, &tuple)
                    .expect("satisfied constraints have a mapped edge")
            })
            .collect();
        Ok(Matching::new(ids))
    }

    /// Decode a matching into an assignment: each variable whose gadget is
    /// touched gets the single color its matched lines use; untouched
    /// variables default to label 0. The result satisfies at least |M|
    /// constraints.
    pub fn matching_to_assignment(&self, m: &Matching) -> Result<Assignment, ReduceError> {
        match self.packing.validate_matching(m) {
            Ok(true) => {}
            Ok(false) => return Err(ReduceError::NotAMatching),
            Err(PackingError::UnknownEdgeId(id)) => return Err(ReduceError::UnknownEdgeId(id)),
            Err(_) => return Err(ReduceError::NotAMatching),
        }
        let mut lines_by_var: Vec<Vec<usize>> = vec![Vec::new(); self.num_variables()];
        for &edge_id in &m.edge_ids {
            let (cid, tuple) = &self.edge_info[edge_id];
            for (j, v) in self.source.constraints()[*cid].scope.iter().enumerate() {
                let g = self.part_offsets[v.part] + v.index;
                let gadget = &self.gadgets[g];
                let slot = gadget.slot_of(*cid).expect("incident constraint");
                lines_by_var[g].push(tuple[j] as usize * gadget.degree() + slot);
            }
        }
        let mut psi = Assignment::zeros(&self.source);
        for (i, &n_i) in self.source.parts().iter().enumerate() {
            for v in 0..n_i {
                let g = self.part_offsets[i] + v;
                if let Some(color) = crate::gadget::matching_color(&self.gadgets[g], &lines_by_var[g])? {
                    psi.labels[i][v] = color as u32;
                }
            }
        }
        Ok(psi)
    }

    /// Labels (CSP part, grid column) of the kR partition parts, aligned
    /// with `packing().partition()`. Part (i, x) holds column x of every
    /// gadget grid of part i and has cardinality |V_i|·R.
    pub fn part_labels(&self) -> Result<Vec<(usize, u64)>, ReduceError> {
        if self.packing.partition().is_none() {
            return Err(ReduceError::NotPartite);
        }
        let r = self.source.alphabet() as u64;
        Ok((0..self.source.arity())
            .flat_map(|i| (0..r).map(move |x| (i, x)))
            .collect())
    }
}

// ---------------------------------------------------------------------------
// Map sidecar format
//
//   map <num_edges>
//   em <edge_id> <constraint_id> <l_1> ... <l_k>
//   vm <vertex_id> <variable_index> <x> <y>
//
// em lines cover every hyperedge, vm lines every packing vertex.
// ---------------------------------------------------------------------------

/// A parsed map sidecar, for consistency checks against a reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedMap {
    /// (edge id, constraint id, tuple), ascending by edge id.
    pub edge_entries: Vec<(usize, usize, Vec<u32>)>,
    /// (vertex id, variable, x, y), ascending by vertex id.
    pub vertex_entries: Vec<(usize, usize, u64, u64)>,
}

impl ReducedInstance {
    /// The canonical map entries this reduction would serialize.
    pub fn map_entries(&self) -> ParsedMap {
        let edge_entries = self
            .edge_info
            .iter()
            .enumerate()
            .map(|(id, (c, t))| (id, *c, t.clone()))
            .collect();
        let vertex_entries = (0..self.packing.num_vertices())
            .map(|vid| {
                let (g, x, y) = self.vertex_info(vid);
                (vid, g, x, y)
            })
            .collect();
        ParsedMap {
            edge_entries,
            vertex_entries,
        }
    }

    pub fn map_to_text(&self) -> String {
        use std::fmt::Write;
        let entries = self.map_entries();
        let mut out = String::new();
        writeln!(out, "map {}", entries.edge_entries.len()).unwrap();
        for (id, cid, tuple) in &entries.edge_entries {
            let labels: Vec<String> = tuple.iter().map(|l| l.to_string()).collect();
            writeln!(out, "em {} {} {}", id, cid, labels.join(" ")).unwrap();
        }
        for (vid, g, x, y) in &entries.vertex_entries {
            writeln!(out, "vm {} {} {} {}", vid, g, x, y).unwrap();
        }
        out
    }
}

pub fn parse_map(text: &str) -> Result<ParsedMap, ReduceError> {
    let err = |line: usize, msg: String| ReduceError::Parse { line, msg };
    let mut edge_entries = Vec::new();
    let mut vertex_entries = Vec::new();
    let mut declared: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |tok: &str, what: &str| -> Result<usize, ReduceError> {
            tok.parse()
                .map_err(|_| err(ln, format!("invalid {what}: {tok:?}")))
        };
        match toks[0] {
            "map" if declared.is_none() && toks.len() == 2 => {
                declared = Some(num(toks[1], "edge count")?);
            }
            "em" if toks.len() >= 4 => {
                let id = num(toks[1], "edge id")?;
                let cid = num(toks[2], "constraint id")?;
                let tuple = toks[3..]
                    .iter()
                    .map(|t| {
                        t.parse::<u32>()
                            .map_err(|_| err(ln, format!("invalid label: {t:?}")))
                    })
                    .collect::<Result<Vec<u32>, _>>()?;
                edge_entries.push((id, cid, tuple));
            }
            "vm" if toks.len() == 5 => {
                vertex_entries.push((
                    num(toks[1], "vertex id")?,
                    num(toks[2], "variable index")?,
                    num(toks[3], "x")? as u64,
                    num(toks[4], "y")? as u64,
                ));
            }
            _ => return Err(err(ln, format!("unrecognized line: {line:?}"))),
        }
    }
    let declared = declared.ok_or_else(|| err(0, "missing `map <num_edges>` header".into()))?;
    if edge_entries.len() != declared {
        return Err(err(
            0,
            format!(
                "header declares {declared} edges, found {}",
                edge_entries.len()
            ),
        ));
    }
    edge_entries.sort();
    vertex_entries.sort();
    if edge_entries.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(err(0, "duplicate edge id in em lines".into()));
    }
    if vertex_entries.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(err(0, "duplicate vertex id in vm lines".into()));
    }
    Ok(ParsedMap {
        edge_entries,
        vertex_entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{gen_planted, gen_random_regular, Constraint, CspError, VertexRef};
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn equality_instance() -> CspInstance {
        CspInstance::new(
            2,
            2,
            vec![1, 1],
            vec![Constraint::new(
                0,
                vec![VertexRef::new(0, 0), VertexRef::new(1, 0)],
                vec![vec![0, 0], vec![1, 1]],
            )],
        )
        .unwrap()
    }

    fn random_assignment(inst: &CspInstance, seed: u64) -> Assignment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut psi = Assignment::zeros(inst);
        for part in &mut psi.labels {
            for l in part {
                *l = rng.gen_range(0..inst.alphabet());
            }
        }
        psi
    }

    #[test]
    fn equality_example_structure() {
        let red = reduce_to_packing(&equality_instance()).unwrap();
        let p = red.packing();
        assert_eq!(p.num_vertices(), 8);
        assert_eq!(p.num_edges(), 2);
        assert!(p.edges().iter().all(|e| e.len() == 4));
        // both hyperedges contain grid point (0,0) of variable 0 (id 0)
        assert!(p.edges().iter().all(|e| e.contains(&0)));
        assert_eq!(p.edges()[0], vec![0, 2, 4, 6]); // tuple (0,0): slope-0 lines
        assert_eq!(p.edges()[1], vec![0, 3, 4, 7]); // tuple (1,1): slope-1 lines
        assert_eq!(p.solve_exact(None).unwrap().len(), 1);
        // 4 parts of size 2: (part, column) pairs over 2 parts × 2 columns
        assert_eq!(red.part_labels().unwrap().len(), 4);
        assert_eq!(p.is_partite(), Ok(4));
        assert!(p.partition().unwrap().iter().all(|part| part.len() == 2));
    }

    #[test]
    fn empty_sat_sets_give_no_edges() {
        let inst = CspInstance::new(
            2,
            2,
            vec![1, 1],
            vec![Constraint::new(
                0,
                vec![VertexRef::new(0, 0), VertexRef::new(1, 0)],
                Vec::<Vec<u32>>::new(),
            )],
        )
        .unwrap();
        let red = reduce_to_packing(&inst).unwrap();
        assert_eq!(red.packing().num_edges(), 0);
        assert_eq!(red.packing().num_vertices(), 8);
        // the empty constraint still owns intercept slot 0 in both gadgets
        assert_eq!(red.gadgets()[0].slot_of(0), Some(0));
    }

    #[test]
    fn edge_count_matches_sat_sizes() {
        for seed in 0..10 {
            let inst = gen_random_regular(2, 3, 2, 2, Rational64::new(1, 2), seed).unwrap();
            let red = reduce_to_packing(&inst).unwrap();
            let expected: usize = inst.constraints().iter().map(|c| c.sat().len()).sum();
            assert_eq!(red.packing().num_edges(), expected);
            assert_eq!(red.packing().num_vertices(), inst.num_vertices() * 9);
            let kr = inst.arity() * inst.alphabet() as usize;
            assert!(red.packing().edges().iter().all(|e| e.len() == kr));
        }
    }

    #[test]
    fn preconditions_rejected() {
        let inst = gen_random_regular(2, 4, 2, 2, Rational64::new(1, 2), 0).unwrap();
        assert_eq!(
            reduce_to_packing(&inst).unwrap_err(),
            ReduceError::NonPrimeAlphabet(4)
        );

        // degree 3 > R = 2
        let scope = |i| vec![VertexRef::new(0, 0), VertexRef::new(1, i)];
        let overloaded = CspInstance::new(
            2,
            2,
            vec![1, 3],
            (0..3)
                .map(|i| Constraint::new(i, scope(i), vec![vec![0, 0]]))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            reduce_to_packing(&overloaded).unwrap_err(),
            ReduceError::DegreeExceedsAlphabet {
                part: 0,
                index: 0,
                degree: 3,
                alphabet: 2
            }
        ));

        let repeated = CspInstance::new(
            2,
            2,
            vec![2, 1],
            vec![Constraint::new(
                0,
                vec![VertexRef::new(0, 0), VertexRef::new(0, 0)],
                vec![vec![0, 0]],
            )],
        )
        .unwrap();
        assert_eq!(
            reduce_to_packing(&repeated).unwrap_err(),
            ReduceError::RepeatedVertexInScope { constraint: 0 }
        );

        let bad_label = CspInstance::new(
            2,
            2,
            vec![1, 1],
            vec![Constraint::new(
                0,
                vec![VertexRef::new(0, 0), VertexRef::new(1, 0)],
                vec![vec![0, 5]],
            )],
        )
        .unwrap();
        assert_eq!(
            reduce_to_packing(&bad_label).unwrap_err(),
            ReduceError::LabelOutOfRange { constraint: 0 }
        );
    }

    #[test]
    fn assignment_matching_roundtrip_equality() {
        let red = reduce_to_packing(&equality_instance()).unwrap();
        let mut psi = Assignment::zeros(red.source());
        let m = red.assignment_to_matching(&psi).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.edge_ids, vec![0]);
        let decoded = red.matching_to_assignment(&m).unwrap();
        assert_eq!(decoded, psi);

        // non-satisfying assignment maps to the empty matching
        psi.labels[0][0] = 0;
        psi.labels[1][0] = 1;
        let m = red.assignment_to_matching(&psi).unwrap();
        assert!(m.is_empty());
        let decoded = red.matching_to_assignment(&m).unwrap();
        assert_eq!(decoded, Assignment::zeros(red.source())); // default 0s
    }

    #[test]
    fn roundtrip_on_random_instances() {
        for seed in 0..20 {
            let inst = gen_random_regular(2, 3, 3, 2, Rational64::new(1, 3), seed).unwrap();
            let red = reduce_to_packing(&inst).unwrap();
            let psi = random_assignment(&inst, seed ^ 0xabcd);
            let satisfied = inst.value(&psi).unwrap().satisfied;

            let m = red.assignment_to_matching(&psi).unwrap();
            assert_eq!(m.len() as u64, satisfied);
            assert!(red.packing().validate_matching(&m).unwrap());

            let decoded = red.matching_to_assignment(&m).unwrap();
            assert!(inst.value(&decoded).unwrap().satisfied >= satisfied);
        }
    }

    #[test]
    fn planted_assignment_gives_full_matching() {
        let (inst, planted) = gen_planted(2, 3, 3, 3, 17).unwrap();
        let red = reduce_to_packing(&inst).unwrap();
        let m = red.assignment_to_matching(&planted).unwrap();
        assert_eq!(m.len(), inst.num_constraints());
    }

    #[test]
    fn matching_to_assignment_rejects_non_matchings() {
        let red = reduce_to_packing(&equality_instance()).unwrap();
        assert_eq!(
            red.matching_to_assignment(&Matching::new(vec![0, 1])),
            Err(ReduceError::NotAMatching)
        );
        assert_eq!(
            red.matching_to_assignment(&Matching::new(vec![9])),
            Err(ReduceError::UnknownEdgeId(9))
        );
    }

    #[test]
    fn partition_present_iff_partite() {
        let partite = gen_random_regular(3, 3, 2, 2, Rational64::new(1, 2), 3).unwrap();
        let red = reduce_to_packing(&partite).unwrap();
        assert_eq!(red.packing().is_partite(), Ok(9));
        assert_eq!(red.part_labels().unwrap().len(), 9);

        let lopsided = CspInstance::new(
            2,
            2,
            vec![2, 1],
            vec![Constraint::new(
                0,
                vec![VertexRef::new(0, 0), VertexRef::new(0, 1)],
                vec![vec![0, 0]],
            )],
        )
        .unwrap();
        let red = reduce_to_packing(&lopsided).unwrap();
        assert!(red.packing().partition().is_none());
        assert_eq!(red.part_labels(), Err(ReduceError::NotPartite));
        // still a 4-uniform packing instance
        assert!(red.packing().edges().iter().all(|e| e.len() == 4));
    }

    #[test]
    fn vertex_numbering_is_pinned() {
        let red = reduce_to_packing(&equality_instance()).unwrap();
        assert_eq!(red.vertex_id(1, 1, 0), 6);
        assert_eq!(red.vertex_info(6), (1, 1, 0));
        for vid in 0..red.packing().num_vertices() {
            let (g, x, y) = red.vertex_info(vid);
            assert_eq!(red.vertex_id(g, x, y), vid);
        }
    }

    #[test]
    fn map_text_roundtrip() {
        let inst = gen_random_regular(2, 3, 2, 2, Rational64::new(1, 2), 21).unwrap();
        let red = reduce_to_packing(&inst).unwrap();
        let text = red.map_to_text();
        let parsed = parse_map(&text).unwrap();
        assert_eq!(parsed, red.map_entries());
    }

    #[test]
    fn map_parse_rejects_malformed() {
        assert!(parse_map("em 0 0 1 1\n").is_err()); // missing header
        assert!(parse_map("map 2\nem 0 0 1 1\n").is_err()); // count mismatch
        assert!(parse_map("map 1\nem 0 0 1 1\nem 0 0 0 0\n").is_err()); // dup id + count
        assert!(parse_map("map 0\nbogus\n").is_err());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        for seed in 0..5 {
            let inst = gen_random_regular(2, 5, 3, 2, Rational64::new(1, 4), seed).unwrap();
            let a = reduce_to_packing(&inst).unwrap();
            let b = reduce_to_packing_seq(&inst).unwrap();
            assert_eq!(a.packing(), b.packing());
            assert_eq!(a.map_entries(), b.map_entries());
        }
    }

    #[test]
    fn arity_below_two_is_unrepresentable() {
        // the CSP constructor itself refuses k < 2, so reduce never sees it
        assert!(matches!(
            CspInstance::new(1, 2, vec![1], vec![]),
            Err(CspError::Malformed(_))
        ));
    }
}
