//! Per-variable gadgets on the R×R grid.
//!
//! A variable of degree `d_v` gets one edge `e_{a,b}` for every slope
//! `a ∈ 0..R` and intercept `b ∈ 0..d_v`, where `e_{a,b}` is the affine line
//! `{(x, a·x + b mod R) : x ∈ 0..R}`. The slope is the edge's *color* and
//! encodes a label for the variable; the intercept slot is tied to one of
//! the variable's incident constraints. For prime `R`, two distinct edges of
//! the same color are disjoint while edges of different colors share exactly
//! one grid point, so any matching inside a gadget uses a single color — the
//! property the reduction's decoding step relies on.

use crate::ff;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("variable degree {degree} exceeds alphabet size {modulus}")]
    DegreeExceedsAlphabet { degree: usize, modulus: u64 },
    #[error("incident constraint {0} listed more than once")]
    DuplicateIncidentConstraint(usize),
    #[error("edge index {0} out of range")]
    UnknownEdge(usize),
    #[error("edges intersect; not a matching")]
    NotAMatching,
    #[error("disjoint edges with distinct colors (non-prime modulus?)")]
    MixedColors,
}

/// One affine-line edge of a gadget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetEdge {
    /// Slope `a`: the edge's color, interpreted as a variable label.
    pub slope: u64,
    /// Intercept `b`: index of the incident constraint this edge serves.
    pub slot: usize,
    /// The `R` grid points `(x, a·x + b mod R)`, ascending in `x`.
    pub points: Vec<(u64, u64)>,
}

/// The gadget of a single variable: `d_v · R` affine-line edges on the
/// R×R grid, plus the ascending-id order of the variable's incident
/// constraints that fixes which intercept slot each constraint owns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableGadget {
    modulus: u64,
    /// Incident constraint ids, ascending; position = intercept slot.
    constraint_order: Vec<usize>,
    /// Edge `a·d_v + b` is `e_{a,b}` (color classes are contiguous runs).
    edges: Vec<GadgetEdge>,
}

fn materialize_edges(r: u64, d_v: usize) -> Vec<GadgetEdge> {
    let mut edges = Vec::with_capacity(d_v * r as usize);
    for a in 0..r {
        for b in 0..d_v as u64 {
            let points = (0..r).map(|x| (x, ff::affine_eval(a, b, x, r))).collect();
            edges.push(GadgetEdge {
                slope: a,
                slot: b as usize,
                points,
            });
        }
    }
    edges
}

/// Build the gadget for a variable incident to the given constraints.
/// Fails when `R` is not prime or the degree exceeds `R` (there are only
/// `R` intercepts to hand out).
pub fn build_gadget(r: u64, incident_constraint_ids: &[usize]) -> Result<VariableGadget, GadgetError> {
    if !ff::is_prime(r) {
        return Err(GadgetError::NonPrimeModulus(r));
    }
    let mut constraint_order = incident_constraint_ids.to_vec();
    constraint_order.sort_unstable();
    if let Some(w) = constraint_order.windows(2).find(|w| w[0] == w[1]) {
        return Err(GadgetError::DuplicateIncidentConstraint(w[0]));
    }
    let d_v = constraint_order.len();
    if d_v as u64 > r {
        return Err(GadgetError::DegreeExceedsAlphabet {
            degree: d_v,
            modulus: r,
        });
    }
    Ok(VariableGadget {
        modulus: r,
        constraint_order,
        edges: materialize_edges(r, d_v),
    })
}

/// Test hook: build a gadget without the primality check, so that
/// [`verify_gadget`] can demonstrate how composite moduli break the
/// intersection pattern. Degree must still fit the grid.
pub fn build_gadget_unchecked(r: u64, d_v: usize) -> Result<VariableGadget, GadgetError> {
    if d_v as u64 > r {
        return Err(GadgetError::DegreeExceedsAlphabet {
            degree: d_v,
            modulus: r,
        });
    }
    Ok(VariableGadget {
        modulus: r,
        constraint_order: (0..d_v).collect(),
        edges: materialize_edges(r, d_v),
    })
}

impl VariableGadget {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Variable degree `d_v` (number of intercept slots).
    pub fn degree(&self) -> usize {
        self.constraint_order.len()
    }

    pub fn edges(&self) -> &[GadgetEdge] {
        &self.edges
    }

    pub fn edge(&self, slope: u64, slot: usize) -> &GadgetEdge {
        &self.edges[slope as usize * self.degree() + slot]
    }

    /// Incident constraint ids in ascending order (slot `b` serves
    /// `constraint_order()[b]`).
    pub fn constraint_order(&self) -> &[usize] {
        &self.constraint_order
    }

    /// Intercept slot owned by a constraint, if it is incident.
    pub fn slot_of(&self, constraint_id: usize) -> Option<usize> {
        self.constraint_order.binary_search(&constraint_id).ok()
    }
}

/// Findings of [`verify_gadget`]: edge pairs (by index) that break the
/// required pattern — same color must be disjoint, different colors must
/// share exactly one point (the recorded count says how many they share).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GadgetReport {
    pub pairs_checked: usize,
    pub same_color_violations: Vec<(usize, usize)>,
    pub cross_color_violations: Vec<(usize, usize, usize)>,
}

impl GadgetReport {
    pub fn is_valid(&self) -> bool {
        self.same_color_violations.is_empty() && self.cross_color_violations.is_empty()
    }
}

/// Count grid points shared by two edges by scanning columns — each edge
/// has exactly one point per column, so this is an independent oracle that
/// never consults the line-intersection formula.
fn shared_points(e1: &GadgetEdge, e2: &GadgetEdge) -> usize {
    e1.points
        .iter()
        .zip(&e2.points)
        .filter(|((x1, y1), (x2, y2))| x1 == x2 && y1 == y2)
        .count()
}

/// Exhaustively check every edge pair of a gadget against the intersection
/// pattern that prime moduli guarantee.
pub fn verify_gadget(g: &VariableGadget) -> GadgetReport {
    let mut report = GadgetReport::default();
    for i in 0..g.edges.len() {
        for j in i + 1..g.edges.len() {
            let (a, b) = (&g.edges[i], &g.edges[j]);
            report.pairs_checked += 1;
            let shared = shared_points(a, b);
            if a.slope == b.slope {
                if shared != 0 {
                    report.same_color_violations.push((i, j));
                }
            } else if shared != 1 {
                report.cross_color_violations.push((i, j, shared));
            }
        }
    }
    report
}

/// The single color used by a matching inside one gadget.
///
/// `edge_subset` indexes into [`VariableGadget::edges`]. Returns `None` for
/// the empty subset, the common slope otherwise. Intersecting edges are
/// rejected; so are disjoint edges of distinct slopes, which cannot occur in
/// a gadget built with a prime modulus.
pub fn matching_color(
    g: &VariableGadget,
    edge_subset: &[usize],
) -> Result<Option<u64>, GadgetError> {
    for &i in edge_subset {
        if i >= g.edges.len() {
            return Err(GadgetError::UnknownEdge(i));
        }
    }
    for (pos, &i) in edge_subset.iter().enumerate() {
        for &j in &edge_subset[pos + 1..] {
            if i == j || shared_points(&g.edges[i], &g.edges[j]) > 0 {
                return Err(GadgetError::NotAMatching);
            }
        }
    }
    let mut color = None;
    for &i in edge_subset {
        match color {
            None => color = Some(g.edges[i].slope),
            Some(c) if c != g.edges[i].slope => return Err(GadgetError::MixedColors),
            Some(_) => {}
        }
    }
    Ok(color)
}
