//! Hereditary orderings and discrete collapses.
//!
//! A hereditary ordering is a total order on the nonempty simplices of a
//! complex such that higher-dimensional simplices always come later, and,
//! within one dimension, the order of two simplices follows the order of
//! their largest facets whenever those differ. Under such an ordering every
//! simplex has a well-defined largest facet `largest_facet(s)` and a chain of
//! largest faces in each dimension down to the empty simplex.
//!
//! [`collapse_below`] removes every simplex of dimension at least `r` by
//! elementary free-pair steps, pairing each scheduled simplex with its
//! largest facet, provided the union hypothesis holds: equal-dimensional
//! simplices sharing their largest facet must span a member simplex. For flag
//! complexes it is enough to check the hypothesis at dimension `r` alone; the
//! flag property propagates it upward.
//!
//! The produced [`CollapseSequence`] is an independently replayable
//! certificate: [`verify_collapse`] rechecks every step's freeness against a
//! fresh copy of the complex, compares the residual, and confirms the
//! homology ranks are unchanged.

use crate::complex::Complex;
use crate::gram::GramMatrix;
use crate::homology::homology_ranks;
use crate::rng::fnv1a;
use crate::simplex::Simplex;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CollapseError {
    #[error("collapse threshold r must be at least 1, got {r}")]
    BadRank { r: u32 },
    #[error("ordering weights cover {have} vertices but the complex lives on {needed}")]
    GramTooSmall { needed: usize, have: usize },
    #[error("simplex is maximal; it has no cofacet")]
    Maximal,
    #[error("ordering is not hereditary for this complex")]
    NotHereditary,
    #[error("collapse hypothesis fails: {sigma} and {tau} share their largest facet but their union is not a member")]
    HypothesisViolated { sigma: Simplex, tau: Simplex },
    #[error("scheduled step {index} on {sigma} is not a free-pair removal")]
    IllegalStep { index: usize, sigma: Simplex },
    #[error("residual still has dimension {dim}; this contradicts the schedule count")]
    ResidualTooLarge { dim: i32 },
}

/// Deterministic resolution of equal weights during ordering construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Among maximizing pairs, take the one that is lexicographically
    /// smallest in the base vertex order.
    #[default]
    #[serde(rename = "lex-min")]
    LexMin,
}

/// Total order on the nonempty simplices of a complex, stored as a rank map
/// (larger rank means later in the order). The empty simplex implicitly sits
/// below everything at rank 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HereditaryOrdering {
    ranks: BTreeMap<Simplex, u32>,
    tie_break: TieBreak,
}

impl HereditaryOrdering {
    /// Wraps an explicit rank map. Validity is not checked here; run
    /// [`is_hereditary`] against the target complex.
    pub fn from_ranks(ranks: BTreeMap<Simplex, u32>, tie_break: TieBreak) -> Self {
        HereditaryOrdering { ranks, tie_break }
    }

    /// Rank of a simplex: 0 for the empty simplex, `None` if unknown.
    pub fn rank(&self, s: &Simplex) -> Option<u32> {
        if s.is_empty() {
            Some(0)
        } else {
            self.ranks.get(s).copied()
        }
    }

    /// Whether `a` comes later than `b`. Unknown simplices never succeed.
    pub fn succeeds(&self, a: &Simplex, b: &Simplex) -> bool {
        matches!((self.rank(a), self.rank(b)), (Some(x), Some(y)) if x > y)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    /// Every nonempty simplex of `k` has a rank, and nothing else does.
    pub fn covers(&self, k: &Complex) -> bool {
        k.nonempty_simplices().count() == self.ranks.len()
            && k.nonempty_simplices().all(|s| self.ranks.contains_key(s))
    }

    /// Simplices in ascending rank order.
    pub fn simplices_ascending(&self) -> Vec<&Simplex> {
        let mut v: Vec<(&Simplex, u32)> = self.ranks.iter().map(|(s, &r)| (s, r)).collect();
        v.sort_by_key(|&(_, r)| r);
        v.into_iter().map(|(s, _)| s).collect()
    }

    /// Order-sensitive digest for manifests and reports.
    pub fn order_hash(&self) -> u64 {
        let mut bytes = Vec::new();
        for s in self.simplices_ascending() {
            for &v in s.vertices() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            bytes.push(0xFF);
        }
        fnv1a(&bytes)
    }
}

/// Largest facet under the ordering. For a vertex this is the empty simplex.
///
/// Panics if `s` is empty or the ordering does not cover its facets.
pub fn largest_facet(s: &Simplex, ord: &HereditaryOrdering) -> Simplex {
    assert!(!s.is_empty(), "the empty simplex has no facets");
    s.facets()
        .max_by_key(|f| ord.rank(f).expect("ordering covers every facet"))
        .expect("nonempty simplex has a facet")
}

/// Largest `j`-dimensional face: iterate largest facets down to dimension
/// `j`. Accepts `-1 <= j <= dim s` and returns the empty simplex at `j = -1`.
pub fn largest_face_of_dim(s: &Simplex, j: i32, ord: &HereditaryOrdering) -> Simplex {
    assert!((-1..=s.dim()).contains(&j), "need -1 <= j <= dim");
    let mut cur = s.clone();
    while cur.dim() > j {
        cur = largest_facet(&cur, ord);
    }
    cur
}

/// Smallest cofacet of `s` within `k`, or [`CollapseError::Maximal`].
pub fn smallest_cofacet(
    k: &Complex,
    s: &Simplex,
    ord: &HereditaryOrdering,
) -> Result<Simplex, CollapseError> {
    k.cofacets(s)
        .into_iter()
        .min_by_key(|c| ord.rank(c).expect("ordering covers every cofacet"))
        .ok_or(CollapseError::Maximal)
}

/// The image of the largest-facet map over all nonempty simplices. Always
/// contains the empty simplex once `k` has a vertex.
pub fn largest_facet_image(k: &Complex, ord: &HereditaryOrdering) -> BTreeSet<Simplex> {
    k.nonempty_simplices()
        .map(|s| largest_facet(s, ord))
        .collect()
}

/// Builds the canonical hereditary ordering from pairwise closeness weights.
///
/// Vertices come first, by descending id (so vertex 1 ranks highest among
/// vertices). Each higher dimension is ordered group by group: simplices
/// sharing their largest facet `rho` form one group, groups follow the rank
/// of `rho` (largest first), and within a group the extension vertices are
/// emitted by repeatedly choosing, among the remaining candidates, the first
/// member of the pair with the largest closeness weight `|g_wz - 1|`; ties go
/// to the lexicographically smallest pair. Equal weights therefore reduce to
/// plain lexicographic order.
pub fn build_hereditary_ordering(
    k: &Complex,
    g: &GramMatrix,
    tie_break: TieBreak,
) -> Result<HereditaryOrdering, CollapseError> {
    if g.m() < k.ambient() as usize {
        return Err(CollapseError::GramTooSmall {
            needed: k.ambient() as usize,
            have: g.m(),
        });
    }
    let mut ranks: BTreeMap<Simplex, u32> = BTreeMap::new();
    let mut next: u32 = 1;
    let vertices = k.vertex_ids();
    for &v in vertices.iter().rev() {
        ranks.insert(Simplex::new(vec![v]).expect("vertex id"), next);
        next += 1;
    }
    for dim in 1..=k.dim() {
        let mut groups: BTreeMap<Simplex, Vec<u32>> = BTreeMap::new();
        for s in k.simplices_of_dim(dim) {
            let rho = s
                .facets()
                .max_by_key(|f| *ranks.get(f).expect("lower dimension already ranked"))
                .expect("positive dimension");
            let extra = s
                .vertices()
                .iter()
                .copied()
                .find(|&v| !rho.contains_vertex(v))
                .expect("facet omits exactly one vertex");
            groups.entry(rho).or_default().push(extra);
        }
        let mut ordered: Vec<(u32, Simplex, Vec<u32>)> = groups
            .into_iter()
            .map(|(rho, vs)| (ranks[&rho], rho, vs))
            .collect();
        ordered.sort_by(|a, b| b.0.cmp(&a.0));
        let mut descending: Vec<Simplex> = Vec::new();
        for (_, rho, mut vs) in ordered {
            vs.sort_unstable();
            for v in extension_sequence(&vs, g) {
                descending.push(rho.with_vertex(v).expect("extension vertex is new"));
            }
        }
        for s in descending.into_iter().rev() {
            ranks.insert(s, next);
            next += 1;
        }
    }
    Ok(HereditaryOrdering { ranks, tie_break })
}

/// Orders a group's extension vertices: repeatedly emit the first member of
/// the remaining pair maximizing the closeness weight. Scanning ordered pairs
/// in ascending numeric order with a strictly-greater update makes the
/// winner the lexicographically smallest maximizing pair, which also covers
/// the all-equal case (plain ascending order).
fn extension_sequence(vs: &[u32], g: &GramMatrix) -> Vec<u32> {
    let mut remaining: Vec<u32> = vs.to_vec();
    let mut out = Vec::with_capacity(remaining.len());
    while remaining.len() > 1 {
        let mut best_value = f64::NEG_INFINITY;
        let mut best_slot: Option<usize> = None;
        for (i, &w) in remaining.iter().enumerate() {
            for &z in &remaining {
                if z == w {
                    continue;
                }
                let value = g.logmag(w, z);
                if best_slot.is_none() || value > best_value {
                    best_value = value;
                    best_slot = Some(i);
                }
            }
        }
        out.push(remaining.remove(best_slot.expect("group has a pair")));
    }
    out.extend(remaining);
    out
}

/// Canonical ordering with all closeness weights equal: dimensions ascend,
/// and within the group structure everything falls back to lexicographic
/// order.
pub fn lexicographic_ordering(k: &Complex) -> HereditaryOrdering {
    let g = GramMatrix::uniform_logmag(k.ambient().max(1) as usize, -1.0);
    build_hereditary_ordering(k, &g, TieBreak::default()).expect("uniform weights fit any complex")
}

/// Checks the two hereditary conditions against `k`: ranks strictly increase
/// with dimension, and within each dimension the rank of the largest facet
/// is monotone along the order.
pub fn is_hereditary(k: &Complex, ord: &HereditaryOrdering) -> bool {
    if !ord.covers(k) {
        return false;
    }
    let mut prev_max: u32 = 0;
    for d in 0..=k.dim() {
        let ranks: Vec<u32> = k
            .simplices_of_dim(d)
            .map(|s| ord.rank(s).expect("covered"))
            .collect();
        let (Some(&lo), Some(&hi)) = (ranks.iter().min(), ranks.iter().max()) else {
            continue;
        };
        if lo <= prev_max {
            return false;
        }
        prev_max = hi;
    }
    for d in 1..=k.dim() {
        let mut pairs: Vec<(u32, u32)> = k
            .simplices_of_dim(d)
            .map(|s| {
                let mu = largest_facet(s, ord);
                (
                    ord.rank(s).expect("covered"),
                    ord.rank(&mu).expect("covered"),
                )
            })
            .collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[1].1 < w[0].1) {
            return false;
        }
    }
    true
}

/// All elementary free pairs of `k`: `(sigma, tau)` with `sigma` maximal and
/// `tau` a facet of `sigma` contained in no other simplex.
pub fn free_pairs(k: &Complex) -> Vec<(Simplex, Simplex)> {
    let mut out = Vec::new();
    for sigma in k.maximal_simplices() {
        if sigma.dim() < 1 {
            continue;
        }
        for tau in sigma.facets() {
            if k.cofacets(&tau) == [sigma.clone()] {
                out.push((sigma.clone(), tau));
            }
        }
    }
    out.sort();
    out
}

/// A replayable collapse: the removal steps in order, plus the residual
/// complex they leave behind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseSequence {
    pub steps: Vec<(Simplex, Simplex)>,
    pub residual: Complex,
}

fn hypothesis_check(k: &Complex, ord: &HereditaryOrdering, r: u32) -> Result<(), CollapseError> {
    let top = k.dim();
    if top < r as i32 {
        return Ok(());
    }
    let dims: Vec<i32> = if k.is_flag() {
        vec![r as i32]
    } else {
        (r as i32..=top).collect()
    };
    for d in dims {
        let mut groups: BTreeMap<Simplex, Vec<&Simplex>> = BTreeMap::new();
        for s in k.simplices_of_dim(d) {
            groups.entry(largest_facet(s, ord)).or_default().push(s);
        }
        for members in groups.values() {
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    if !k.contains(&members[i].union(members[j])) {
                        return Err(CollapseError::HypothesisViolated {
                            sigma: members[i].clone(),
                            tau: members[j].clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Collapses every simplex of dimension at least `r` (with `r >= 1`) by
/// free-pair removals, pairing each scheduled simplex with its largest
/// facet, in descending rank order.
///
/// Requires a hereditary ordering and the union hypothesis in dimensions
/// `>= r` (checked at dimension `r` only when `k` is flag). Every removal is
/// verified to be free at the moment it happens, so a logic error surfaces
/// as [`CollapseError::IllegalStep`] rather than a corrupt certificate.
pub fn collapse_below(
    k: &Complex,
    ord: &HereditaryOrdering,
    r: u32,
) -> Result<CollapseSequence, CollapseError> {
    if r < 1 {
        return Err(CollapseError::BadRank { r });
    }
    if !is_hereditary(k, ord) {
        return Err(CollapseError::NotHereditary);
    }
    hypothesis_check(k, ord, r)?;
    let image = largest_facet_image(k, ord);
    let mut schedule: Vec<&Simplex> = k
        .nonempty_simplices()
        .filter(|s| s.dim() >= r as i32 && !image.contains(*s))
        .collect();
    schedule.sort_by_key(|s| std::cmp::Reverse(ord.rank(s).expect("covered")));
    let mut current = k.clone();
    let mut steps = Vec::with_capacity(schedule.len());
    for (index, sigma) in schedule.into_iter().enumerate() {
        let tau = largest_facet(sigma, ord);
        let legal = current.is_maximal(sigma) && current.cofacets(&tau) == [sigma.clone()];
        if !legal {
            return Err(CollapseError::IllegalStep {
                index,
                sigma: sigma.clone(),
            });
        }
        current.remove(sigma);
        current.remove(&tau);
        steps.push((sigma.clone(), tau));
    }
    if current.dim() >= r as i32 {
        return Err(CollapseError::ResidualTooLarge {
            dim: current.dim(),
        });
    }
    Ok(CollapseSequence {
        steps,
        residual: current,
    })
}

/// Why a replay rejected a collapse sequence.
#[derive(Debug, Error)]
#[error("collapse replay failed: {reason}")]
pub struct CollapseVerifyFailure {
    /// Index of the offending step, or `None` for end-state mismatches.
    pub step: Option<usize>,
    pub reason: String,
}

/// Replays a collapse sequence against `k` from scratch: each step must be a
/// legal free-pair removal, the end state must equal the recorded residual,
/// and the homology ranks must be unchanged.
pub fn verify_collapse_detailed(
    k: &Complex,
    seq: &CollapseSequence,
) -> Result<(), CollapseVerifyFailure> {
    let mut current = k.clone();
    for (index, (sigma, tau)) in seq.steps.iter().enumerate() {
        let fail = |reason: String| CollapseVerifyFailure {
            step: Some(index),
            reason,
        };
        if tau.dim() != sigma.dim() - 1 || !tau.is_face_of(sigma) {
            return Err(fail(format!("{tau} is not a facet of {sigma}")));
        }
        if !current.contains(sigma) || !current.is_maximal(sigma) {
            return Err(fail(format!("{sigma} is not maximal at this point")));
        }
        if current.cofacets(tau) != [sigma.clone()] {
            return Err(fail(format!("{tau} is not free over {sigma}")));
        }
        current.remove(sigma);
        current.remove(tau);
    }
    if current != seq.residual {
        return Err(CollapseVerifyFailure {
            step: None,
            reason: "residual complex differs from the recorded one".into(),
        });
    }
    let mut before = homology_ranks(k);
    let mut after = homology_ranks(&current);
    // The rank vectors stop at each complex's own dimension; missing top
    // entries are zeros.
    let len = before.len().max(after.len());
    before.resize(len, 0);
    after.resize(len, 0);
    if before != after {
        return Err(CollapseVerifyFailure {
            step: None,
            reason: "homology ranks changed".into(),
        });
    }
    Ok(())
}

pub fn verify_collapse(k: &Complex, seq: &CollapseSequence) -> bool {
    verify_collapse_detailed(k, seq).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{clique_complex, random_low_rank_gram};

    fn simplex(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    fn full_simplex(m: u32) -> Complex {
        Complex::from_maximal(m, [simplex(&(1..=m).collect::<Vec<_>>())])
    }

    #[test]
    fn vertex_has_empty_largest_facet() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        assert_eq!(largest_facet(&simplex(&[2]), &ord), Simplex::empty());
    }

    #[test]
    fn manual_ordering_with_reversed_vertices() {
        // With vertex 2 ranked above vertex 1 the largest facet of the edge
        // flips accordingly.
        let mut ranks = BTreeMap::new();
        ranks.insert(simplex(&[1]), 1);
        ranks.insert(simplex(&[2]), 2);
        ranks.insert(simplex(&[1, 2]), 3);
        let ord = HereditaryOrdering::from_ranks(ranks, TieBreak::LexMin);
        assert_eq!(largest_facet(&simplex(&[1, 2]), &ord), simplex(&[2]));
        let k = full_simplex(2);
        assert!(is_hereditary(&k, &ord));
    }

    #[test]
    fn canonical_ordering_of_the_full_triangle() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let ascending: Vec<String> = ord
            .simplices_ascending()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            ascending,
            ["[3]", "[2]", "[1]", "[2,3]", "[1,3]", "[1,2]", "[1,2,3]"]
        );
        assert!(is_hereditary(&k, &ord));
        assert!(ord.succeeds(&simplex(&[1]), &simplex(&[2])));
        assert!(ord.succeeds(&simplex(&[2, 3]), &simplex(&[1])));
    }

    #[test]
    fn largest_face_chain_descends_through_every_dimension() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let t = simplex(&[1, 2, 3]);
        assert_eq!(largest_face_of_dim(&t, 2, &ord), t);
        assert_eq!(largest_face_of_dim(&t, 1, &ord), simplex(&[1, 2]));
        assert_eq!(largest_face_of_dim(&t, 0, &ord), simplex(&[1]));
        assert_eq!(largest_face_of_dim(&t, -1, &ord), Simplex::empty());
    }

    #[test]
    fn smallest_cofacet_picks_the_lowest_ranked_edge() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        // Edges rank [2,3] < [1,3] < [1,2]; the lowest-ranked edge over
        // vertex 1 is [1,3].
        assert_eq!(
            smallest_cofacet(&k, &simplex(&[1]), &ord).unwrap(),
            simplex(&[1, 3])
        );
        assert!(matches!(
            smallest_cofacet(&k, &simplex(&[1, 2, 3]), &ord),
            Err(CollapseError::Maximal)
        ));
    }

    #[test]
    fn largest_facet_image_of_a_point_is_the_empty_simplex() {
        let k = Complex::from_maximal(1, [simplex(&[1])]);
        let ord = lexicographic_ordering(&k);
        let image = largest_facet_image(&k, &ord);
        assert_eq!(image.len(), 1);
        assert!(image.contains(&Simplex::empty()));
    }

    #[test]
    fn image_of_the_full_triangle() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let image = largest_facet_image(&k, &ord);
        let expected: BTreeSet<Simplex> = [
            Simplex::empty(),
            simplex(&[1]),
            simplex(&[2]),
            simplex(&[1, 2]),
        ]
        .into_iter()
        .collect();
        assert_eq!(image, expected);
    }

    #[test]
    fn two_candidate_groups_emit_the_pair_head_first() {
        // A two-candidate group has a single unordered pair; the emitted
        // order is its lexicographic reading regardless of the weight.
        let k = full_simplex(3);
        let g = GramMatrix::from_logmag(3, vec![-5.0, -1.0, -9.0]).unwrap();
        let ord = build_hereditary_ordering(&k, &g, TieBreak::LexMin).unwrap();
        assert!(is_hereditary(&k, &ord));
        assert!(ord.succeeds(&simplex(&[1, 2]), &simplex(&[1, 3])));
    }

    #[test]
    fn distinct_weights_reorder_an_extension_group() {
        // Four vertices, one group over rho = [1] with candidates {2,3,4}.
        // Weights: pair (3,4) strongest, then (2,*) weak. The first pick is
        // 3 (from the maximizing pair (3,4)), then the remaining pair (2,4)
        // vs (4,2)... remaining candidates {2,4} have the single pair (2,4),
        // so 2 comes next, then 4.
        let k = full_simplex(4);
        let mut logmag = vec![-20.0; 6];
        // Order: (1,2),(1,3),(2,3),(1,4),(2,4),(3,4).
        logmag[5] = -1.0; // (3,4) strongest
        logmag[4] = -10.0; // (2,4)
        logmag[2] = -15.0; // (2,3)
        let g = GramMatrix::from_logmag(4, logmag).unwrap();
        let ord = build_hereditary_ordering(&k, &g, TieBreak::LexMin).unwrap();
        // Descending within the group: [1,3], [1,2], [1,4].
        assert!(ord.succeeds(&simplex(&[1, 3]), &simplex(&[1, 2])));
        assert!(ord.succeeds(&simplex(&[1, 2]), &simplex(&[1, 4])));
        assert!(is_hereditary(&k, &ord));
    }

    #[test]
    fn free_pairs_of_a_path() {
        let k = Complex::from_maximal(3, [simplex(&[1, 2]), simplex(&[2, 3])]);
        let pairs = free_pairs(&k);
        assert_eq!(
            pairs,
            vec![
                (simplex(&[1, 2]), simplex(&[1])),
                (simplex(&[2, 3]), simplex(&[3])),
            ]
        );
    }

    #[test]
    fn full_simplex_collapses_to_one_vertex() {
        for m in 2..=6u32 {
            let k = full_simplex(m);
            let ord = lexicographic_ordering(&k);
            let seq = collapse_below(&k, &ord, 1).unwrap();
            assert_eq!(seq.residual.dim(), 0);
            assert_eq!(seq.residual.len(), 2); // empty simplex + one vertex
            assert!(seq.residual.contains(&simplex(&[m])));
            assert!(verify_collapse(&k, &seq));
        }
    }

    #[test]
    fn triangle_collapse_steps_are_the_frozen_trace() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let seq = collapse_below(&k, &ord, 1).unwrap();
        let rendered: Vec<(String, String)> = seq
            .steps
            .iter()
            .map(|(s, t)| (s.to_string(), t.to_string()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                ("[1,2,3]".to_string(), "[1,2]".to_string()),
                ("[1,3]".to_string(), "[1]".to_string()),
                ("[2,3]".to_string(), "[2]".to_string()),
            ]
        );
    }

    #[test]
    fn disjoint_simplices_leave_one_vertex_each() {
        let k = Complex::from_maximal(5, [simplex(&[1, 2, 3]), simplex(&[4, 5])]);
        let ord = lexicographic_ordering(&k);
        let seq = collapse_below(&k, &ord, 1).unwrap();
        let residual_vertices: Vec<Simplex> =
            seq.residual.nonempty_simplices().cloned().collect();
        assert_eq!(residual_vertices, vec![simplex(&[3]), simplex(&[5])]);
        assert!(verify_collapse(&k, &seq));
    }

    #[test]
    fn hollow_triangle_violates_the_hypothesis() {
        let k = Complex::from_maximal(
            3,
            [simplex(&[1, 2]), simplex(&[1, 3]), simplex(&[2, 3])],
        );
        let ord = lexicographic_ordering(&k);
        match collapse_below(&k, &ord, 1) {
            Err(CollapseError::HypothesisViolated { sigma, tau }) => {
                assert_eq!(sigma, simplex(&[1, 2]));
                assert_eq!(tau, simplex(&[1, 3]));
            }
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn closed_surface_cannot_collapse_its_top_cells() {
        // The octahedron boundary has nontrivial top homology; the union
        // hypothesis correctly refuses at r = 2.
        let mut faces = Vec::new();
        for &i in &[1u32, 2] {
            for &j in &[3u32, 4] {
                for &l in &[5u32, 6] {
                    faces.push(simplex(&[i, j, l]));
                }
            }
        }
        let k = Complex::from_maximal(6, faces);
        let ord = lexicographic_ordering(&k);
        assert!(is_hereditary(&k, &ord));
        assert!(matches!(
            collapse_below(&k, &ord, 2),
            Err(CollapseError::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn rank_two_collapse_leaves_a_graph() {
        let k = full_simplex(5);
        let ord = lexicographic_ordering(&k);
        let seq = collapse_below(&k, &ord, 2).unwrap();
        assert!(seq.residual.dim() <= 1);
        assert!(verify_collapse(&k, &seq));
        // Homotopy type is preserved, so the residual graph is a tree.
        assert_eq!(
            crate::homology::homology_ranks(&seq.residual),
            vec![1, 0]
                .into_iter()
                .take((seq.residual.dim() + 1) as usize)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn bad_rank_is_rejected() {
        let k = full_simplex(2);
        let ord = lexicographic_ordering(&k);
        assert!(matches!(
            collapse_below(&k, &ord, 0),
            Err(CollapseError::BadRank { r: 0 })
        ));
    }

    #[test]
    fn non_hereditary_ordering_is_rejected() {
        let k = full_simplex(2);
        let mut ranks = BTreeMap::new();
        // Edge ranked below a vertex: dimension monotonicity fails.
        ranks.insert(simplex(&[1, 2]), 1);
        ranks.insert(simplex(&[1]), 2);
        ranks.insert(simplex(&[2]), 3);
        let ord = HereditaryOrdering::from_ranks(ranks, TieBreak::LexMin);
        assert!(!is_hereditary(&k, &ord));
        assert!(matches!(
            collapse_below(&k, &ord, 1),
            Err(CollapseError::NotHereditary)
        ));
    }

    #[test]
    fn mu_monotonicity_is_checked_within_dimensions() {
        // Ranks ascend with dimension but the edge order contradicts the
        // order of their largest facets.
        let k = Complex::from_maximal(3, [simplex(&[1, 2]), simplex(&[2, 3])]);
        let mut ranks = BTreeMap::new();
        ranks.insert(simplex(&[3]), 1);
        ranks.insert(simplex(&[2]), 2);
        ranks.insert(simplex(&[1]), 3);
        // mu([1,2]) = [1] (rank 3), mu([2,3]) = [2] (rank 2), yet [2,3] is
        // ranked above [1,2].
        ranks.insert(simplex(&[1, 2]), 4);
        ranks.insert(simplex(&[2, 3]), 5);
        let ord = HereditaryOrdering::from_ranks(ranks, TieBreak::LexMin);
        assert!(!is_hereditary(&k, &ord));
    }

    #[test]
    fn replay_rejects_tampered_sequences() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let seq = collapse_below(&k, &ord, 1).unwrap();
        // Reorder the steps so the first removal is no longer maximal-free.
        let mut tampered = seq.clone();
        tampered.steps.reverse();
        let failure = verify_collapse_detailed(&k, &tampered).unwrap_err();
        assert_eq!(failure.step, Some(0));
        // Forge the residual.
        let mut forged = seq.clone();
        forged.residual = Complex::trivial(3);
        let failure = verify_collapse_detailed(&k, &forged).unwrap_err();
        assert_eq!(failure.step, None);
        assert!(verify_collapse(&k, &seq));
    }

    #[test]
    fn random_flag_complexes_get_valid_orderings() {
        // Clique complexes of assorted graphs; the built ordering must be
        // hereditary and its mu chains nested.
        let mut seed = 0x5EEDu64;
        for trial in 0..20 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(trial);
            let m = 5 + (seed % 4) as u32; // 5..8
            let mut edges = Vec::new();
            let mut bits = seed;
            for v in 2..=m {
                for u in 1..v {
                    bits = bits.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                    if bits >> 63 == 1 {
                        edges.push((u, v));
                    }
                }
            }
            let k = clique_complex(m as usize, &edges).unwrap();
            let g = random_low_rank_gram(m as usize, 2, seed);
            let ord = build_hereditary_ordering(&k, &g, TieBreak::LexMin).unwrap();
            assert!(is_hereditary(&k, &ord), "trial {trial}");
            for s in k.nonempty_simplices() {
                // Nested chain: mu_j(s) is a face of mu_{j+1}(s).
                let mut upper = s.clone();
                for j in (-1..s.dim()).rev() {
                    let lower = largest_face_of_dim(s, j, &ord);
                    assert!(lower.is_face_of(&upper));
                    assert_eq!(lower, largest_facet(&upper, &ord));
                    upper = lower;
                }
            }
        }
    }

    #[test]
    fn order_hash_tracks_the_order_not_the_set() {
        let k = full_simplex(3);
        let a = lexicographic_ordering(&k);
        let mut ranks = BTreeMap::new();
        ranks.insert(simplex(&[1]), 1);
        ranks.insert(simplex(&[2]), 2);
        ranks.insert(simplex(&[3]), 3);
        ranks.insert(simplex(&[1, 2]), 4);
        ranks.insert(simplex(&[1, 3]), 5);
        ranks.insert(simplex(&[2, 3]), 6);
        ranks.insert(simplex(&[1, 2, 3]), 7);
        let b = HereditaryOrdering::from_ranks(ranks, TieBreak::LexMin);
        assert_ne!(a.order_hash(), b.order_hash());
        assert_eq!(a.order_hash(), lexicographic_ordering(&k).order_hash());
    }

    #[test]
    fn sequence_json_round_trip() {
        let k = full_simplex(3);
        let ord = lexicographic_ordering(&k);
        let seq = collapse_below(&k, &ord, 1).unwrap();
        let j = serde_json::to_string(&seq).unwrap();
        let back: CollapseSequence = serde_json::from_str(&j).unwrap();
        assert_eq!(back, seq);
    }
}
