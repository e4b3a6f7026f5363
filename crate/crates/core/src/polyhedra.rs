//! Cycle polyhedra: combinatorial cycles with geometric realizations, their
//! constraint varieties, and two independent volume pipelines.
//!
//! A polyhedron here is a simplicial `(n-1)`-cycle `xi` over the vertex set
//! `{1, ..., m}` together with its support complex `K`. A configuration
//! assigns a quadric point to every vertex; edge lengths turn the assignment
//! into a constraint variety. The generalized volume is the chain formula
//! `V = sum_q c_q V^or(...)` over any chain `eta` with `boundary(eta) = xi`,
//! and the collapse pipeline recomputes the same number from a certificate:
//! select a closeness scale, build the clique complex of the close-pair
//! graph, collapse it, solve for a bounding chain there, and sum kernels.

use crate::chain::{Chain, ChainError};
use crate::collapse::{build_hereditary_ordering, collapse_below, CollapseError, TieBreak};
use crate::complex::Complex;
use crate::geometry::{
    distance, gamma_half, gram, oriented_simplex_volume, volume_kernel, Configuration,
    GeometryError, QuadratureSpec, QuadricPoint, Space,
};
use crate::gram::{clique_complex, select_kappa, threshold_graph, GramError};
use crate::homology::{solve_bounding_chain, HomologyError};
use crate::simplex::Simplex;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyhedraError {
    #[error("the defining chain is not a cycle")]
    NotACycle,
    #[error("the defining chain is empty")]
    EmptyCycle,
    #[error("cycle degree {degree} needs ambient dimension at least 2")]
    BadDegree { degree: i32 },
    #[error("vertex {vertex} exceeds the declared vertex count {m}")]
    VertexOutOfRange { vertex: u32, m: u32 },
    #[error("configuration has {got} points but the polyhedron needs {expected}")]
    WrongVertexCount { expected: usize, got: usize },
    #[error("edge {{{u},{v}}} has no prescribed length")]
    MissingEdgeLength { u: u32, v: u32 },
    #[error("edge {{{u},{v}}} has invalid length {value}")]
    BadLength { u: u32, v: u32, value: f64 },
    #[error("operation requires a spherical configuration")]
    NotSphere,
    #[error("chain does not bound the polyhedron cycle")]
    NotBounding,
    #[error("vertex diameter {diam} reaches pi/2; spherical volume undefined")]
    DiameterTooLarge { diam: f64 },
    #[error("edge {{{u},{v}}} of the polyhedron is not close at the selected scale")]
    KappaEdgeConflict { u: u32, v: u32 },
    #[error("collapse pipeline needs ambient dimension n >= 3, got {n}")]
    DimensionTooSmall { n: usize },
    #[error("model space must be sphere or hyperbolic")]
    BadModel,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Gram(#[from] GramError),
    #[error(transparent)]
    Collapse(#[from] CollapseError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// A simplicial `(n-1)`-cycle with its support complex.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct CyclePolyhedron {
    m: u32,
    xi: Chain,
    k: Complex,
    connected: bool,
}

#[derive(Serialize, Deserialize, Clone)]
struct PolyRepr {
    m: u32,
    xi: Chain,
}

impl TryFrom<PolyRepr> for CyclePolyhedron {
    type Error = PolyhedraError;
    fn try_from(repr: PolyRepr) -> Result<Self, Self::Error> {
        CyclePolyhedron::new(repr.m, repr.xi)
    }
}

impl From<CyclePolyhedron> for PolyRepr {
    fn from(p: CyclePolyhedron) -> Self {
        PolyRepr { m: p.m, xi: p.xi }
    }
}

impl CyclePolyhedron {
    /// Validates the cycle and closes its support. The ambient dimension `n`
    /// is one more than the cycle degree.
    pub fn new(m: u32, xi: Chain) -> Result<Self, PolyhedraError> {
        if xi.is_zero() {
            return Err(PolyhedraError::EmptyCycle);
        }
        if xi.degree() < 1 {
            return Err(PolyhedraError::BadDegree {
                degree: xi.degree(),
            });
        }
        if !xi.is_cycle() {
            return Err(PolyhedraError::NotACycle);
        }
        for (s, _) in xi.iter() {
            for &v in s.vertices() {
                if v > m {
                    return Err(PolyhedraError::VertexOutOfRange { vertex: v, m });
                }
            }
        }
        let k = xi.support();
        let connected = support_is_connected(&k);
        Ok(CyclePolyhedron {
            m,
            xi,
            k,
            connected,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Ambient dimension: the cycle has degree `n - 1`.
    pub fn n(&self) -> usize {
        (self.xi.degree() + 1) as usize
    }

    pub fn xi(&self) -> &Chain {
        &self.xi
    }

    pub fn complex(&self) -> &Complex {
        &self.k
    }

    /// Whether the support is connected (required for flexion experiments).
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Edges of the support, ascending lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.k
            .simplices_of_dim(1)
            .map(|s| (s.vertices()[0], s.vertices()[1]))
    }

    /// The same polyhedron with the orientation of the cycle reversed.
    pub fn reversed(&self) -> CyclePolyhedron {
        CyclePolyhedron {
            m: self.m,
            xi: self.xi.neg(),
            k: self.k.clone(),
            connected: self.connected,
        }
    }
}

/// Connectivity of a complex through its edges; a complex with a single
/// vertex counts as connected, an empty support does not.
fn support_is_connected(k: &Complex) -> bool {
    let vertices: Vec<u32> = k.simplices_of_dim(0).map(|s| s.vertices()[0]).collect();
    if vertices.is_empty() {
        return false;
    }
    let index: BTreeMap<u32, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for s in k.simplices_of_dim(1) {
        let a = find(&mut parent, index[&s.vertices()[0]]);
        let b = find(&mut parent, index[&s.vertices()[1]]);
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (1..vertices.len()).all(|i| find(&mut parent, i) == root)
}

/// Prescribed edge lengths for the support of a polyhedron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(u32, u32, f64)>", into = "Vec<(u32, u32, f64)>")]
pub struct EdgeLengths {
    lengths: BTreeMap<(u32, u32), f64>,
}

impl TryFrom<Vec<(u32, u32, f64)>> for EdgeLengths {
    type Error = PolyhedraError;
    fn try_from(list: Vec<(u32, u32, f64)>) -> Result<Self, Self::Error> {
        EdgeLengths::new(list)
    }
}

impl From<EdgeLengths> for Vec<(u32, u32, f64)> {
    fn from(e: EdgeLengths) -> Self {
        e.lengths
            .into_iter()
            .map(|((u, v), l)| (u, v, l))
            .collect()
    }
}

impl EdgeLengths {
    pub fn new(list: impl IntoIterator<Item = (u32, u32, f64)>) -> Result<Self, PolyhedraError> {
        let mut lengths = BTreeMap::new();
        for (u, v, l) in list {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(PolyhedraError::BadLength { u, v, value: l });
            }
            let key = if u <= v { (u, v) } else { (v, u) };
            if key.0 == key.1 {
                return Err(PolyhedraError::BadLength { u, v, value: l });
            }
            lengths.insert(key, l);
        }
        Ok(EdgeLengths { lengths })
    }

    /// Lengths induced by a real configuration on the polyhedron's edges.
    pub fn measured(
        poly: &CyclePolyhedron,
        a: &Configuration,
    ) -> Result<Self, PolyhedraError> {
        check_vertex_count(poly, a)?;
        let mut lengths = BTreeMap::new();
        for (u, v) in poly.edges() {
            let d = distance(a.point(u as usize - 1), a.point(v as usize - 1))?;
            lengths.insert((u, v), d);
        }
        Ok(EdgeLengths { lengths })
    }

    pub fn get(&self, u: u32, v: u32) -> Option<f64> {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.lengths.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.lengths.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.values().fold(0.0, |acc, &l| acc.max(l))
    }

    /// The small-diameter regime for spherical polyhedra: every length below
    /// `pi / (2 (m - 1))`, which forces the vertex diameter under `pi/2`.
    pub fn in_small_sphere_mode(&self, m: u32) -> bool {
        let bound = std::f64::consts::FRAC_PI_2 / (m.saturating_sub(1).max(1) as f64);
        self.lengths.values().all(|&l| l < bound)
    }

    /// Whether every length sits below the sufficient constancy bound
    /// `2^(-m^2 (n+4))`. Checked in the log domain; at any floating-point
    /// representable positive scale this is false for interesting `m`, so
    /// the result is informational, never a gate.
    pub fn below_guaranteed_scale(&self, m: u32, n: u32) -> bool {
        let exponent = -((m as f64) * (m as f64) * (n as f64 + 4.0));
        self.lengths
            .values()
            .all(|&l| l == 0.0 || l.log2() < exponent)
    }
}

fn check_vertex_count(
    poly: &CyclePolyhedron,
    a: &Configuration,
) -> Result<(), PolyhedraError> {
    if a.m() != poly.m() as usize {
        return Err(PolyhedraError::WrongVertexCount {
            expected: poly.m() as usize,
            got: a.m(),
        });
    }
    Ok(())
}

/// Residuals of the constraint variety at a configuration: one entry per
/// support edge (ascending lexicographically), `<a_u, a_v> - cos(l)` on the
/// sphere or `<a_u, a_v> - cosh(l)` in hyperbolic space, followed by one
/// quadric residual `<a_u, a_u> - 1` per vertex. The vector length is
/// therefore (edge count) + m.
pub fn constraint_residuals(
    poly: &CyclePolyhedron,
    ell: &EdgeLengths,
    a: &Configuration,
) -> Result<Vec<f64>, PolyhedraError> {
    check_vertex_count(poly, a)?;
    if !a.space().is_real() {
        return Err(PolyhedraError::Geometry(GeometryError::NotRealSpace));
    }
    let mut out = Vec::with_capacity(poly.complex().simplices_of_dim(1).count() + a.m());
    for (u, v) in poly.edges() {
        let l = ell
            .get(u, v)
            .ok_or(PolyhedraError::MissingEdgeLength { u, v })?;
        let target = match a.space() {
            Space::Sphere => l.cos(),
            Space::Hyperbolic => l.cosh(),
            Space::Complex => unreachable!("real space checked above"),
        };
        let p = a.point(u as usize - 1).product(a.point(v as usize - 1))?;
        out.push(p.re - target);
    }
    for u in 0..a.m() {
        let q = a.point(u).product(a.point(u))?;
        out.push(q.re - 1.0);
    }
    Ok(out)
}

/// Maximum pairwise distance over the support vertices of a spherical
/// configuration. The pseudo-linear image of a small-edge simplex stays
/// within its vertex hull, so the vertex diameter is the checked quantity.
pub fn diameter_check(
    poly: &CyclePolyhedron,
    a: &Configuration,
) -> Result<f64, PolyhedraError> {
    check_vertex_count(poly, a)?;
    if a.space() != Space::Sphere {
        return Err(PolyhedraError::NotSphere);
    }
    let vertices: Vec<u32> = poly
        .complex()
        .simplices_of_dim(0)
        .map(|s| s.vertices()[0])
        .collect();
    let mut diam = 0.0f64;
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            let d = distance(a.point(u as usize - 1), a.point(v as usize - 1))?;
            diam = diam.max(d);
        }
    }
    Ok(diam)
}

/// A volume together with its accumulated quadrature bookkeeping.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PolyVolume {
    pub value: f64,
    pub error_estimate: f64,
    pub tolerance_met: bool,
}

fn simplex_points<'a>(
    s: &Simplex,
    a: &'a Configuration,
) -> Vec<QuadricPoint> {
    s.vertices()
        .iter()
        .map(|&u| a.point(u as usize - 1).clone())
        .collect()
}

/// The generalized oriented volume `sum_q c_q V^or(a_{u_0}, ..., a_{u_n})`
/// over the terms of a bounding chain `eta` with `boundary(eta) = xi`
/// (checked exactly). Independent of the choice of `eta` up to quadrature
/// error. Spherical configurations must have vertex diameter under `pi/2`.
pub fn generalized_volume(
    poly: &CyclePolyhedron,
    eta: &Chain,
    a: &Configuration,
    quad: &QuadratureSpec,
) -> Result<PolyVolume, PolyhedraError> {
    check_vertex_count(poly, a)?;
    let bounds = match eta.boundary().sub(poly.xi()) {
        Ok(difference) => difference.is_zero(),
        Err(_) => false,
    };
    if !bounds {
        return Err(PolyhedraError::NotBounding);
    }
    if a.space() == Space::Sphere {
        let diam = diameter_check(poly, a)?;
        if diam >= std::f64::consts::FRAC_PI_2 {
            return Err(PolyhedraError::DiameterTooLarge { diam });
        }
    }
    let mut value = 0.0f64;
    let mut error = 0.0f64;
    let mut met = true;
    for (s, c) in eta.iter() {
        let coeff = c.to_f64().expect("rational coefficient fits in f64");
        if coeff == 0.0 {
            continue;
        }
        let points = simplex_points(s, a);
        let v = oriented_simplex_volume(&points, quad)?;
        value += coeff * v.value;
        error += coeff.abs() * v.error_estimate;
        met &= v.tolerance_met;
    }
    Ok(PolyVolume {
        value,
        error_estimate: error,
        tolerance_met: met,
    })
}

use crate::geometry::quadrature::nu_pow;

/// Result of the collapse-based volume pipeline, with the certificate data
/// that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhiReport {
    pub re: f64,
    pub im: f64,
    pub error_estimate: f64,
    /// Selected closeness scale, base-2 log.
    pub log2_kappa: f64,
    /// Edges of the close-pair graph.
    pub close_edges: usize,
    /// Simplex count of the clique complex the collapse ran on.
    pub complex_size: usize,
    pub collapse_steps: usize,
    pub residual_dim: i32,
    pub eta_terms: usize,
}

impl PhiReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// The collapse-based volume pipeline on one closeness chart.
///
/// From the Gram matrix of the configuration: select a closeness scale
/// kappa for rank `r = floor(n/2) + 1`, build the clique complex of the
/// close-pair graph, verify every support edge is close (else the chart
/// does not cover the polyhedron), collapse the clique complex below `r`,
/// solve `boundary(eta) = xi` inside it, and sum the kernels with the
/// model-space normalization. On real configurations this equals the
/// generalized volume; on complex ones it is the holomorphic extension,
/// and `model` names the real space being extended.
pub fn phi_via_collapse(
    poly: &CyclePolyhedron,
    a: &Configuration,
    model: Space,
    quad: &QuadratureSpec,
) -> Result<PhiReport, PolyhedraError> {
    check_vertex_count(poly, a)?;
    if !model.is_real() {
        return Err(PolyhedraError::BadModel);
    }
    if a.space().is_real() && a.space() != model {
        return Err(PolyhedraError::BadModel);
    }
    let n = poly.n();
    if n < 3 {
        return Err(PolyhedraError::DimensionTooSmall { n });
    }
    let r = (n / 2 + 1) as u32;
    let g = gram(a)?;
    let kappa = select_kappa(&g, r)?;
    let close = threshold_graph(&g, kappa.log2_kappa);
    let k_l = clique_complex(a.m(), &close)?;
    for (u, v) in poly.edges() {
        let edge = Simplex::new(vec![u, v]).expect("ascending pair");
        if !k_l.contains(&edge) {
            return Err(PolyhedraError::KappaEdgeConflict { u, v });
        }
    }
    let ordering = build_hereditary_ordering(&k_l, &g, TieBreak::LexMin)?;
    let seq = collapse_below(&k_l, &ordering, r)?;
    let eta = solve_bounding_chain(&k_l, poly.xi())?;
    let scale = Complex64::new(2.0, 0.0) / (nu_pow(model, n) * gamma_half(n as u32 + 1));
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0f64;
    for (s, c) in eta.iter() {
        let coeff = c.to_f64().expect("rational coefficient fits in f64");
        if coeff == 0.0 {
            continue;
        }
        let points = simplex_points(s, a);
        let f = volume_kernel(&points, quad)?;
        value += f.value() * coeff;
        error += coeff.abs() * f.error_estimate;
    }
    value *= scale;
    error *= scale.norm();
    Ok(PhiReport {
        re: value.re,
        im: value.im,
        error_estimate: error,
        log2_kappa: kappa.log2_kappa,
        close_edges: close.len(),
        complex_size: k_l.len(),
        collapse_steps: seq.steps.len(),
        residual_dim: seq.residual.dim(),
        eta_terms: eta.term_count(),
    })
}

/// The boundary of the solid tetrahedron on vertices 1..4: the smallest
/// 2-cycle, bounding a one-term chain.
pub fn tetrahedron_boundary() -> CyclePolyhedron {
    let xi = Chain::oriented_term(&[1, 2, 3, 4], 1).boundary();
    CyclePolyhedron::new(4, xi).expect("tetrahedron boundary is a cycle")
}

/// The octahedron 2-cycle on opposite vertex pairs (1,2), (3,4), (5,6): one
/// triangle per choice of a vertex from each pair, signed by the parity of
/// second choices.
pub fn octahedron() -> CyclePolyhedron {
    let mut xi = Chain::zero(2);
    for (i, si) in [(1u32, 1i64), (2, -1)] {
        for (j, sj) in [(3u32, 1i64), (4, -1)] {
            for (k, sk) in [(5u32, 1i64), (6, -1)] {
                xi = xi
                    .add(&Chain::oriented_term(&[i, j, k], si * sj * sk))
                    .expect("matching degrees");
            }
        }
    }
    CyclePolyhedron::new(6, xi).expect("octahedron cycle closes")
}
