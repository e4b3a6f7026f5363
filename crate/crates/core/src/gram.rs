//! Gram matrices and their closeness structure.
//!
//! A Gram matrix here is an `m x m` symmetric complex matrix with unit
//! diagonal. The quantity that drives everything is the off-diagonal
//! closeness `|g_uv - 1|`, kept as `log2 |g_uv - 1|` (the logmag view, with
//! `-inf` for exact coincidence) because the guaranteed threshold range
//! `2^(-2 m^2 (r+1)) < kappa < 1` underflows floats long before the
//! mathematics stops working. All threshold logic runs in the log domain with
//! exact comparisons.
//!
//! From a matrix and a threshold `kappa` we build the graph whose edges are
//! the close pairs (`|g_uv - 1| < kappa`, strictly) and its clique complex.
//! [`select_kappa`] picks a dyadic threshold whose gap interval
//! `[log2 kappa - 4(r+1), log2 kappa]` avoids every logmag value, and
//! [`collapse_certificate`] runs the full pipeline: threshold, clique
//! complex, hereditary ordering, collapse below dimension `r`, replay
//! verification.

use crate::collapse::{
    build_hereditary_ordering, collapse_below, verify_collapse_detailed, CollapseError,
    CollapseSequence, TieBreak,
};
use crate::complex::Complex;
use crate::rng::{campaign_rng, standard_normal};
use crate::simplex::Simplex;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use thiserror::Error;

/// Width of the required logmag gap per unit of `r + 1`.
pub const GAP_WIDTH_PER_RANK: f64 = 4.0;

/// Default ceiling on the number of simplices a clique complex may have.
pub const DEFAULT_CLIQUE_BUDGET: usize = 1 << 21;

/// Tolerance for symmetry and unit-diagonal validation of supplied entries.
const ENTRY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GramError {
    #[error("gram matrix must be square and at least 1x1")]
    BadShape,
    #[error("gram matrix entries must be symmetric within {ENTRY_TOL}")]
    NotSymmetric,
    #[error("gram matrix diagonal entry {index} differs from 1 beyond {ENTRY_TOL}")]
    BadDiagonal { index: usize },
    #[error("logmag values must not be NaN")]
    NanLogmag,
    #[error("vertex index out of range")]
    BadIndex,
    #[error("clique enumeration exceeds the budget of {budget} simplices")]
    TooLarge { budget: usize },
    #[error("no threshold satisfies the closeness policy")]
    PolicyUnsatisfied,
    #[error("numerical rank {rank} exceeds the required bound {bound}")]
    RankTooLarge { rank: usize, bound: usize },
    #[error(transparent)]
    Collapse(#[from] CollapseError),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

/// Symmetric complex matrix with unit diagonal, carrying the logmag view of
/// its off-diagonal closeness. Entries may be absent (log-only mode, used for
/// synthetic threshold experiments at scales floats cannot represent).
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    m: usize,
    entries: Option<DMatrix<Complex64>>,
    logmag: Vec<f64>,
}

/// Index into the upper-triangle vector for `u < v`, both 1-based.
fn pair_index(u: u32, v: u32) -> usize {
    debug_assert!(0 < u && u < v);
    let (u, v) = (u as usize, v as usize);
    (v - 2) * (v - 1) / 2 + (u - 1)
}

impl GramMatrix {
    /// Builds from explicit entries, validating symmetry and the unit
    /// diagonal, then normalizing both exactly. The logmag view is derived
    /// from the symmetrized entries.
    pub fn from_entries(mut g: DMatrix<Complex64>) -> Result<Self, GramError> {
        let m = g.nrows();
        if m == 0 || g.ncols() != m {
            return Err(GramError::BadShape);
        }
        for u in 0..m {
            if (g[(u, u)] - Complex64::new(1.0, 0.0)).norm() > ENTRY_TOL {
                return Err(GramError::BadDiagonal { index: u + 1 });
            }
            for v in (u + 1)..m {
                if (g[(u, v)] - g[(v, u)]).norm() > ENTRY_TOL {
                    return Err(GramError::NotSymmetric);
                }
                let sym = (g[(u, v)] + g[(v, u)]) * 0.5;
                g[(u, v)] = sym;
                g[(v, u)] = sym;
            }
            g[(u, u)] = Complex64::new(1.0, 0.0);
        }
        let mut logmag = vec![0.0; m * (m - 1) / 2];
        for v in 2..=m as u32 {
            for u in 1..v {
                let q = g[(u as usize - 1, v as usize - 1)] - Complex64::new(1.0, 0.0);
                logmag[pair_index(u, v)] = q.norm().log2();
            }
        }
        Ok(GramMatrix {
            m,
            entries: Some(g),
            logmag,
        })
    }

    /// Log-only construction: upper-triangle values in the order (1,2), (1,3), (2,3),
    /// (1,4), ... `-inf` is allowed; NaN is rejected.
    pub fn from_logmag(m: usize, logmag: Vec<f64>) -> Result<Self, GramError> {
        if m == 0 || logmag.len() != m * (m - 1) / 2 {
            return Err(GramError::BadShape);
        }
        if logmag.iter().any(|x| x.is_nan()) {
            return Err(GramError::NanLogmag);
        }
        Ok(GramMatrix {
            m,
            entries: None,
            logmag,
        })
    }

    /// Log-only matrix with every off-diagonal closeness equal.
    pub fn uniform_logmag(m: usize, value: f64) -> Self {
        let len = if m == 0 { 0 } else { m * (m - 1) / 2 };
        GramMatrix {
            m: m.max(1),
            entries: None,
            logmag: vec![value; len],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_entries(&self) -> bool {
        self.entries.is_some()
    }

    pub fn entries(&self) -> Option<&DMatrix<Complex64>> {
        self.entries.as_ref()
    }

    /// Entry accessor, 1-based.
    pub fn entry(&self, u: u32, v: u32) -> Option<Complex64> {
        self.entries
            .as_ref()
            .map(|g| g[(u as usize - 1, v as usize - 1)])
    }

    /// `log2 |g_uv - 1|` for `u != v`, 1-based, order-insensitive.
    pub fn logmag(&self, u: u32, v: u32) -> f64 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.logmag[pair_index(a, b)]
    }

    /// All logmag values of the upper triangle.
    pub fn logmag_values(&self) -> &[f64] {
        &self.logmag
    }

    /// Numerical rank of the entries with the relative singular-value cutoff
    /// `10^-8 * sigma_max`. `None` in log-only mode.
    pub fn numerical_rank(&self) -> Option<usize> {
        let g = self.entries.as_ref()?;
        let sv = g.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        if max == 0.0 {
            return Some(0);
        }
        Some(sv.iter().filter(|&&s| s > 1e-8 * max).count())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LogVal {
    Num(f64),
    Tag(String),
}

#[derive(Serialize, Deserialize)]
struct GramRepr {
    m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<(u32, u32, f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    logmag: Option<Vec<(u32, u32, LogVal)>>,
}

impl Serialize for GramMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let entries = self.entries.as_ref().map(|g| {
            let mut rows = Vec::new();
            for v in 2..=self.m as u32 {
                for u in 1..v {
                    let e = g[(u as usize - 1, v as usize - 1)];
                    rows.push((u, v, e.re, e.im));
                }
            }
            rows
        });
        let mut logmag = Vec::new();
        for v in 2..=self.m as u32 {
            for u in 1..v {
                let x = self.logmag[pair_index(u, v)];
                let val = if x == f64::NEG_INFINITY {
                    LogVal::Tag("-inf".to_string())
                } else {
                    LogVal::Num(x)
                };
                logmag.push((u, v, val));
            }
        }
        GramRepr {
            m: self.m,
            entries,
            logmag: Some(logmag),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GramMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GramRepr::deserialize(deserializer)?;
        let m = repr.m;
        if m == 0 {
            return Err(D::Error::custom("m must be positive"));
        }
        let expected = m * (m - 1) / 2;
        let entries = match &repr.entries {
            None => None,
            Some(rows) => {
                let mut g = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
                for u in 0..m {
                    g[(u, u)] = Complex64::new(1.0, 0.0);
                }
                for &(u, v, re, im) in rows {
                    if u == 0 || v == 0 || u as usize > m || v as usize > m || u == v {
                        return Err(D::Error::custom("bad entry index"));
                    }
                    let e = Complex64::new(re, im);
                    g[(u as usize - 1, v as usize - 1)] = e;
                    g[(v as usize - 1, u as usize - 1)] = e;
                }
                Some(g)
            }
        };
        let logmag = match repr.logmag {
            Some(rows) => {
                if rows.len() != expected {
                    return Err(D::Error::custom("incomplete logmag triangle"));
                }
                let mut values = vec![f64::NAN; expected];
                for (u, v, val) in rows {
                    if u == 0 || v == 0 || u >= v || v as usize > m {
                        return Err(D::Error::custom("bad logmag index"));
                    }
                    let x = match val {
                        LogVal::Num(x) => x,
                        LogVal::Tag(t) if t == "-inf" => f64::NEG_INFINITY,
                        LogVal::Tag(t) => {
                            return Err(D::Error::custom(format!("bad logmag value {t:?}")))
                        }
                    };
                    values[pair_index(u, v)] = x;
                }
                if values.iter().any(|x| x.is_nan()) {
                    return Err(D::Error::custom("incomplete logmag triangle"));
                }
                Some(values)
            }
            None => None,
        };
        match (entries, logmag) {
            (Some(g), Some(values)) => {
                let mut gram = GramMatrix::from_entries(g).map_err(D::Error::custom)?;
                // The stored log view is authoritative for threshold logic.
                gram.logmag = values;
                Ok(gram)
            }
            (Some(g), None) => GramMatrix::from_entries(g).map_err(D::Error::custom),
            (None, Some(values)) => GramMatrix::from_logmag(m, values).map_err(D::Error::custom),
            (None, None) => Err(D::Error::custom("gram matrix needs entries or logmag")),
        }
    }
}

/// Chosen dyadic threshold: `kappa = 2^log2_kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub log2_kappa: f64,
    pub r: u32,
    /// Witness that the gap interval holds (see [`verify_gap`]).
    pub gap_ok: bool,
}

fn gap_width(r: u32) -> f64 {
    GAP_WIDTH_PER_RANK * f64::from(r + 1)
}

/// Exact log-domain gap check: every logmag value lies strictly above
/// `log2_kappa` or strictly below `log2_kappa - 4(r+1)`.
pub fn verify_gap(g: &GramMatrix, log2_kappa: f64, r: u32) -> bool {
    let w = gap_width(r);
    g.logmag_values()
        .iter()
        .all(|&x| x > log2_kappa || x < log2_kappa - w)
}

/// Selects the largest workable dyadic threshold for the given `r`.
///
/// Scans integer exponents `beta = -1, -2, ...` down to the guaranteed range
/// floor `-2 m^2 (r+1)` (exclusive) and returns the first `beta` whose gap
/// interval `[beta - 4(r+1), beta]` avoids every logmag value. When
/// adversarially placed values block every integer exponent, falls back to
/// the exact sweep over the blocked-interval complement, which is never empty
/// by a length count: the values block at most `2 (m^2 - m)(r+1)` of the
/// `2 m^2 (r+1)` available exponent range.
pub fn select_kappa(g: &GramMatrix, r: u32) -> Result<KappaResult, GramError> {
    let m = g.m() as f64;
    let w = gap_width(r);
    let lower = -2.0 * m * m * f64::from(r + 1);
    let feasible = |beta: f64| {
        beta < 0.0
            && beta > lower
            && g.logmag_values().iter().all(|&x| x > beta || x < beta - w)
    };
    let mut beta = -1.0;
    while beta > lower {
        if feasible(beta) {
            return Ok(KappaResult {
                log2_kappa: beta,
                r,
                gap_ok: verify_gap(g, beta, r),
            });
        }
        beta -= 1.0;
    }
    // Exact sweep: subtract the blocked intervals [x, x + w] from (lower, 0)
    // and take the midpoint of the highest remaining gap.
    let mut blockers: Vec<f64> = g
        .logmag_values()
        .iter()
        .copied()
        .filter(|&x| x > lower - w && x < 0.0)
        .collect();
    blockers.sort_by(|a, b| b.partial_cmp(a).expect("no NaN logmag"));
    let mut upper = 0.0f64;
    for &x in &blockers {
        let block_top = x + w;
        if block_top < upper {
            let candidate = (upper + block_top) / 2.0;
            if feasible(candidate) {
                return Ok(KappaResult {
                    log2_kappa: candidate,
                    r,
                    gap_ok: verify_gap(g, candidate, r),
                });
            }
        }
        upper = upper.min(x);
    }
    let candidate = (upper + lower) / 2.0;
    if feasible(candidate) {
        return Ok(KappaResult {
            log2_kappa: candidate,
            r,
            gap_ok: verify_gap(g, candidate, r),
        });
    }
    Err(GramError::Internal(
        "threshold selection found no gap; the length count forbids this".into(),
    ))
}

/// Edges of the closeness graph: pairs with `log2 |g_uv - 1| < log2_kappa`,
/// strictly (a value exactly at the threshold is not an edge).
pub fn threshold_graph(g: &GramMatrix, log2_kappa: f64) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for v in 2..=g.m() as u32 {
        for u in 1..v {
            if g.logmag(u, v) < log2_kappa {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// The clique (flag) complex of a graph on `{1, ..., m}`: every vertex is a
/// member, and a simplex is a set of pairwise adjacent vertices.
pub fn clique_complex(m: usize, edges: &[(u32, u32)]) -> Result<Complex, GramError> {
    clique_complex_with_budget(m, edges, DEFAULT_CLIQUE_BUDGET)
}

pub fn clique_complex_with_budget(
    m: usize,
    edges: &[(u32, u32)],
    budget: usize,
) -> Result<Complex, GramError> {
    let mut adjacent = vec![false; (m + 1) * (m + 1)];
    for &(u, v) in edges {
        if u == 0 || v == 0 || u as usize > m || v as usize > m || u == v {
            return Err(GramError::BadIndex);
        }
        adjacent[u as usize * (m + 1) + v as usize] = true;
        adjacent[v as usize * (m + 1) + u as usize] = true;
    }
    let mut simplices: BTreeSet<Simplex> = BTreeSet::new();
    simplices.insert(Simplex::empty());
    // Grow cliques by their largest vertex; each clique is produced once.
    let mut frontier: Vec<Vec<u32>> = (1..=m as u32).map(|v| vec![v]).collect();
    let mut count = 1 + frontier.len();
    if count > budget {
        return Err(GramError::TooLarge { budget });
    }
    for c in &frontier {
        simplices.insert(Simplex::new(c.clone()).expect("ascending"));
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for clique in &frontier {
            let top = *clique.last().expect("cliques are nonempty");
            for v in (top + 1)..=(m as u32) {
                let ok = clique
                    .iter()
                    .all(|&u| adjacent[u as usize * (m + 1) + v as usize]);
                if ok {
                    let mut bigger = clique.clone();
                    bigger.push(v);
                    count += 1;
                    if count > budget {
                        return Err(GramError::TooLarge { budget });
                    }
                    simplices.insert(Simplex::new(bigger.clone()).expect("ascending"));
                    next.push(bigger);
                }
            }
        }
        frontier = next;
    }
    Ok(Complex::from_closed_set(m as u32, simplices))
}

/// Random Gram matrix of rank at most `rank_bound`: complex Gaussian columns
/// in `C^rank_bound`, rejected while nearly isotropic (`|<z,z>| < 1e-6`),
/// normalized onto the quadric, assembled as `A^t A`. Reproducible by seed.
pub fn random_low_rank_gram(m: usize, rank_bound: usize, seed: u64) -> GramMatrix {
    assert!(rank_bound >= 1 && rank_bound <= m, "1 <= rank_bound <= m");
    let mut rng = campaign_rng(seed);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for _ in 0..m {
        loop {
            let z: Vec<Complex64> = (0..rank_bound)
                .map(|_| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
                .collect();
            let q: Complex64 = z.iter().map(|x| x * x).sum();
            if q.norm() < 1e-6 {
                continue;
            }
            let root = q.sqrt();
            columns.push(z.into_iter().map(|x| x / root).collect());
            break;
        }
    }
    let g = DMatrix::from_fn(m, m, |u, v| {
        (0..rank_bound).map(|j| columns[u][j] * columns[v][j]).sum()
    });
    GramMatrix::from_entries(g).expect("constructed symmetric with unit diagonal")
}

/// Closeness policy for the disjoint-union observation: every pair must be
/// farther than `kappa` or closer than `kappa / ratio`.
#[derive(Clone, Copy, Debug)]
pub struct MetricPolicy {
    pub log2_ratio: f64,
    /// Strict upper bound on `log2 kappa`, when the model requires one.
    pub log2_kappa_max: Option<f64>,
}

impl MetricPolicy {
    /// Spherical policy: ratio 4 (doubling a spherical distance at most
    /// quadruples `1 - cos`).
    pub fn sphere() -> Self {
        MetricPolicy {
            log2_ratio: 2.0,
            log2_kappa_max: None,
        }
    }

    /// Hyperbolic policy: ratio 6 and `kappa < 1` (doubling a hyperbolic
    /// distance at most sextuples `cosh - 1` while `cosh - 1 <= 1`).
    pub fn hyperbolic() -> Self {
        MetricPolicy {
            log2_ratio: 6.0f64.log2(),
            log2_kappa_max: Some(0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointUnionReport {
    pub log2_kappa: f64,
    pub is_disjoint_union: bool,
    pub component_count: usize,
}

/// Tests the disjoint-union observation: at every policy-compliant
/// threshold the closeness graph must be transitive, making the clique
/// complex a disjoint union of full simplices.
///
/// Candidate thresholds are the midpoints of the compliantly wide gaps
/// between consecutive closeness values, plus one above and one below
/// everything (the edge cases where the complex degenerates to one simplex
/// or to isolated vertices). Every compliant candidate is checked; the first
/// failure is returned as the witness, otherwise the report carries the
/// most informative candidate (the highest gap midpoint when one exists).
///
/// With these policies a compliant threshold always exists (below every
/// finite closeness value works), so the policy error is defensive.
pub fn metric_disjoint_union_check(
    g: &GramMatrix,
    policy: &MetricPolicy,
) -> Result<DisjointUnionReport, GramError> {
    let c = policy.log2_ratio;
    let mut finite: Vec<f64> = g
        .logmag_values()
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .collect();
    finite.sort_by(|a, b| a.partial_cmp(b).expect("no NaN logmag"));
    finite.dedup();
    let mut candidates: Vec<f64> = Vec::new();
    for pair in finite.windows(2).rev() {
        if pair[1] - pair[0] > c {
            candidates.push((pair[0] + c + pair[1]) / 2.0);
        }
    }
    if let (Some(&max), None) = (finite.last(), policy.log2_kappa_max) {
        candidates.push(max + c + 1.0);
    }
    match finite.first() {
        Some(&min) => candidates.push(min - 1.0),
        None => candidates.push(-1.0),
    }
    if let Some(cap) = policy.log2_kappa_max {
        candidates.retain(|&k| k < cap);
    }
    let compliant = |k: f64| g.logmag_values().iter().all(|&x| x > k || x < k - c);
    let mut preferred: Option<DisjointUnionReport> = None;
    for k in candidates {
        if !compliant(k) {
            continue;
        }
        let edges = threshold_graph(g, k);
        let report = DisjointUnionReport {
            log2_kappa: k,
            is_disjoint_union: edges_are_transitive(g.m(), &edges),
            component_count: component_count(g.m(), &edges),
        };
        if !report.is_disjoint_union {
            return Ok(report);
        }
        preferred.get_or_insert(report);
    }
    preferred.ok_or(GramError::PolicyUnsatisfied)
}

fn edges_are_transitive(m: usize, edges: &[(u32, u32)]) -> bool {
    let mut adjacent = vec![false; (m + 1) * (m + 1)];
    for &(u, v) in edges {
        adjacent[u as usize * (m + 1) + v as usize] = true;
        adjacent[v as usize * (m + 1) + u as usize] = true;
    }
    let comp = component_labels(m, edges);
    for u in 1..=m {
        for v in (u + 1)..=m {
            if comp[u] == comp[v] && !adjacent[u * (m + 1) + v] {
                return false;
            }
        }
    }
    true
}

fn component_labels(m: usize, edges: &[(u32, u32)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..=m).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        parent[a] = b;
    }
    (0..=m).map(|x| find(&mut parent, x)).collect()
}

fn component_count(m: usize, edges: &[(u32, u32)]) -> usize {
    let labels = component_labels(m, edges);
    let mut roots: Vec<usize> = (1..=m).map(|u| labels[u]).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Everything [`collapse_certificate`] produces for one Gram matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateReport {
    pub m: usize,
    pub r: u32,
    pub kappa: KappaResult,
    pub numerical_rank: Option<usize>,
    pub edge_count: usize,
    pub simplex_count: usize,
    pub tie_break: TieBreak,
    pub ordering_hash: String,
    pub step_count: usize,
    pub residual_dim: i32,
    pub replay_ok: bool,
    pub sequence: CollapseSequence,
}

/// Full low-rank collapse pipeline for one Gram matrix.
///
/// Selects a threshold with [`select_kappa`], builds the clique complex of
/// the closeness graph, orders it hereditarily, collapses everything of
/// dimension at least `r`, and replays the certificate (free-pair legality
/// and homology preservation). When entries are present the numerical rank
/// is required to be at most `2r`; in log-only mode the rank bound is the
/// caller's assertion.
pub fn collapse_certificate(g: &GramMatrix, r: u32) -> Result<CertificateReport, GramError> {
    let numerical_rank = g.numerical_rank();
    if let Some(rank) = numerical_rank {
        if rank > 2 * r as usize {
            return Err(GramError::RankTooLarge {
                rank,
                bound: 2 * r as usize,
            });
        }
    }
    let kappa = select_kappa(g, r)?;
    let edges = threshold_graph(g, kappa.log2_kappa);
    let complex = clique_complex(g.m(), &edges)?;
    let tie_break = TieBreak::LexMin;
    let ordering = build_hereditary_ordering(&complex, g, tie_break)?;
    let sequence = collapse_below(&complex, &ordering, r)?;
    let replay_ok = verify_collapse_detailed(&complex, &sequence).is_ok();
    Ok(CertificateReport {
        m: g.m(),
        r,
        kappa,
        numerical_rank,
        edge_count: edges.len(),
        simplex_count: complex.len(),
        tie_break,
        ordering_hash: format!("{:016x}", ordering.order_hash()),
        step_count: sequence.steps.len(),
        residual_dim: sequence.residual.dim(),
        replay_ok,
        sequence,
    })
}
