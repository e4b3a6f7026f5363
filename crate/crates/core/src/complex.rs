//! Finite abstract simplicial complexes on `{1, ..., m}`.
//!
//! A complex is downward closed and always contains the empty simplex. The
//! ambient bound `m` is carried for clique enumeration and coface scans;
//! vertices of `{1, ..., m}` need not all be members (none of the operations
//! require it, and a flag records when they all are).

use crate::simplex::Simplex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;

/// A downward-closed set of simplices on the ambient vertex set `{1, ..., m}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Complex {
    m: u32,
    simplices: BTreeSet<Simplex>,
}

impl Complex {
    /// The complex containing only the empty simplex.
    pub fn trivial(m: u32) -> Self {
        let mut simplices = BTreeSet::new();
        simplices.insert(Simplex::empty());
        Complex { m, simplices }
    }

    /// Downward closure of a set of generators.
    pub fn from_maximal<I: IntoIterator<Item = Simplex>>(m: u32, generators: I) -> Self {
        let mut k = Complex::trivial(m);
        for g in generators {
            k.insert_closure(&g);
        }
        k
    }

    /// Adopts a set already known to be downward closed (and containing the
    /// empty simplex). Used by builders that enumerate closed families
    /// directly, where re-closing every member would be quadratic waste.
    pub(crate) fn from_closed_set(m: u32, simplices: BTreeSet<Simplex>) -> Self {
        debug_assert!(simplices.contains(&Simplex::empty()));
        debug_assert!(simplices
            .iter()
            .all(|s| s.max_vertex().unwrap_or(0) <= m));
        let k = Complex { m, simplices };
        debug_assert!(k.is_downward_closed());
        k
    }

    /// Inserts a simplex together with all of its faces.
    pub fn insert_closure(&mut self, s: &Simplex) {
        if let Some(top) = s.max_vertex() {
            self.m = self.m.max(top);
        }
        for f in s.faces() {
            self.simplices.insert(f);
        }
    }

    /// Ambient vertex bound.
    pub fn ambient(&self) -> u32 {
        self.m
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    /// Highest simplex dimension; -1 when only the empty simplex is present.
    pub fn dim(&self) -> i32 {
        self.simplices.iter().map(Simplex::dim).max().unwrap_or(-1)
    }

    /// Number of simplices, the empty simplex included.
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.len() <= 1
    }

    /// All simplices including the empty one, in lexicographic bookkeeping order.
    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    /// All nonempty simplices.
    pub fn nonempty_simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(|s| !s.is_empty())
    }

    pub fn simplices_of_dim(&self, d: i32) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.dim() == d)
    }

    /// Member vertices (as ids).
    pub fn vertex_ids(&self) -> Vec<u32> {
        self.simplices_of_dim(0)
            .map(|s| s.vertices()[0])
            .collect()
    }

    /// True when every vertex of `{1, ..., m}` is a member.
    pub fn has_all_vertices(&self) -> bool {
        self.simplices_of_dim(0).count() as u32 == self.m
    }

    /// Member edges as ordered pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.simplices_of_dim(1)
            .map(|s| (s.vertices()[0], s.vertices()[1]))
            .collect()
    }

    /// The cofaces of `s` of dimension `dim(s) + 1`.
    pub fn cofacets(&self, s: &Simplex) -> Vec<Simplex> {
        let mut out = Vec::new();
        for v in 1..=self.m {
            if let Some(t) = s.with_vertex(v) {
                if self.simplices.contains(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    /// Whether `s` has no proper coface in the complex.
    pub fn is_maximal(&self, s: &Simplex) -> bool {
        self.cofacets(s).is_empty()
    }

    /// Inclusion-maximal simplices.
    pub fn maximal_simplices(&self) -> Vec<Simplex> {
        self.simplices
            .iter()
            .filter(|s| !s.is_empty() && self.is_maximal(s))
            .cloned()
            .collect()
    }

    /// Removes a simplex without touching its faces. The collapse layer only
    /// calls this on pairs it has verified to be free, which keeps the set
    /// downward closed.
    pub fn remove(&mut self, s: &Simplex) -> bool {
        self.simplices.remove(s)
    }

    /// Downward-closure check (diagnostic; all constructors preserve it).
    pub fn is_downward_closed(&self) -> bool {
        self.simplices.iter().all(|s| {
            s.is_empty() || s.facets().all(|f| self.simplices.contains(&f))
        })
    }

    /// Euler characteristic over the nonempty simplices.
    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| if s.dim() % 2 == 0 { 1i64 } else { -1i64 })
            .sum()
    }

    /// Whether the 1-skeleton is connected (vacuously true without vertices).
    pub fn is_connected(&self) -> bool {
        let vertices = self.vertex_ids();
        if vertices.is_empty() {
            return true;
        }
        let index = |u: u32| vertices.binary_search(&u).expect("edge endpoint is a vertex");
        let mut parent: Vec<usize> = (0..vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (u, v) in self.edges() {
            let (a, b) = (find(&mut parent, index(u)), find(&mut parent, index(v)));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        (0..vertices.len()).all(|i| find(&mut parent, i) == root)
    }

    /// Whether the complex is determined by its 1-skeleton (every pairwise
    /// connected vertex set is a member).
    pub fn is_flag(&self) -> bool {
        let edge_set: BTreeSet<(u32, u32)> = self.edges().into_iter().collect();
        let vertices = self.vertex_ids();
        // Try to extend each member simplex by each vertex adjacent to all of
        // its vertices; flagness is exactly "every such extension is a member".
        for s in self.simplices.iter() {
            if s.dim() < 1 {
                continue;
            }
            for &v in &vertices {
                if s.contains_vertex(v) {
                    continue;
                }
                let adjacent_to_all = s.vertices().iter().all(|&u| {
                    let key = if u < v { (u, v) } else { (v, u) };
                    edge_set.contains(&key)
                });
                if adjacent_to_all && !self.simplices.contains(&s.with_vertex(v).unwrap()) {
                    return false;
                }
            }
        }
        true
    }

    /// The full simplex on `{1, ..., m}`.
    pub fn full_simplex(m: u32) -> Self {
        let all = Simplex::new((1..=m).collect()).expect("ascending by construction");
        Complex::from_maximal(m, [all])
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexRepr {
    m: u32,
    maximal: Vec<Simplex>,
}

/// Accepts the explicit `{m, maximal}` object, or a bare generator list for
/// hand-written inputs (the ambient bound then comes from the largest vertex).
#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexInput {
    Full(ComplexRepr),
    Bare(Vec<Simplex>),
}

impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ComplexRepr {
            m: self.m,
            maximal: self.maximal_simplices(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (m, maximal) = match ComplexInput::deserialize(deserializer)? {
            ComplexInput::Full(repr) => (repr.m, repr.maximal),
            ComplexInput::Bare(maximal) => {
                let m = maximal
                    .iter()
                    .filter_map(Simplex::max_vertex)
                    .max()
                    .unwrap_or(0);
                (m, maximal)
            }
        };
        if maximal.iter().any(|s| s.is_empty()) && maximal.len() > 1 {
            return Err(D::Error::custom("empty simplex listed alongside others"));
        }
        Ok(Complex::from_maximal(m, maximal))
    }
}
