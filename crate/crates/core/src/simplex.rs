//! Abstract simplices on the vertex set `{1, ..., m}`.
//!
//! A simplex is stored as its strictly increasing vertex list; the empty
//! simplex is allowed and has dimension -1. The ascending order is the
//! canonical orientation: a term given with its vertices in arbitrary order
//! picks up the sign of the sorting permutation (see [`Simplex::oriented`]).

use serde::de::{SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("simplex vertices must be 1-based and strictly increasing")]
    InvalidVertexList,
}

/// A face of the abstract simplex on `{1, ..., m}`.
///
/// Ordered by the derived lexicographic order on vertex lists; this is a
/// bookkeeping order for maps and serialization, not the hereditary order
/// used by collapses.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<u32>);

impl Simplex {
    /// The empty simplex (dimension -1).
    pub fn empty() -> Self {
        Simplex(Vec::new())
    }

    /// Builds a simplex from a strictly increasing, 1-based vertex list.
    pub fn new(vertices: Vec<u32>) -> Result<Self, SimplexError> {
        let increasing = vertices.windows(2).all(|w| w[0] < w[1]);
        if !increasing || vertices.first().is_some_and(|&v| v == 0) {
            return Err(SimplexError::InvalidVertexList);
        }
        Ok(Simplex(vertices))
    }

    /// Sorts an arbitrarily ordered vertex list into canonical form, returning
    /// the simplex and the sign of the sorting permutation. `None` when a
    /// vertex repeats (the degenerate simplex carries coefficient zero).
    pub fn oriented(vertices: &[u32]) -> Option<(Self, i32)> {
        let mut v = vertices.to_vec();
        let mut sign = 1i32;
        // Insertion sort, counting swaps; vertex lists are short.
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if v.windows(2).any(|w| w[0] == w[1]) || v.first().is_some_and(|&x| x == 0) {
            return None;
        }
        Some((Simplex(v), sign))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    /// Dimension: one less than the vertex count; -1 for the empty simplex.
    pub fn dim(&self) -> i32 {
        self.0.len() as i32 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_vertex(&self, u: u32) -> bool {
        self.0.binary_search(&u).is_ok()
    }

    /// Face relation (subset of vertices).
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains_vertex(*v))
    }

    /// The simplex with the vertex at position `j` removed.
    pub fn without_index(&self, j: usize) -> Simplex {
        let mut v = self.0.clone();
        v.remove(j);
        Simplex(v)
    }

    /// Codimension-one faces, in the order "omit vertex 0, omit vertex 1, ...".
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        (0..self.0.len()).map(|j| self.without_index(j))
    }

    /// Every face, the empty simplex and the simplex itself included.
    pub fn faces(&self) -> Vec<Simplex> {
        let mut out = vec![Simplex::empty()];
        for &v in &self.0 {
            let mut next = Vec::with_capacity(out.len() * 2);
            for f in &out {
                next.push(f.clone());
                let mut with = f.0.clone();
                with.push(v);
                next.push(Simplex(with));
            }
            out = next;
        }
        out
    }

    /// Extends by one vertex; `None` if the vertex is already present.
    pub fn with_vertex(&self, u: u32) -> Option<Simplex> {
        match self.0.binary_search(&u) {
            Ok(_) => None,
            Err(pos) => {
                let mut v = self.0.clone();
                v.insert(pos, u);
                Some(Simplex(v))
            }
        }
    }

    /// Vertex-set union.
    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut v: Vec<u32> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }

    pub fn max_vertex(&self) -> Option<u32> {
        self.0.last().copied()
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Simplex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Simplex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Simplex;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a strictly increasing list of 1-based vertex ids")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Simplex, A::Error> {
                let mut v = Vec::new();
                while let Some(x) = seq.next_element::<u32>()? {
                    v.push(x);
                }
                Simplex::new(v).map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_seq(V)
    }
}
