//! Chains and cochains.
//!
//! A chain of degree `k` is a finite formal combination of `k`-simplices with
//! exact rational coefficients. Integer chains are the common case and stay
//! exact (an arbitrary-precision rational with denominator one is an
//! arbitrary-precision integer); the bounding-chain solver may legitimately
//! return non-integer coefficients, and both kinds flow through the same type.
//!
//! The boundary operator follows the canonical ascending orientation:
//! `d[u_0, ..., u_k] = sum_j (-1)^j [u_0, ..., omit u_j, ..., u_k]`.
//!
//! A cochain of degree `k` assigns a complex number to each `k`-simplex
//! (zero by default) and is evaluated on chains linearly; the coboundary is
//! adjoint to the boundary: `(df)(c) = f(dc)`.

use crate::complex::Complex;
use crate::simplex::Simplex;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("degree mismatch: chain has degree {expected}, term has degree {got}")]
    DegreeMismatch { expected: i32, got: i32 },
    #[error("cannot parse exact coefficient {0:?}")]
    BadCoefficient(String),
}

/// Exact coefficient type for chains.
pub type Coeff = BigRational;

/// Coefficient from a machine integer.
pub fn coeff_int(k: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(k))
}

/// A formal rational combination of simplices of a fixed dimension.
#[derive(Clone, PartialEq, Eq)]
pub struct Chain {
    degree: i32,
    terms: BTreeMap<Simplex, Coeff>,
}

impl Chain {
    /// The zero chain of the given degree.
    pub fn zero(degree: i32) -> Self {
        Chain {
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// A single canonical term.
    pub fn singleton(simplex: Simplex, coeff: Coeff) -> Self {
        let mut c = Chain::zero(simplex.dim());
        c.add_term(simplex, coeff).expect("degree matches by construction");
        c
    }

    /// A term with vertices in arbitrary order; the coefficient picks up the
    /// sign of the sorting permutation. Repeated vertices give the zero chain
    /// of the stated degree.
    pub fn oriented_term(vertices: &[u32], coeff: i64) -> Self {
        match Simplex::oriented(vertices) {
            Some((s, sign)) => Chain::singleton(s, coeff_int(coeff * i64::from(sign))),
            None => Chain::zero(vertices.len() as i32 - 1),
        }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff * simplex`, cancelling exactly.
    pub fn add_term(&mut self, simplex: Simplex, coeff: Coeff) -> Result<(), ChainError> {
        if simplex.dim() != self.degree {
            return Err(ChainError::DegreeMismatch {
                expected: self.degree,
                got: simplex.dim(),
            });
        }
        if coeff.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(simplex.clone()).or_insert_with(Coeff::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&simplex);
        }
        Ok(())
    }

    /// Exact coefficient of a simplex (zero when absent).
    pub fn coeff(&self, simplex: &Simplex) -> Coeff {
        self.terms.get(simplex).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, &Coeff)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Chain) -> Result<Chain, ChainError> {
        if other.degree != self.degree && !other.is_zero() && !self.is_zero() {
            return Err(ChainError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Chain {
        let mut out = Chain::zero(self.degree);
        for (s, c) in &self.terms {
            out.terms.insert(s.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain, ChainError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Coeff) -> Chain {
        if k.is_zero() {
            return Chain::zero(self.degree);
        }
        let mut out = Chain::zero(self.degree);
        for (s, c) in &self.terms {
            out.terms.insert(s.clone(), c.clone() * k.clone());
        }
        out
    }

    /// True when every coefficient has denominator one.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// The boundary chain, one degree lower. Vertices have zero boundary.
    pub fn boundary(&self) -> Chain {
        let mut out = Chain::zero(self.degree - 1);
        for (s, c) in &self.terms {
            if s.dim() <= 0 {
                continue;
            }
            for (j, facet) in s.facets().enumerate() {
                let sign = if j % 2 == 0 { c.clone() } else { -c.clone() };
                out.add_term(facet, sign).expect("facet degree is degree - 1");
            }
        }
        out
    }

    /// Whether the boundary vanishes exactly.
    pub fn is_cycle(&self) -> bool {
        self.boundary().is_zero()
    }

    /// The smallest simplicial complex containing every term: all terms, all
    /// their faces, and the empty simplex.
    pub fn support(&self) -> Complex {
        let m = self
            .terms
            .keys()
            .filter_map(Simplex::max_vertex)
            .max()
            .unwrap_or(0);
        Complex::from_maximal(m, self.terms.keys().cloned())
    }

    /// Sum of absolute values of the coefficients, as a float.
    pub fn l1_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0_({})", self.degree);
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{:?}", coeff_string(c), s)?;
        }
        Ok(())
    }
}

fn coeff_string(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn parse_coeff(s: &str) -> Result<Coeff, ChainError> {
    let bad = || ChainError::BadCoefficient(s.to_string());
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(BigRational::from_integer(n))
        }
        Some((num, den)) => {
            let n: BigInt = num.parse().map_err(|_| bad())?;
            let d: BigInt = den.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    simplex: Simplex,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
struct ChainRepr {
    degree: i32,
    terms: Vec<TermRepr>,
}

/// Accepts the explicit `{degree, terms}` object, or a bare term list for
/// hand-written inputs (the degree then comes from the first term).
#[derive(Deserialize)]
#[serde(untagged)]
enum ChainInput {
    Full(ChainRepr),
    Bare(Vec<TermRepr>),
}

impl Serialize for Chain {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(s, c)| TermRepr {
                simplex: s.clone(),
                coeff: coeff_string(c),
            })
            .collect();
        ChainRepr {
            degree: self.degree,
            terms,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Chain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (degree, terms) = match ChainInput::deserialize(deserializer)? {
            ChainInput::Full(repr) => (repr.degree, repr.terms),
            ChainInput::Bare(terms) => {
                let degree = terms.first().map(|t| t.simplex.dim()).unwrap_or(-1);
                (degree, terms)
            }
        };
        let mut chain = Chain::zero(degree);
        for t in terms {
            let c = parse_coeff(&t.coeff).map_err(D::Error::custom)?;
            chain.add_term(t.simplex, c).map_err(D::Error::custom)?;
        }
        Ok(chain)
    }
}

/// A complex-valued function on the simplices of one dimension.
#[derive(Clone, Debug)]
pub struct Cochain {
    degree: i32,
    values: BTreeMap<Simplex, Complex64>,
}

impl Cochain {
    pub fn new(degree: i32) -> Self {
        Cochain {
            degree,
            values: BTreeMap::new(),
        }
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn set(&mut self, simplex: Simplex, value: Complex64) -> Result<(), ChainError> {
        if simplex.dim() != self.degree {
            return Err(ChainError::DegreeMismatch {
                expected: self.degree,
                got: simplex.dim(),
            });
        }
        self.values.insert(simplex, value);
        Ok(())
    }

    /// Value on a canonical simplex; unset simplices evaluate to zero.
    pub fn value(&self, simplex: &Simplex) -> Complex64 {
        self.values
            .get(simplex)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Linear evaluation on a chain, coefficients converted to floats.
    pub fn evaluate(&self, chain: &Chain) -> Result<Complex64, ChainError> {
        if chain.degree() != self.degree && !chain.is_zero() {
            return Err(ChainError::DegreeMismatch {
                expected: self.degree,
                got: chain.degree(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, c) in chain.iter() {
            let x = c.to_f64().unwrap_or(f64::NAN);
            acc += self.value(s) * x;
        }
        Ok(acc)
    }

    /// Coboundary relative to a complex: the degree-(k+1) cochain whose value
    /// on each (k+1)-simplex of `k` is the evaluation on that simplex's
    /// boundary. Adjoint to [`Chain::boundary`].
    pub fn coboundary(&self, complex: &Complex) -> Cochain {
        let mut out = Cochain::new(self.degree + 1);
        for s in complex.simplices_of_dim(self.degree + 1) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, facet) in s.facets().enumerate() {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += self.value(&facet) * sign;
            }
            if acc.norm_sqr() != 0.0 {
                out.values.insert(s.clone(), acc);
            }
        }
        out
    }
}
