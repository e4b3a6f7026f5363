//! Desk-scale verification toolkit for the volume constancy of small-edge
//! flexible polyhedra in spherical and hyperbolic space.
//!
//! The library is organized bottom-up:
//!
//! * [`simplex`], [`chain`], [`complex`], [`homology`] — exact simplicial
//!   machinery over arbitrary-precision rationals: boundaries, cochains,
//!   homology ranks, bounding-chain solving.
//! * [`collapse`] — hereditary orderings and certified collapse sequences.
//! * [`gram`] — Gram matrices, closeness-threshold graphs and their clique
//!   complexes, dyadic threshold selection, and the low-rank collapse
//!   certificate pipeline.
//! * [`geometry`] — points on the complex quadric, the spherical and
//!   hyperbolic models inside it, and the analytic volume kernel evaluated by
//!   tensor Gauss-Laguerre quadrature or Monte Carlo.
//! * [`polyhedra`] — cycle polyhedra, generalized oriented volume, and the
//!   collapse-backed analytic-continuation pipeline for the same quantity.
//! * [`flex`] — predictor-corrector tracing of isometric flexes, the
//!   line-symmetric octahedron construction, and the volume-constancy report.
//!
//! All randomized entry points take explicit seeds and produce bit-identical
//! results on repeated runs; see [`rng`] for the seeding scheme.

pub mod chain;
pub mod collapse;
pub mod complex;
pub mod flex;
pub mod geometry;
pub mod gram;
pub mod homology;
pub mod polyhedra;
pub mod rng;
pub mod simplex;

pub use chain::{Chain, Cochain};
pub use complex::Complex;
pub use simplex::Simplex;

/// Schema tag embedded in every serialized artifact.
pub const SCHEMA_VERSION: &str = "bellows/1";
