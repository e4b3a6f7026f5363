//! Exact rational linear algebra on boundary matrices: homology ranks and
//! bounding-chain solving.
//!
//! Everything here is exact. Ranks are computed by Gaussian elimination over
//! arbitrary-precision rationals, so the reported Betti numbers are the
//! rational Betti numbers with no tolerance anywhere. The bounding-chain
//! solver returns a particular solution of the boundary system; coefficients
//! may be non-integer rationals, which is acceptable for volume evaluation.

use crate::chain::{Chain, Coeff};
use crate::complex::Complex;
use crate::simplex::Simplex;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("chain has terms outside the complex")]
    NotSupported,
    #[error("no bounding chain exists in the complex")]
    NoBoundingChain,
}

/// Rank of a dense rational matrix, by elimination.
fn rational_rank(mut rows: Vec<Vec<Coeff>>) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..nrows).find(|&r| !rows[r][col].is_zero());
        let Some(p) = pivot else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].clone();
        for r in 0..nrows {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / inv.clone();
            for c in col..ncols {
                if rows[rank][c].is_zero() {
                    continue;
                }
                let sub = rows[rank][c].clone() * factor.clone();
                rows[r][c] -= sub;
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

/// The matrix of the boundary operator from `d`-chains to `(d-1)`-chains of
/// `k`, with rows and columns indexed by the sorted simplex lists. For `d = 0`
/// the row space is empty (vertices have zero boundary).
fn boundary_matrix(k: &Complex, d: i32) -> (Vec<Simplex>, Vec<Simplex>, Vec<Vec<Coeff>>) {
    let cols: Vec<Simplex> = k.simplices_of_dim(d).cloned().collect();
    let rows: Vec<Simplex> = if d >= 1 {
        k.simplices_of_dim(d - 1).cloned().collect()
    } else {
        Vec::new()
    };
    let row_index = |s: &Simplex| rows.binary_search(s).expect("facet is in the complex");
    let mut mat = vec![vec![Coeff::zero(); cols.len()]; rows.len()];
    if d >= 1 {
        for (ci, s) in cols.iter().enumerate() {
            for (j, facet) in s.facets().enumerate() {
                let sign = if j % 2 == 0 { Coeff::one() } else { -Coeff::one() };
                mat[row_index(&facet)][ci] = sign;
            }
        }
    }
    (rows, cols, mat)
}

/// Unreduced rational Betti numbers `(b_0, ..., b_dim)`.
///
/// `b_k = #k-simplices - rank d_k - rank d_{k+1}`. The list is empty for the
/// complex containing only the empty simplex.
pub fn homology_ranks(k: &Complex) -> Vec<usize> {
    let dim = k.dim();
    if dim < 0 {
        return Vec::new();
    }
    // rank_d[i] = rank of the boundary map leaving dimension i.
    let mut rank_d = vec![0usize; (dim + 2) as usize];
    for d in 1..=dim {
        let (_, _, mat) = boundary_matrix(k, d);
        rank_d[d as usize] = rational_rank(mat);
    }
    (0..=dim)
        .map(|d| {
            let n = k.simplices_of_dim(d).count();
            n - rank_d[d as usize] - rank_d[(d + 1) as usize]
        })
        .collect()
}

/// Solves `boundary(eta) = xi` for an `n`-chain `eta` supported on the
/// `n`-simplices of `k`, where `n = xi.degree() + 1`.
///
/// The system is solved by exact rational elimination; free variables are set
/// to zero, so the result is a particular solution and is verified against
/// `xi` before returning. Fails with [`HomologyError::NotACycle`] when `xi`
/// has nonzero boundary and [`HomologyError::NoBoundingChain`] when the
/// system is inconsistent (for example, `xi` represents a nontrivial homology
/// class in `k`).
pub fn solve_bounding_chain(k: &Complex, xi: &Chain) -> Result<Chain, HomologyError> {
    if !xi.is_cycle() {
        return Err(HomologyError::NotACycle);
    }
    if xi.iter().any(|(s, _)| !k.contains(s)) {
        return Err(HomologyError::NotSupported);
    }
    let n = xi.degree() + 1;
    if xi.is_zero() {
        return Ok(Chain::zero(n));
    }
    let (rows, cols, mut mat) = boundary_matrix(k, n);
    if cols.is_empty() {
        return Err(HomologyError::NoBoundingChain);
    }
    let mut rhs: Vec<Coeff> = rows.iter().map(|s| xi.coeff(s)).collect();

    // Elimination with the right-hand side carried along.
    let nrows = rows.len();
    let ncols = cols.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, p);
        rhs.swap(rank, p);
        let inv = mat[rank][col].clone();
        for r in 0..nrows {
            if r == rank || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone() / inv.clone();
            for c in col..ncols {
                if mat[rank][c].is_zero() {
                    continue;
                }
                let sub = mat[rank][c].clone() * factor.clone();
                mat[r][c] -= sub;
            }
            let sub = rhs[rank].clone() * factor;
            rhs[r] -= sub;
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    // Inconsistent rows mean the cycle is not a boundary in `k`.
    for r in rank..nrows {
        if !rhs[r].is_zero() {
            return Err(HomologyError::NoBoundingChain);
        }
    }
    let mut eta = Chain::zero(n);
    for (col, simplex) in cols.iter().enumerate() {
        if let Some(r) = pivot_of_col[col] {
            let value = rhs[r].clone() / mat[r][col].clone();
            eta.add_term(simplex.clone(), value)
                .expect("column simplices have degree n");
        }
    }
    debug_assert_eq!(eta.boundary(), *xi);
    Ok(eta)
}

/// The cone of a chain over an apex vertex: each term `[v_0, ..., v_k]` not
/// containing the apex becomes `[apex, v_0, ..., v_k]` (canonically signed);
/// terms containing the apex are dropped. For a cycle `xi` this produces a
/// bounding chain inside any complex containing the coned simplices.
pub fn cone_over_vertex(xi: &Chain, apex: u32) -> Chain {
    let mut out = Chain::zero(xi.degree() + 1);
    for (s, c) in xi.iter() {
        if s.contains_vertex(apex) {
            continue;
        }
        let coned = s.with_vertex(apex).expect("apex not in simplex");
        // The apex lands at some position p; moving it to the front costs p
        // transpositions, and the canonical form keeps ascending order.
        let p = coned
            .vertices()
            .iter()
            .position(|&v| v == apex)
            .expect("apex was inserted");
        let sign = if p % 2 == 0 { c.clone() } else { -c.clone() };
        out.add_term(coned, sign).expect("cone raises degree by one");
    }
    out
}
