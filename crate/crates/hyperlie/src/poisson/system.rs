//! The 12-equation linear system in the three covector unknowns (u, v, w)
//! whose solvability at every point makes the common symplectic foliation
//! hypersymplectic:
//!
//!   A u  + [v,c] - [w,b] = [xi, a]
//!   -[u,c] + A v + [w,a] = [xi, b]
//!   [u,b] - [v,a] + A w  = [xi, c]
//!   -[u,a] - [v,b] - [w,c] = A xi
//!
//! Solved in the least-squares sense over the 12 x 9 stacked system;
//! acceptance is by residual, existence being the claim, not uniqueness.
//! The kernel dimension at the point is reported alongside.

use crate::algebra::{bracket, AlgVec};
use crate::linalg::{lstsq, vec_norm, Mat};
use crate::poisson::tensor::a_for_point;
use crate::poisson::{CotangentVec, MPoint, PoissonError, SymTensor};

/// Relative residual above which the least-squares solve is reported as
/// having no solution.
const SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct System13Solution {
    pub cotangent: CotangentVec,
    /// Relative residual |M x - rhs| / max(1, |rhs|).
    pub residual: f64,
    /// Dimension of the numerical kernel of the 12 x 9 system matrix.
    pub kernel_dim: usize,
}

/// Write the cross-product matrix of x into a 3x3 block of `m`.
fn put_cross_block(m: &mut Mat, row: usize, col: usize, x: AlgVec, sign: f64) {
    let [a, b, c] = x.0;
    let block = [[0.0, -c, b], [c, 0.0, -a], [-b, a, 0.0]];
    for i in 0..3 {
        for j in 0..3 {
            m[(row + i, col + j)] += sign * block[i][j];
        }
    }
}

fn put_sym_block(m: &mut Mat, row: usize, col: usize, t: &SymTensor) {
    let tm = t.to_matrix();
    for i in 0..3 {
        for j in 0..3 {
            m[(row + i, col + j)] += tm[i][j];
        }
    }
}

fn build(p: &MPoint, at: &SymTensor, xi: AlgVec) -> (Mat, Vec<f64>) {
    let mut m = Mat::zeros(12, 9);
    // rows 0..3:  A u + [v,c] - [w,b]
    put_sym_block(&mut m, 0, 0, at);
    put_cross_block(&mut m, 0, 3, p.c, -1.0); // [v,c] = -c x v
    put_cross_block(&mut m, 0, 6, p.b, 1.0); // -[w,b] = b x w
                                             // rows 3..6: -[u,c] + A v + [w,a]
    put_cross_block(&mut m, 3, 0, p.c, 1.0);
    put_sym_block(&mut m, 3, 3, at);
    put_cross_block(&mut m, 3, 6, p.a, -1.0);
    // rows 6..9: [u,b] - [v,a] + A w
    put_cross_block(&mut m, 6, 0, p.b, -1.0);
    put_cross_block(&mut m, 6, 3, p.a, 1.0);
    put_sym_block(&mut m, 6, 6, at);
    // rows 9..12: -[u,a] - [v,b] - [w,c]
    put_cross_block(&mut m, 9, 0, p.a, 1.0);
    put_cross_block(&mut m, 9, 3, p.b, 1.0);
    put_cross_block(&mut m, 9, 6, p.c, 1.0);

    let mut rhs = Vec::with_capacity(12);
    rhs.extend_from_slice(&bracket(xi, p.a).0);
    rhs.extend_from_slice(&bracket(xi, p.b).0);
    rhs.extend_from_slice(&bracket(xi, p.c).0);
    rhs.extend_from_slice(&at.apply(xi).0);
    (m, rhs)
}

/// Least-squares solution of the tangency system for the given direction.
pub fn solve_system13(p: &MPoint, xi: AlgVec) -> Result<System13Solution, PoissonError> {
    let at = a_for_point(p)?;
    let (m, rhs) = build(p, &at, xi);
    let (x, rank) = lstsq(&m, &rhs, 1e-10);
    let r = m.matvec(&x);
    let diff: Vec<f64> = r.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = vec_norm(&diff) / vec_norm(&rhs).max(1.0);
    if residual > SOLVE_TOL {
        return Err(PoissonError::NoSolution { residual });
    }
    let mut arr = [0.0; 9];
    arr.copy_from_slice(&x);
    Ok(System13Solution {
        cotangent: CotangentVec::from_array(&arr),
        residual,
        kernel_dim: 9 - rank,
    })
}

/// Relative residual of a candidate solution, |M x - rhs| / max(1, |rhs|).
pub fn system13_residual(
    p: &MPoint,
    xi: AlgVec,
    candidate: &CotangentVec,
) -> Result<f64, PoissonError> {
    let at = a_for_point(p)?;
    let (m, rhs) = build(p, &at, xi);
    let r = m.matvec(&candidate.to_array());
    let diff: Vec<f64> = r.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    Ok(vec_norm(&diff) / vec_norm(&rhs).max(1.0))
}
