//! The cubic invariant, its gradient field, and the symmetric tensor that
//! fills the mixed block of the bracket table, together with the
//! stratification of the space by backward-flow limit sets and the smooth
//! extension of the tensor onto the critical strata.

use crate::algebra::{bracket, inner, Frame};
use crate::linalg::{sym_eigen, Mat};
use crate::poisson::{MPoint, PoissonError, SymTensor, Tangent};

/// Points with |phi| at or below this floor are treated as singular for
/// the 1/phi tensor formula.
pub const DEFAULT_PHI_FLOOR: f64 = 1e-8;

/// The invariant cubic phi(a,b,c) = <a, [b,c]>, i.e. the determinant of
/// the coordinate triple. Totally antisymmetric under slot swaps and
/// invariant under orientation-preserving frame changes.
pub fn phi(p: &MPoint) -> f64 {
    inner(p.a, bracket(p.b, p.c))
}

/// Gradient of phi with respect to the product metric:
/// X = ([b,c], [c,a], [a,b]). Vanishes exactly on the critical set where
/// the three coordinates are parallel.
pub fn grad_phi(p: &MPoint) -> Tangent {
    Tangent::new(bracket(p.b, p.c), bracket(p.c, p.a), bracket(p.a, p.b))
}

/// The symmetric tensor on the open set |phi| > floor:
/// A = (1/phi) ([a,b](x)[a,b] + [b,c](x)[b,c] + [c,a](x)[c,a]).
///
/// It is uniquely characterised by A a = [b,c], A b = [c,a], A c = [a,b],
/// scales linearly with the point, and is invariant under slot mixing by
/// rotations.
pub fn a_tensor(p: &MPoint) -> Result<SymTensor, PoissonError> {
    a_tensor_with_floor(p, DEFAULT_PHI_FLOOR)
}

pub fn a_tensor_with_floor(p: &MPoint, floor: f64) -> Result<SymTensor, PoissonError> {
    let f = phi(p);
    if f.abs() <= floor {
        return Err(PoissonError::SingularPoint { phi_abs: f.abs() });
    }
    let w_ab = bracket(p.a, p.b);
    let w_bc = bracket(p.b, p.c);
    let w_ca = bracket(p.c, p.a);
    let sum = SymTensor::outer(w_ab)
        .add(&SymTensor::outer(w_bc))
        .add(&SymTensor::outer(w_ca));
    Ok(sum.scale(1.0 / f))
}

/// Analytic directional derivative of the tensor along a tangent vector,
/// by the product and quotient rules applied to the defining formula.
pub fn a_tensor_deriv(p: &MPoint, dp: &Tangent) -> Result<SymTensor, PoissonError> {
    let f = phi(p);
    if f.abs() <= DEFAULT_PHI_FLOOR {
        return Err(PoissonError::SingularPoint { phi_abs: f.abs() });
    }
    let w_ab = bracket(p.a, p.b);
    let w_bc = bracket(p.b, p.c);
    let w_ca = bracket(p.c, p.a);
    let dw_ab = bracket(dp.a, p.b) + bracket(p.a, dp.b);
    let dw_bc = bracket(dp.b, p.c) + bracket(p.b, dp.c);
    let dw_ca = bracket(dp.c, p.a) + bracket(p.c, dp.a);
    let dphi = inner(dp.a, w_bc) + inner(dp.b, w_ca) + inner(dp.c, w_ab);

    let sum = SymTensor::outer(w_ab)
        .add(&SymTensor::outer(w_bc))
        .add(&SymTensor::outer(w_ca));
    let dsum = SymTensor::sym_outer(dw_ab, w_ab)
        .add(&SymTensor::sym_outer(dw_bc, w_bc))
        .add(&SymTensor::sym_outer(dw_ca, w_ca));
    Ok(dsum.scale(1.0 / f).sub(&sum.scale(dphi / (f * f))))
}

/// Gram matrix of the coordinate triple under the invariant pairing.
/// Transforms by congruence O^T G O under slot mixing.
pub fn gram(p: &MPoint) -> SymTensor {
    SymTensor::from_entries(
        inner(p.a, p.a),
        inner(p.a, p.b),
        inner(p.a, p.c),
        inner(p.b, p.b),
        inner(p.b, p.c),
        inner(p.c, p.c),
    )
}

/// Membership in the union of backward-flow basins, decided by the Gram
/// spectrum pattern (mu + r^2, mu, mu) together with phi >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SClass {
    /// Basin of a critical orbit of radius r > 0.
    OrbitStratum {
        r: f64,
        lambda: f64,
    },
    /// Basin of the origin: all three Gram eigenvalues equal.
    ZeroStratum {
        lambda: f64,
    },
    NotInS,
}

fn gram_eigen(p: &MPoint) -> (Vec<f64>, Mat) {
    let g = gram(p);
    let m = Mat::from_rows(&[
        g.to_matrix()[0].to_vec(),
        g.to_matrix()[1].to_vec(),
        g.to_matrix()[2].to_vec(),
    ]);
    sym_eigen(&m)
}

/// Classify a point against the stratum conditions.
///
/// Eigenvalue equality is decided at 1e-7 * (1 + trace); the sign of phi
/// at a matching scale-consistent tolerance.
pub fn classify_stratum(p: &MPoint) -> SClass {
    let (vals, _) = gram_eigen(p);
    let trace: f64 = vals.iter().sum();
    let tol = 1e-7 * (1.0 + trace);
    let phi_tol = 1e-7 * (1.0 + trace).powf(1.5);
    let f = phi(p);
    let (mu1, mu2, mu3) = (vals[0], vals[1], vals[2]);
    if f < -phi_tol {
        return SClass::NotInS;
    }
    if mu1 - mu3 <= tol {
        let lambda = (trace / 3.0).max(0.0).sqrt();
        return SClass::ZeroStratum { lambda };
    }
    if mu2 - mu3 <= tol && mu1 - mu2 > tol {
        let lambda = (0.5 * (mu2 + mu3)).max(0.0).sqrt();
        let r = (mu1 - 0.5 * (mu2 + mu3)).sqrt();
        return SClass::OrbitStratum { r, lambda };
    }
    SClass::NotInS
}

/// A frame in which the point takes the block-diagonal standard shape.
#[derive(Debug, Clone, Copy)]
pub struct StandardFrame {
    /// Slot mixing O with det +1 such that the Gram matrix of (a,b,c) O is
    /// diag(lambda^2 + r^2, lambda^2, lambda^2).
    pub frame: Frame,
    pub r: f64,
    pub lambda: f64,
}

/// Find a standard frame for a point on the stratum. The orientation is
/// fixed by det O = +1; phi is unchanged by the mixing.
pub fn standard_frame(p: &MPoint) -> Result<StandardFrame, PoissonError> {
    let class = classify_stratum(p);
    let (r, lambda) = match class {
        SClass::OrbitStratum { r, lambda } => (r, lambda),
        SClass::ZeroStratum { lambda } => (0.0, lambda),
        SClass::NotInS => return Err(PoissonError::NotInStratum),
    };
    let (_, q) = gram_eigen(p);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = q[(i, j)];
        }
    }
    // Eigenvector bases come with a sign ambiguity per column; flip one
    // column if needed to land in SO(3).
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det < 0.0 {
        for row in m.iter_mut() {
            row[2] = -row[2];
        }
    }
    Ok(StandardFrame {
        frame: Frame::from_orthogonal_unchecked(m),
        r,
        lambda,
    })
}

/// The tensor extended onto the stratum, where the 1/phi formula may be
/// unavailable: in a standard frame with first coordinate a',
/// A = s Id - (r^2 / s^3) a' (x) a' with s = sqrt(lambda^2 + r^2).
/// At the origin the tensor is zero. On the part of the stratum with
/// phi > 0 this agrees with the 1/phi formula.
pub fn a_extended(p: &MPoint) -> Result<SymTensor, PoissonError> {
    if p.norm() == 0.0 {
        return Ok(SymTensor::ZERO);
    }
    let sf = standard_frame(p)?;
    let s2 = sf.lambda * sf.lambda + sf.r * sf.r;
    let s = s2.sqrt();
    if s == 0.0 {
        return Ok(SymTensor::ZERO);
    }
    let a_std = p.mix_slots(&sf.frame).a;
    let coef = (sf.r * sf.r) / (s2 * s);
    Ok(SymTensor::scaled_identity(s).sub(&SymTensor::outer(a_std).scale(coef)))
}

/// Select the tensor for a point: the 1/phi formula away from the floor,
/// the stratum extension on the stratum, and an error elsewhere. Points
/// with small |phi| that are not on the stratum are rejected rather than
/// extrapolated.
pub fn a_for_point(p: &MPoint) -> Result<SymTensor, PoissonError> {
    let f = phi(p);
    if f.abs() > DEFAULT_PHI_FLOOR {
        return a_tensor(p);
    }
    match classify_stratum(p) {
        SClass::NotInS => Err(PoissonError::SingularPoint { phi_abs: f.abs() }),
        _ => a_extended(p),
    }
}
