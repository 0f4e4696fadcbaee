//! The frame-parameterised family of compatible Poisson structures on
//! su(2) x su(2) x su(2) and everything attached to it: the cubic
//! invariant `phi`, the symmetric tensor entering the mixed bracket
//! block, Hamiltonian vector fields, bracket tables, casimirs, the
//! stratification by backward-flow limit sets, and the tangency system
//! whose solvability makes the leaves hypersymplectic.

mod bracket;
mod casimir;
mod system;
mod tensor;

pub(crate) use bracket::pi_sharp_with;
pub use bracket::{
    adjoint_generator, condition_residuals, equivariance_residual, frame_covariance_residual,
    ham_vf, jacobiator, linear_bracket, linear_comb_bracket, mixed_jacobiator, pi_sharp,
    poisson_bracket, poisson_bracket_fields, rotation_equivariance_residual, BracketField,
    FieldProduct, FieldTerm, LinComb,
};
pub use casimir::{casimir_derivatives, casimir_gradients, casimirs};
pub use system::{solve_system13, system13_residual, System13Solution};
pub use tensor::{
    a_extended, a_for_point, a_tensor, a_tensor_deriv, classify_stratum, grad_phi, gram, phi,
    standard_frame, SClass, StandardFrame, DEFAULT_PHI_FLOOR,
};

use crate::algebra::{inner, AlgVec, Frame};

/// Errors for operations that require a point in general position or a
/// solvable linear system.
#[derive(Debug, thiserror::Error)]
pub enum PoissonError {
    #[error("point is singular: |phi| = {phi_abs:e} is below the floor and the point is not on the flow-limit stratum")]
    SingularPoint { phi_abs: f64 },
    #[error("tangency system has no solution within tolerance (relative residual {residual:e})")]
    NoSolution { residual: f64 },
    #[error("Gram spectrum does not match the stratum pattern")]
    NotInStratum,
}

/// Point of the product space, as a frame-relative coordinate triple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MPoint {
    pub a: AlgVec,
    pub b: AlgVec,
    pub c: AlgVec,
}

impl MPoint {
    pub fn new(a: AlgVec, b: AlgVec, c: AlgVec) -> Self {
        MPoint { a, b, c }
    }

    pub fn zero() -> Self {
        MPoint::default()
    }

    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.a.0);
        out[3..6].copy_from_slice(&self.b.0);
        out[6..].copy_from_slice(&self.c.0);
        out
    }

    pub fn from_array(v: &[f64; 9]) -> Self {
        MPoint {
            a: AlgVec([v[0], v[1], v[2]]),
            b: AlgVec([v[3], v[4], v[5]]),
            c: AlgVec([v[6], v[7], v[8]]),
        }
    }

    /// Euclidean norm of the full coordinate vector.
    pub fn norm(&self) -> f64 {
        (self.a.norm_sq() + self.b.norm_sq() + self.c.norm_sq()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    /// Whether the point is in the open set where the tensor formula with
    /// the 1/phi factor is used directly.
    pub fn in_m_o(&self, phi_floor: f64) -> bool {
        phi(self).abs() > phi_floor
    }

    /// Frame change: mix the three slots from the right, (a,b,c) O.
    pub fn mix_slots(&self, o: &Frame) -> MPoint {
        let s = [self.a, self.b, self.c];
        let col = |j: usize| s[0] * o.entry(0, j) + s[1] * o.entry(1, j) + s[2] * o.entry(2, j);
        MPoint::new(col(0), col(1), col(2))
    }

    /// Diagonal adjoint action: rotate every slot by the same rotation.
    pub fn rotate(&self, r: &Frame) -> MPoint {
        MPoint::new(r.rotate(self.a), r.rotate(self.b), r.rotate(self.c))
    }

    /// Point displaced along a tangent vector.
    pub fn offset(&self, t: &Tangent, h: f64) -> MPoint {
        MPoint::new(self.a + t.a * h, self.b + t.b * h, self.c + t.c * h)
    }
}

/// Tangent vector at a point, identified with a coordinate triple.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tangent {
    pub a: AlgVec,
    pub b: AlgVec,
    pub c: AlgVec,
}

impl Tangent {
    pub fn new(a: AlgVec, b: AlgVec, c: AlgVec) -> Self {
        Tangent { a, b, c }
    }

    pub fn zero() -> Self {
        Tangent::default()
    }

    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.a.0);
        out[3..6].copy_from_slice(&self.b.0);
        out[6..].copy_from_slice(&self.c.0);
        out
    }

    pub fn from_array(v: &[f64; 9]) -> Self {
        Tangent {
            a: AlgVec([v[0], v[1], v[2]]),
            b: AlgVec([v[3], v[4], v[5]]),
            c: AlgVec([v[6], v[7], v[8]]),
        }
    }

    /// Coordinate direction k = 0..9.
    pub fn coordinate(k: usize) -> Self {
        let mut v = [0.0; 9];
        v[k] = 1.0;
        Tangent::from_array(&v)
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sq() + self.b.norm_sq() + self.c.norm_sq()).sqrt()
    }

    pub fn scale(&self, s: f64) -> Tangent {
        Tangent::new(self.a * s, self.b * s, self.c * s)
    }

    pub fn add(&self, o: &Tangent) -> Tangent {
        Tangent::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }

    pub fn sub(&self, o: &Tangent) -> Tangent {
        Tangent::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }

    /// Frame change, same right action as on points.
    pub fn mix_slots(&self, o: &Frame) -> Tangent {
        let s = [self.a, self.b, self.c];
        let col = |j: usize| s[0] * o.entry(0, j) + s[1] * o.entry(1, j) + s[2] * o.entry(2, j);
        Tangent::new(col(0), col(1), col(2))
    }
}

/// Covector at a point, identified with a coordinate triple through the
/// invariant pairing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CotangentVec {
    pub u: AlgVec,
    pub v: AlgVec,
    pub w: AlgVec,
}

impl CotangentVec {
    pub fn new(u: AlgVec, v: AlgVec, w: AlgVec) -> Self {
        CotangentVec { u, v, w }
    }

    pub fn zero() -> Self {
        CotangentVec::default()
    }

    pub fn to_array(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        out[..3].copy_from_slice(&self.u.0);
        out[3..6].copy_from_slice(&self.v.0);
        out[6..].copy_from_slice(&self.w.0);
        out
    }

    pub fn from_array(v: &[f64; 9]) -> Self {
        CotangentVec {
            u: AlgVec([v[0], v[1], v[2]]),
            v: AlgVec([v[3], v[4], v[5]]),
            w: AlgVec([v[6], v[7], v[8]]),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.u.norm_sq() + self.v.norm_sq() + self.w.norm_sq()).sqrt()
    }

    pub fn scale(&self, s: f64) -> CotangentVec {
        CotangentVec::new(self.u * s, self.v * s, self.w * s)
    }

    pub fn add(&self, o: &CotangentVec) -> CotangentVec {
        CotangentVec::new(self.u + o.u, self.v + o.v, self.w + o.w)
    }

    /// Covector components under a slot-mixing frame change.
    pub fn mix_slots(&self, o: &Frame) -> CotangentVec {
        let s = [self.u, self.v, self.w];
        let col = |j: usize| s[0] * o.entry(0, j) + s[1] * o.entry(1, j) + s[2] * o.entry(2, j);
        CotangentVec::new(col(0), col(1), col(2))
    }

    /// Natural pairing with a tangent vector.
    pub fn pair(&self, t: &Tangent) -> f64 {
        inner(self.u, t.a) + inner(self.v, t.b) + inner(self.w, t.c)
    }
}

/// Symmetric bilinear form on the algebra, stored as the six independent
/// entries so symmetry is exact by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor {
    // m11, m12, m13, m22, m23, m33
    m: [f64; 6],
}

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor { m: [0.0; 6] };

    pub fn identity() -> Self {
        SymTensor {
            m: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
        }
    }

    pub fn scaled_identity(s: f64) -> Self {
        SymTensor {
            m: [s, 0.0, 0.0, s, 0.0, s],
        }
    }

    pub fn from_entries(m11: f64, m12: f64, m13: f64, m22: f64, m23: f64, m33: f64) -> Self {
        SymTensor {
            m: [m11, m12, m13, m22, m23, m33],
        }
    }

    /// Rank-one tensor v (x) v.
    pub fn outer(v: AlgVec) -> Self {
        let [x, y, z] = v.0;
        SymTensor {
            m: [x * x, x * y, x * z, y * y, y * z, z * z],
        }
    }

    /// Symmetrised product u (x) v + v (x) u.
    pub fn sym_outer(u: AlgVec, v: AlgVec) -> Self {
        let [a, b, c] = u.0;
        let [x, y, z] = v.0;
        SymTensor {
            m: [
                2.0 * a * x,
                a * y + b * x,
                a * z + c * x,
                2.0 * b * y,
                b * z + c * y,
                2.0 * c * z,
            ],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        match (i, j) {
            (0, 0) => self.m[0],
            (0, 1) => self.m[1],
            (0, 2) => self.m[2],
            (1, 1) => self.m[3],
            (1, 2) => self.m[4],
            (2, 2) => self.m[5],
            _ => unreachable!(),
        }
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        let m = &self.m;
        [[m[0], m[1], m[2]], [m[1], m[3], m[4]], [m[2], m[4], m[5]]]
    }

    /// Contraction with one argument: the sharp map xi -> M xi.
    pub fn apply(&self, xi: AlgVec) -> AlgVec {
        let m = self.to_matrix();
        AlgVec([
            m[0][0] * xi.0[0] + m[0][1] * xi.0[1] + m[0][2] * xi.0[2],
            m[1][0] * xi.0[0] + m[1][1] * xi.0[1] + m[1][2] * xi.0[2],
            m[2][0] * xi.0[0] + m[2][1] * xi.0[1] + m[2][2] * xi.0[2],
        ])
    }

    /// Full contraction xi . M . eta.
    pub fn quad(&self, xi: AlgVec, eta: AlgVec) -> f64 {
        inner(xi, self.apply(eta))
    }

    pub fn add(&self, o: &SymTensor) -> SymTensor {
        let mut m = self.m;
        for (x, y) in m.iter_mut().zip(&o.m) {
            *x += y;
        }
        SymTensor { m }
    }

    pub fn sub(&self, o: &SymTensor) -> SymTensor {
        let mut m = self.m;
        for (x, y) in m.iter_mut().zip(&o.m) {
            *x -= y;
        }
        SymTensor { m }
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        let mut m = self.m;
        for x in m.iter_mut() {
            *x *= s;
        }
        SymTensor { m }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3] + self.m[5]
    }

    /// Conjugation R M R^T by a rotation.
    pub fn conjugated(&self, r: &Frame) -> SymTensor {
        let m = self.to_matrix();
        let mut rm = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    rm[i][j] += r.entry(i, k) * m[k][j];
                }
            }
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += rm[i][k] * r.entry(j, k);
                }
            }
        }
        SymTensor::from_entries(
            out[0][0], out[0][1], out[0][2], out[1][1], out[1][2], out[2][2],
        )
    }
}

/// Which coordinate slot a linear function reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
    Third,
}

impl Slot {
    pub fn index(self) -> usize {
        match self {
            Slot::First => 0,
            Slot::Second => 1,
            Slot::Third => 2,
        }
    }

    pub fn from_index(i: usize) -> Slot {
        match i % 3 {
            0 => Slot::First,
            1 => Slot::Second,
            _ => Slot::Third,
        }
    }
}

/// One of the three cyclic frames derived from the reference frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameIndex {
    One,
    Two,
    Three,
}

impl FrameIndex {
    pub const ALL: [FrameIndex; 3] = [FrameIndex::One, FrameIndex::Two, FrameIndex::Three];

    /// Cyclic shift applied to coordinates when working in this frame.
    pub fn shift(self) -> usize {
        match self {
            FrameIndex::One => 0,
            FrameIndex::Two => 1,
            FrameIndex::Three => 2,
        }
    }

    pub fn from_index(i: usize) -> FrameIndex {
        match i % 3 {
            0 => FrameIndex::One,
            1 => FrameIndex::Two,
            _ => FrameIndex::Three,
        }
    }
}

/// Linear function reading one slot against a fixed algebra element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFn {
    pub slot: Slot,
    pub xi: AlgVec,
}

impl LinearFn {
    pub fn new(slot: Slot, xi: AlgVec) -> Self {
        LinearFn { slot, xi }
    }
}

/// Scalar field with a gradient. The default gradient is a central finite
/// difference with step 1e-5 * (1 + |p|); implementations with analytic
/// gradients override it.
pub trait ScalarField {
    fn eval(&self, p: &MPoint) -> f64;

    fn grad(&self, p: &MPoint) -> CotangentVec {
        let h = 1e-5 * (1.0 + p.norm());
        let base = p.to_array();
        let mut g = [0.0; 9];
        for k in 0..9 {
            let mut plus = base;
            plus[k] += h;
            let mut minus = base;
            minus[k] -= h;
            g[k] = (self.eval(&MPoint::from_array(&plus)) - self.eval(&MPoint::from_array(&minus)))
                / (2.0 * h);
        }
        CotangentVec::from_array(&g)
    }
}

impl ScalarField for LinearFn {
    fn eval(&self, p: &MPoint) -> f64 {
        let slot = match self.slot {
            Slot::First => p.a,
            Slot::Second => p.b,
            Slot::Third => p.c,
        };
        inner(self.xi, slot)
    }

    fn grad(&self, _p: &MPoint) -> CotangentVec {
        let mut g = CotangentVec::zero();
        match self.slot {
            Slot::First => g.u = self.xi,
            Slot::Second => g.v = self.xi,
            Slot::Third => g.w = self.xi,
        }
        g
    }
}
