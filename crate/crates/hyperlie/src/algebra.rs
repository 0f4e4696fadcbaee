//! Exact primitives for the three-dimensional compact Lie algebra su(2),
//! its complexification sl(2,C), and the rotations acting on both.
//!
//! Elements are stored as coefficient vectors with respect to a fixed
//! orthonormal basis {e1, e2, e3} normalised so that [e1, e2] = e3 and
//! cyclic permutations thereof. Under this normalisation the Lie bracket
//! is the coefficient cross product and the invariant positive pairing is
//! the coefficient dot product, so every formula downstream reduces to
//! small fixed-size vector algebra.

use std::ops::{Add, Mul, Neg, Sub};

/// Element of su(2) as coefficients in the orthonormal basis {e1, e2, e3}.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlgVec(pub [f64; 3]);

impl AlgVec {
    pub const ZERO: AlgVec = AlgVec([0.0, 0.0, 0.0]);
    pub const E1: AlgVec = AlgVec([1.0, 0.0, 0.0]);
    pub const E2: AlgVec = AlgVec([0.0, 1.0, 0.0]);
    pub const E3: AlgVec = AlgVec([0.0, 0.0, 1.0]);

    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        AlgVec([c1, c2, c3])
    }

    /// Basis element e1, e2 or e3 (index 0-based).
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        AlgVec(v)
    }

    pub fn norm_sq(&self) -> f64 {
        inner(*self, *self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Add for AlgVec {
    type Output = AlgVec;
    fn add(self, rhs: AlgVec) -> AlgVec {
        AlgVec([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl Sub for AlgVec {
    type Output = AlgVec;
    fn sub(self, rhs: AlgVec) -> AlgVec {
        AlgVec([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
        ])
    }
}

impl Neg for AlgVec {
    type Output = AlgVec;
    fn neg(self) -> AlgVec {
        AlgVec([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for AlgVec {
    type Output = AlgVec;
    fn mul(self, s: f64) -> AlgVec {
        AlgVec([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Lie bracket [x, y]. In the fixed orthonormal basis this is the cross
/// product of the coefficient vectors.
pub fn bracket(x: AlgVec, y: AlgVec) -> AlgVec {
    AlgVec([
        x.0[1] * y.0[2] - x.0[2] * y.0[1],
        x.0[2] * y.0[0] - x.0[0] * y.0[2],
        x.0[0] * y.0[1] - x.0[1] * y.0[0],
    ])
}

/// Invariant positive pairing <x, y>, the coefficient dot product.
pub fn inner(x: AlgVec, y: AlgVec) -> f64 {
    x.0[0] * y.0[0] + x.0[1] * y.0[1] + x.0[2] * y.0[2]
}

/// Complex scalar, kept minimal for pairings and orbit casimirs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, rhs: Complex) -> Complex {
        Complex::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, rhs: Complex) -> Complex {
        Complex::new(self.re - rhs.re, self.im - rhs.im)
    }
}

/// Element z = x + i y of the complexification sl(2,C) = su(2) ⊗ C.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexAlgVec {
    pub re: AlgVec,
    pub im: AlgVec,
}

impl ComplexAlgVec {
    pub fn new(re: AlgVec, im: AlgVec) -> Self {
        ComplexAlgVec { re, im }
    }

    pub fn real(x: AlgVec) -> Self {
        ComplexAlgVec {
            re: x,
            im: AlgVec::ZERO,
        }
    }

    /// i * z
    pub fn times_i(&self) -> Self {
        ComplexAlgVec {
            re: -self.im,
            im: self.re,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.re.norm_sq() + self.im.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl Add for ComplexAlgVec {
    type Output = ComplexAlgVec;
    fn add(self, rhs: ComplexAlgVec) -> ComplexAlgVec {
        ComplexAlgVec::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for ComplexAlgVec {
    type Output = ComplexAlgVec;
    fn sub(self, rhs: ComplexAlgVec) -> ComplexAlgVec {
        ComplexAlgVec::new(self.re - rhs.re, self.im - rhs.im)
    }
}

/// Complex-bilinear extension of the bracket to sl(2,C).
pub fn complex_bracket(z1: ComplexAlgVec, z2: ComplexAlgVec) -> ComplexAlgVec {
    ComplexAlgVec {
        re: bracket(z1.re, z2.re) - bracket(z1.im, z2.im),
        im: bracket(z1.re, z2.im) + bracket(z1.im, z2.re),
    }
}

/// Complex-bilinear extension of the pairing to sl(2,C).
pub fn complex_pairing(z1: ComplexAlgVec, z2: ComplexAlgVec) -> Complex {
    Complex {
        re: inner(z1.re, z2.re) - inner(z1.im, z2.im),
        im: inner(z1.re, z2.im) + inner(z1.im, z2.re),
    }
}

/// How far a 3x3 matrix is from being special orthogonal.
const FRAME_ORTHO_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("matrix is not orthogonal to within {FRAME_ORTHO_TOL:e} (max residual {0:e})")]
    NotOrthogonal(f64),
    #[error("matrix reverses orientation (det = {0})")]
    OrientationReversing(f64),
}

/// Orientation-preserving orthogonal 3x3 matrix.
///
/// A `Frame` plays two roles that share the same matrix group: it rotates
/// algebra elements (the adjoint action of the group on su(2)), and it
/// relates two coordinate frames on products of su(2) by mixing the three
/// slots of a triple from the right, `(a', b', c') = (a, b, c) O`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    m: [[f64; 3]; 3],
}

impl Frame {
    pub const IDENTITY: Frame = Frame {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Validate and wrap a rotation matrix (row-major).
    pub fn try_new(m: [[f64; 3]; 3]) -> Result<Self, FrameError> {
        let f = Frame { m };
        let residual = f.orthogonality_residual();
        if residual > FRAME_ORTHO_TOL {
            return Err(FrameError::NotOrthogonal(residual));
        }
        let det = f.det();
        if det < 0.0 {
            return Err(FrameError::OrientationReversing(det));
        }
        Ok(f)
    }

    /// Wrap a matrix that is orthogonal by construction (eigenvector bases,
    /// products of frames). Debug builds still assert the invariant.
    pub(crate) fn from_orthogonal_unchecked(m: [[f64; 3]; 3]) -> Self {
        let f = Frame { m };
        debug_assert!(
            f.orthogonality_residual() < 1e-9,
            "frame drifted from SO(3)"
        );
        f
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    /// Column j as an algebra vector.
    pub fn column(&self, j: usize) -> AlgVec {
        AlgVec([self.m[0][j], self.m[1][j], self.m[2][j]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max-abs entry of O^T O - I.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += self.m[k][i] * self.m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Apply to an algebra vector: v -> O v.
    pub fn rotate(&self, v: AlgVec) -> AlgVec {
        let mut out = [0.0; 3];
        for (i, row) in self.m.iter().enumerate() {
            out[i] = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2];
        }
        AlgVec(out)
    }

    /// Composition: self followed by... in matrix terms `self * other`.
    pub fn compose(&self, other: &Frame) -> Frame {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] += self.m[i][k] * other.m[k][j];
                }
            }
        }
        Frame::from_orthogonal_unchecked(m)
    }

    pub fn transpose(&self) -> Frame {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.m[j][i];
            }
        }
        Frame::from_orthogonal_unchecked(m)
    }
}

/// Exponential of the bracket-with-xi operator, i.e. the adjoint rotation
/// Ad_{exp xi} as a 3x3 matrix (Rodrigues formula). `adjoint_rotation(0)`
/// is the identity.
pub fn adjoint_rotation(xi: AlgVec) -> Frame {
    let theta = xi.norm();
    // sin(t)/t and (1-cos(t))/t^2 with series fallbacks near zero.
    let (s, c) = if theta < 1e-4 {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    let [x, y, z] = xi.0;
    // K = [xi]_x, the matrix of v -> xi x v; R = I + s K + c K^2.
    let k = [[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]];
    let mut k2 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                k2[i][j] += k[i][l] * k[l][j];
            }
        }
    }
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s * k[i][j] + c * k2[i][j];
        }
        m[i][i] += 1.0;
    }
    Frame::from_orthogonal_unchecked(m)
}
