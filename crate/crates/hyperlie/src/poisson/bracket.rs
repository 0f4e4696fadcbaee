//! Hamiltonian vector fields, the sharp maps of the three cyclic-frame
//! Poisson tensors, the symbolic bracket table on linear functions, and
//! the residual checks built on them: Jacobi identities for arbitrary
//! tensor combinations, the two derivative conditions on the symmetric
//! tensor, equivariance, and frame covariance of the bracket triple.
//!
//! The tensors for the second and third cyclic frame are evaluated by
//! relabelling coordinates, (a,b,c) -> (b,c,a) -> (c,a,b), with covector
//! and tangent components carried along; the symmetric tensor itself is
//! invariant under the relabelling.

use crate::algebra::{adjoint_rotation, bracket, AlgVec, Frame};
use crate::poisson::tensor::{a_for_point, a_tensor_deriv};
use crate::poisson::{
    CotangentVec, FrameIndex, LinearFn, MPoint, PoissonError, ScalarField, Slot, SymTensor, Tangent,
};

/// Generator of the diagonal adjoint action:
/// xi_hat = ([xi,a], [xi,b], [xi,c]). Equals minus the Hamiltonian field
/// of the first-slot linear function in every frame.
pub fn adjoint_generator(p: &MPoint, xi: AlgVec) -> Tangent {
    Tangent::new(bracket(xi, p.a), bracket(xi, p.b), bracket(xi, p.c))
}

/// Sharp map of the reference-frame tensor in raw coordinates.
fn pi1_sharp_raw(
    a: AlgVec,
    b: AlgVec,
    c: AlgVec,
    at: &SymTensor,
    u: AlgVec,
    v: AlgVec,
    w: AlgVec,
) -> (AlgVec, AlgVec, AlgVec) {
    (
        -bracket(u, a) - bracket(v, b) - bracket(w, c),
        -bracket(u, b) + bracket(v, a) - at.apply(w),
        -bracket(u, c) + at.apply(v) + bracket(w, a),
    )
}

/// Sharp map for the chosen cyclic frame, with the tensor supplied by the
/// caller (so singular-point policy is decided once).
pub(crate) fn pi_sharp_with(
    p: &MPoint,
    alpha: &CotangentVec,
    frame: FrameIndex,
    at: &SymTensor,
) -> Tangent {
    let k = frame.shift();
    let ps = [p.a, p.b, p.c];
    let al = [alpha.u, alpha.v, alpha.w];
    // coordinates and covector components in the shifted frame
    let q = [ps[k % 3], ps[(k + 1) % 3], ps[(k + 2) % 3]];
    let m = [al[k % 3], al[(k + 1) % 3], al[(k + 2) % 3]];
    let (t0, t1, t2) = pi1_sharp_raw(q[0], q[1], q[2], at, m[0], m[1], m[2]);
    let t = [t0, t1, t2];
    let mut out = [AlgVec::ZERO; 3];
    for i in 0..3 {
        out[(i + k) % 3] = t[i];
    }
    Tangent::new(out[0], out[1], out[2])
}

/// Sharp map of the Poisson tensor for one of the three cyclic frames,
/// applied to a covector.
pub fn pi_sharp(
    p: &MPoint,
    alpha: &CotangentVec,
    frame: FrameIndex,
) -> Result<Tangent, PoissonError> {
    let at = a_for_point(p)?;
    Ok(pi_sharp_with(p, alpha, frame, &at))
}

/// Hamiltonian vector field of a linear function in the chosen frame.
pub fn ham_vf(p: &MPoint, f: &LinearFn, frame: FrameIndex) -> Result<Tangent, PoissonError> {
    pi_sharp(p, &f.grad(p), frame)
}

/// One term of a symbolic bracket of linear functions: either a linear
/// function or a contraction of the symmetric tensor.
#[derive(Debug, Clone, Copy)]
pub enum FieldTerm {
    Linear { coef: f64, f: LinearFn },
    Quad { coef: f64, xi: AlgVec, eta: AlgVec },
}

/// Bracket of linear functions in closed form: a sum of linear terms and
/// tensor contractions. Evaluation and differentiation are exact given
/// the tensor and its derivative.
#[derive(Debug, Clone, Default)]
pub struct BracketField {
    pub terms: Vec<FieldTerm>,
}

impl BracketField {
    pub fn eval_with(&self, p: &MPoint, at: &SymTensor) -> f64 {
        let mut total = 0.0;
        for term in &self.terms {
            total += match *term {
                FieldTerm::Linear { coef, f } => coef * f.eval(p),
                FieldTerm::Quad { coef, xi, eta } => coef * at.quad(xi, eta),
            };
        }
        total
    }

    pub fn eval(&self, p: &MPoint) -> Result<f64, PoissonError> {
        let at = a_for_point(p)?;
        Ok(self.eval_with(p, &at))
    }

    /// Analytic gradient; tensor contractions differentiate through the
    /// directional derivative of the tensor along coordinate directions.
    pub fn grad(&self, p: &MPoint) -> Result<CotangentVec, PoissonError> {
        let mut g = [0.0; 9];
        let mut needs_quad = false;
        for term in &self.terms {
            match *term {
                FieldTerm::Linear { coef, f } => {
                    let base = f.slot.index() * 3;
                    for i in 0..3 {
                        g[base + i] += coef * f.xi.0[i];
                    }
                }
                FieldTerm::Quad { .. } => needs_quad = true,
            }
        }
        if needs_quad {
            for k in 0..9 {
                let d = a_tensor_deriv(p, &Tangent::coordinate(k))?;
                for term in &self.terms {
                    if let FieldTerm::Quad { coef, xi, eta } = *term {
                        g[k] += coef * d.quad(xi, eta);
                    }
                }
            }
        }
        Ok(CotangentVec::from_array(&g))
    }
}

/// Reference-frame bracket table on a pair of (slot, element) symbols.
fn table_frame1(s: Slot, xi: AlgVec, t: Slot, eta: AlgVec) -> FieldTerm {
    use Slot::*;
    let lin = |coef: f64, slot: Slot| FieldTerm::Linear {
        coef,
        f: LinearFn::new(slot, bracket(xi, eta)),
    };
    match (s, t) {
        (First, First) => lin(1.0, First),
        (First, Second) | (Second, First) => lin(1.0, Second),
        (Second, Second) => lin(-1.0, First),
        (First, Third) | (Third, First) => lin(1.0, Third),
        (Third, Third) => lin(-1.0, First),
        (Second, Third) => FieldTerm::Quad { coef: 1.0, xi, eta },
        (Third, Second) => FieldTerm::Quad {
            coef: -1.0,
            xi,
            eta,
        },
    }
}

/// Bracket table for a cyclic frame: slots are relabelled into the shifted
/// coordinates, the reference table is applied, and the result is
/// relabelled back. The tensor contraction is unchanged because the tensor
/// is invariant under the cyclic relabelling.
fn table(s: Slot, xi: AlgVec, t: Slot, eta: AlgVec, frame: FrameIndex) -> FieldTerm {
    let k = frame.shift();
    let s_shift = Slot::from_index(s.index() + 3 - k);
    let t_shift = Slot::from_index(t.index() + 3 - k);
    match table_frame1(s_shift, xi, t_shift, eta) {
        FieldTerm::Linear { coef, f } => FieldTerm::Linear {
            coef,
            f: LinearFn::new(Slot::from_index(f.slot.index() + k), f.xi),
        },
        quad => quad,
    }
}

/// Symbolic bracket of two linear functions in the chosen frame.
pub fn linear_bracket(f: &LinearFn, g: &LinearFn, frame: FrameIndex) -> BracketField {
    BracketField {
        terms: vec![table(f.slot, f.xi, g.slot, g.xi, frame)],
    }
}

/// Linear combination of linear functions, the closure of transformed
/// coordinates under frame changes.
#[derive(Debug, Clone, Default)]
pub struct LinComb {
    pub terms: Vec<(f64, LinearFn)>,
}

impl LinComb {
    pub fn single(f: LinearFn) -> Self {
        LinComb {
            terms: vec![(1.0, f)],
        }
    }

    pub fn push(&mut self, coef: f64, f: LinearFn) {
        if coef != 0.0 {
            self.terms.push((coef, f));
        }
    }
}

impl ScalarField for LinComb {
    fn eval(&self, p: &MPoint) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.eval(p)).sum()
    }

    fn grad(&self, p: &MPoint) -> CotangentVec {
        let mut g = CotangentVec::zero();
        for (c, f) in &self.terms {
            g = g.add(&f.grad(p).scale(*c));
        }
        g
    }
}

/// Symbolic bracket of two linear combinations, by bilinear expansion.
pub fn linear_comb_bracket(f: &LinComb, g: &LinComb, frame: FrameIndex) -> BracketField {
    let mut out = BracketField::default();
    for (cf, tf) in &f.terms {
        for (cg, tg) in &g.terms {
            match table(tf.slot, tf.xi, tg.slot, tg.xi, frame) {
                FieldTerm::Linear { coef, f } => out.terms.push(FieldTerm::Linear {
                    coef: coef * cf * cg,
                    f,
                }),
                FieldTerm::Quad { coef, xi, eta } => out.terms.push(FieldTerm::Quad {
                    coef: coef * cf * cg,
                    xi,
                    eta,
                }),
            }
        }
    }
    out
}

/// Bracket of two scalar fields at a point: {f, g} = <grad g, X_f>.
pub fn poisson_bracket_fields(
    f: &dyn ScalarField,
    g: &dyn ScalarField,
    p: &MPoint,
    frame: FrameIndex,
) -> Result<f64, PoissonError> {
    let xf = pi_sharp(p, &f.grad(p), frame)?;
    Ok(g.grad(p).pair(&xf))
}

/// Bracket of two linear functions at a point, through the closed-form
/// table.
pub fn poisson_bracket(
    f: &LinearFn,
    g: &LinearFn,
    p: &MPoint,
    frame: FrameIndex,
) -> Result<f64, PoissonError> {
    linear_bracket(f, g, frame).eval(p)
}

/// Pointwise product of two scalar fields, for Leibniz checks.
pub struct FieldProduct<'a> {
    pub f: &'a dyn ScalarField,
    pub g: &'a dyn ScalarField,
}

impl ScalarField for FieldProduct<'_> {
    fn eval(&self, p: &MPoint) -> f64 {
        self.f.eval(p) * self.g.eval(p)
    }

    fn grad(&self, p: &MPoint) -> CotangentVec {
        let gf = self.f.grad(p).scale(self.g.eval(p));
        let gg = self.g.grad(p).scale(self.f.eval(p));
        gf.add(&gg)
    }
}

/// Jacobiator of three linear functions for the combined tensor
/// k1 pi_1 + k2 pi_2 + k3 pi_3:
/// {{f,g},h} + {{g,h},f} + {{h,f},g}, every bracket taken with the
/// combined tensor. Vanishing for all coefficient choices is the Jacobi
/// identity of the whole family.
pub fn jacobiator(
    f: &LinearFn,
    g: &LinearFn,
    h: &LinearFn,
    p: &MPoint,
    coeffs: [f64; 3],
) -> Result<f64, PoissonError> {
    let at = a_for_point(p)?;
    let mut total = 0.0;
    let cyclic = [(f, g, h), (g, h, f), (h, f, g)];
    for (x, y, z) in cyclic {
        for (i, &ki) in coeffs.iter().enumerate() {
            if ki == 0.0 {
                continue;
            }
            let inner_bracket = linear_bracket(x, y, FrameIndex::from_index(i));
            let grad_inner = inner_bracket.grad(p)?;
            for (j, &kj) in coeffs.iter().enumerate() {
                if kj == 0.0 {
                    continue;
                }
                let flow = pi_sharp_with(p, &grad_inner, FrameIndex::from_index(j), &at);
                total += ki * kj * z.grad(p).pair(&flow);
            }
        }
    }
    Ok(total)
}

/// Mixed compatibility of two of the tensors (vanishing Schouten bracket),
/// as the polarisation of the Jacobi identity:
/// jac(pi_i + pi_j) - jac(pi_i) - jac(pi_j).
pub fn mixed_jacobiator(
    f: &LinearFn,
    g: &LinearFn,
    h: &LinearFn,
    p: &MPoint,
    i: FrameIndex,
    j: FrameIndex,
) -> Result<f64, PoissonError> {
    let mut both = [0.0; 3];
    both[i.shift()] += 1.0;
    both[j.shift()] += 1.0;
    let mut only_i = [0.0; 3];
    only_i[i.shift()] = 1.0;
    let mut only_j = [0.0; 3];
    only_j[j.shift()] = 1.0;
    Ok(jacobiator(f, g, h, p, both)?
        - jacobiator(f, g, h, p, only_i)?
        - jacobiator(f, g, h, p, only_j)?)
}

/// Residuals of the two derivative conditions tying the tensor to the
/// bracket structure:
///   (D_{X2_eta} A) xi - (D_{X2_xi} A) eta = [c, [xi, eta]]
///   (D_{X3_eta} A) xi - (D_{X3_xi} A) eta = [b, [eta, xi]]
pub fn condition_residuals(
    p: &MPoint,
    xi: AlgVec,
    eta: AlgVec,
) -> Result<(f64, f64), PoissonError> {
    let comm = bracket(xi, eta);

    let x2_eta = ham_vf(p, &LinearFn::new(Slot::Second, eta), FrameIndex::One)?;
    let x2_xi = ham_vf(p, &LinearFn::new(Slot::Second, xi), FrameIndex::One)?;
    let lhs_a = a_tensor_deriv(p, &x2_eta)?.apply(xi) - a_tensor_deriv(p, &x2_xi)?.apply(eta);
    let res_a = (lhs_a - bracket(p.c, comm)).norm();

    let x3_eta = ham_vf(p, &LinearFn::new(Slot::Third, eta), FrameIndex::One)?;
    let x3_xi = ham_vf(p, &LinearFn::new(Slot::Third, xi), FrameIndex::One)?;
    let lhs_b = a_tensor_deriv(p, &x3_eta)?.apply(xi) - a_tensor_deriv(p, &x3_xi)?.apply(eta);
    let res_b = (lhs_b - bracket(p.b, bracket(eta, xi))).norm();

    Ok((res_a, res_b))
}

/// Residual of the infinitesimal equivariance identity. Differentiating
/// the finite form A(R a, R b, R c) = R A R^T along R = exp(t ad_xi)
/// gives, for the generator xi_hat = ([xi,a],[xi,b],[xi,c]),
/// D_{xi_hat} A_{eta,zeta} = -A_{[xi,eta],zeta} - A_{eta,[xi,zeta]}.
pub fn equivariance_residual(
    p: &MPoint,
    xi: AlgVec,
    eta: AlgVec,
    zeta: AlgVec,
) -> Result<f64, PoissonError> {
    let lhs = a_tensor_deriv(p, &adjoint_generator(p, xi))?.quad(eta, zeta);
    let at = a_for_point(p)?;
    let rhs = -at.quad(bracket(xi, eta), zeta) - at.quad(eta, bracket(xi, zeta));
    Ok((lhs - rhs).abs())
}

/// Residual of finite equivariance: the tensor at the rotated point equals
/// the conjugated tensor, A(R a, R b, R c) = R A(a,b,c) R^T.
pub fn rotation_equivariance_residual(p: &MPoint, xi: AlgVec) -> Result<f64, PoissonError> {
    let r = adjoint_rotation(xi);
    let lhs = a_for_point(&p.rotate(&r))?;
    let rhs = a_for_point(p)?.conjugated(&r);
    Ok(lhs.sub(&rhs).max_abs())
}

/// Residual of the frame-covariance identity for the bracket triple: the
/// brackets in the frame rotated by O, evaluated at the transformed
/// coordinates, equal the reference-frame bracket triple multiplied by O.
pub fn frame_covariance_residual(
    p: &MPoint,
    o: &Frame,
    f: &LinearFn,
    g: &LinearFn,
) -> Result<f64, PoissonError> {
    let p2 = p.mix_slots(o);
    let at2 = a_for_point(&p2)?;
    let at = a_for_point(p)?;

    // Express the fixed functions in the rotated frame's coordinates:
    // reading slot s of the old coordinates is the combination
    // sum_j O[s][j] * (slot j of the new coordinates).
    let transformed = |l: &LinearFn| {
        let mut comb = LinComb::default();
        for j in 0..3 {
            comb.push(
                o.entry(l.slot.index(), j),
                LinearFn::new(Slot::from_index(j), l.xi),
            );
        }
        comb
    };
    let ft = transformed(f);
    let gt = transformed(g);

    let mut worst = 0.0f64;
    for (i, frame) in FrameIndex::ALL.iter().enumerate() {
        let lhs = linear_comb_bracket(&ft, &gt, *frame).eval_with(&p2, &at2);
        let mut rhs = 0.0;
        for (j, fj) in FrameIndex::ALL.iter().enumerate() {
            rhs += linear_bracket(f, g, *fj).eval_with(p, &at) * o.entry(j, i);
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
