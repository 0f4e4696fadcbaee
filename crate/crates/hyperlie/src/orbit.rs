//! Projections of coordinate triples onto sl(2,C), the real Lie-Poisson
//! structure there, orbit invariants, and the pointwise comparison of the
//! leaf symplectic form with the canonical orbit symplectic form.
//!
//! The real pairing on sl(2,C) is the real part of the complex-bilinear
//! extension of the invariant form; with this choice the pullbacks of
//! linear functions land in the first two (respectively first and third)
//! bracket blocks and the projections are Poisson maps exactly.

use crate::algebra::{complex_bracket, complex_pairing, AlgVec, Complex, ComplexAlgVec};
use crate::leaf::{leaf_chart, restricted_forms, LeafError};
use crate::linalg::{lstsq, numerical_rank, svd, vec_norm, Mat};
use crate::poisson::{
    a_for_point, linear_comb_bracket, LinComb, LinearFn, MPoint, PoissonError, Slot,
};

#[derive(Debug, thiserror::Error)]
pub enum OrbitError {
    #[error(transparent)]
    Leaf(#[from] LeafError),
    #[error(transparent)]
    Singular(#[from] PoissonError),
    #[error("pushforward is not representable by the adjoint action (residual {residual:e})")]
    RankDeficient { residual: f64 },
}

/// Which pair of slots a projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// (a, b, c) -> a + i b
    Pr12,
    /// (a, b, c) -> a + i c
    Pr13,
}

impl Projection {
    pub fn apply(self, p: &MPoint) -> ComplexAlgVec {
        match self {
            Projection::Pr12 => ComplexAlgVec::new(p.a, p.b),
            Projection::Pr13 => ComplexAlgVec::new(p.a, p.c),
        }
    }

    /// Pullback of the real-linear function Re<x, .> through the
    /// projection, as a combination of slot-linear functions.
    pub fn pull_back(self, x: ComplexAlgVec) -> LinComb {
        let imag_slot = match self {
            Projection::Pr12 => Slot::Second,
            Projection::Pr13 => Slot::Third,
        };
        let mut comb = LinComb::default();
        comb.push(1.0, LinearFn::new(Slot::First, x.re));
        comb.push(-1.0, LinearFn::new(imag_slot, x.im));
        comb
    }
}

pub fn pr12(p: &MPoint) -> ComplexAlgVec {
    Projection::Pr12.apply(p)
}

pub fn pr13(p: &MPoint) -> ComplexAlgVec {
    Projection::Pr13.apply(p)
}

/// Real Lie-Poisson bracket of the linear functions l_x(z) = Re<x, z> and
/// l_y at the point z: {l_x, l_y}(z) = Re<[x, y], z>.
pub fn lie_poisson_bracket(x: ComplexAlgVec, y: ComplexAlgVec, z: ComplexAlgVec) -> f64 {
    complex_pairing(complex_bracket(x, y), z).re
}

/// |{l_x o pr, l_y o pr}(p) - {l_x, l_y}(pr p)|: Poisson-map defect of a
/// projection on a pair of linear functions.
pub fn poisson_map_residual(
    p: &MPoint,
    x: ComplexAlgVec,
    y: ComplexAlgVec,
    proj: Projection,
) -> Result<f64, OrbitError> {
    let at = a_for_point(p)?;
    let fx = proj.pull_back(x);
    let fy = proj.pull_back(y);
    let upstairs = linear_comb_bracket(&fx, &fy, crate::poisson::FrameIndex::One).eval_with(p, &at);
    let downstairs = lie_poisson_bracket(x, y, proj.apply(p));
    Ok((upstairs - downstairs).abs())
}

/// Conjugation class of the orbit through z, decided by the complex
/// casimir <z, z>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    Zero,
    Nilpotent,
    RegularSemisimple,
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitClass {
    pub casimir: Complex,
    pub kind: OrbitKind,
}

const ORBIT_TOL: f64 = 1e-9;

pub fn orbit_classify(z: ComplexAlgVec) -> OrbitClass {
    let casimir = complex_pairing(z, z);
    let kind = if z.norm() <= ORBIT_TOL {
        OrbitKind::Zero
    } else if casimir.abs() <= ORBIT_TOL {
        OrbitKind::Nilpotent
    } else {
        OrbitKind::RegularSemisimple
    };
    OrbitClass { casimir, kind }
}

/// Rank of the projection differential restricted to the leaf tangent
/// space: the 6 x 4 matrix of pushed-forward chart basis vectors.
pub fn projection_rank(p: &MPoint) -> Result<usize, OrbitError> {
    let chart = leaf_chart(p)?;
    let mut m = Mat::zeros(6, 4);
    for (j, t) in chart.basis.iter().enumerate() {
        let col = [t.a.0[0], t.a.0[1], t.a.0[2], t.b.0[0], t.b.0[1], t.b.0[2]];
        m.set_col(j, &col);
    }
    let (_, sigma, _) = svd(&m);
    Ok(numerical_rank(&sigma, 1e-8))
}

/// Solve [u, z] = t for u in sl(2,C) in the least-squares sense, through
/// the real 6x6 embedding of the complex 3x3 system.
fn adjoint_representative(z: ComplexAlgVec, t: ComplexAlgVec) -> Result<ComplexAlgVec, OrbitError> {
    // [u, z] = u x z = -(z x u): complex matrix M = -[z]_x.
    let cross = |v: AlgVec| {
        let [a, b, c] = v.0;
        [[0.0, -c, b], [c, 0.0, -a], [-b, a, 0.0]]
    };
    let re = cross(z.re);
    let im = cross(z.im);
    let mut m = Mat::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = -re[i][j];
            m[(i, j + 3)] = im[i][j];
            m[(i + 3, j)] = -im[i][j];
            m[(i + 3, j + 3)] = -re[i][j];
        }
    }
    let mut rhs = [0.0; 6];
    rhs[..3].copy_from_slice(&t.re.0);
    rhs[3..].copy_from_slice(&t.im.0);
    let (x, _) = lstsq(&m, &rhs, 1e-10);
    let got = m.matvec(&x);
    let diff: Vec<f64> = got.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = vec_norm(&diff) / vec_norm(&rhs).max(1.0);
    if residual > 1e-8 {
        return Err(OrbitError::RankDeficient { residual });
    }
    Ok(ComplexAlgVec::new(
        AlgVec::new(x[0], x[1], x[2]),
        AlgVec::new(x[3], x[4], x[5]),
    ))
}

/// Comparison of the leaf symplectic form with the orbit symplectic form
/// pulled through the projection, up to one global sign.
#[derive(Debug, Clone, Copy)]
pub struct KksComparison {
    /// Sup-norm difference between the matched matrices.
    pub residual: f64,
    /// +1 or -1: the sign with which the orbit form matches the leaf form.
    pub sign: f64,
}

/// Evaluate the orbit symplectic form on the pushed-forward leaf basis and
/// compare with the leaf form of the reference frame. The orbit form is
/// omega(ad_u z, ad_v z) = Re<z, [u, v]>; leaf basis vectors are expressed
/// as ad_u z by least squares.
pub fn kks_residual(p: &MPoint) -> Result<KksComparison, OrbitError> {
    let chart = leaf_chart(p)?;
    let forms = restricted_forms(&chart)?;
    let z = pr12(p);
    let mut reps = Vec::with_capacity(4);
    for t in &chart.basis {
        let pushed = ComplexAlgVec::new(t.a, t.b);
        reps.push(adjoint_representative(z, pushed)?);
    }
    let mut k = Mat::zeros(4, 4);
    for i in 0..4 {
        for j in 0..4 {
            k[(i, j)] = complex_pairing(z, complex_bracket(reps[i], reps[j])).re;
        }
    }
    let w1 = &forms.w[0];
    let plus = k.sub(w1).max_abs();
    let minus = k.add(w1).max_abs();
    if plus <= minus {
        Ok(KksComparison {
            residual: plus,
            sign: 1.0,
        })
    } else {
        Ok(KksComparison {
            residual: minus,
            sign: -1.0,
        })
    }
}

/// The complex casimir of the first projection, whose real and imaginary
/// parts are flow casimirs: <a,a> - <b,b> + 2i <a,b>.
pub fn projected_casimir(p: &MPoint) -> Complex {
    let z = pr12(p);
    complex_pairing(z, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{adjoint_rotation, bracket, inner};
    use crate::flow::{integrate, FlowConfig};
    use crate::poisson::{grad_phi, phi};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(i: usize) -> AlgVec {
        AlgVec::basis(i)
    }

    fn std_point() -> MPoint {
        MPoint::new(e(0), e(1), e(2))
    }

    fn rand_vec(rng: &mut ChaCha8Rng, s: f64) -> AlgVec {
        AlgVec::new(
            rng.random_range(-s..s),
            rng.random_range(-s..s),
            rng.random_range(-s..s),
        )
    }

    fn rand_m_o(rng: &mut ChaCha8Rng) -> MPoint {
        loop {
            let p = MPoint::new(rand_vec(rng, 1.5), rand_vec(rng, 1.5), rand_vec(rng, 1.5));
            if phi(&p).abs() > 0.1 {
                return p;
            }
        }
    }

    #[test]
    fn projection_examples() {
        let z = pr12(&std_point());
        assert_eq!(z.re, e(0));
        assert_eq!(z.im, e(1));
        let w = pr13(&MPoint::new(AlgVec::new(1.0, 2.0, 3.0), e(1), AlgVec::ZERO));
        assert_eq!(w.re, AlgVec::new(1.0, 2.0, 3.0));
        assert_eq!(w.im, AlgVec::ZERO);
    }

    #[test]
    fn flow_pushforward_is_an_adjoint_tangent() {
        // d(pr12) X = [i c, a + i b] identically.
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..100 {
            let p = MPoint::new(
                rand_vec(&mut rng, 2.0),
                rand_vec(&mut rng, 2.0),
                rand_vec(&mut rng, 2.0),
            );
            let x = grad_phi(&p);
            let pushed = ComplexAlgVec::new(x.a, x.b);
            let ad = complex_bracket(ComplexAlgVec::new(AlgVec::ZERO, p.c), pr12(&p));
            assert!((pushed - ad).norm() < 1e-12 * (1.0 + pushed.norm()));
            // and for pr13 with -i b
            let pushed = ComplexAlgVec::new(x.a, x.c);
            let ad = complex_bracket(ComplexAlgVec::new(AlgVec::ZERO, -p.b), pr13(&p));
            assert!((pushed - ad).norm() < 1e-12 * (1.0 + pushed.norm()));
        }
    }

    #[test]
    fn lie_poisson_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let a = rand_vec(&mut rng, 2.0);
        let b = rand_vec(&mut rng, 2.0);
        let z = ComplexAlgVec::new(a, b);
        // real arguments reduce to the first-slot block
        let v = lie_poisson_bracket(ComplexAlgVec::real(e(0)), ComplexAlgVec::real(e(1)), z);
        assert!((v - inner(e(2), a)).abs() < 1e-15);
        // x = e1, y = -i e2 pairs with the imaginary part
        let v = lie_poisson_bracket(
            ComplexAlgVec::real(e(0)),
            ComplexAlgVec::new(AlgVec::ZERO, -e(1)),
            z,
        );
        assert!((v - inner(e(2), b)).abs() < 1e-15);
        // antisymmetry
        let x = ComplexAlgVec::new(rand_vec(&mut rng, 2.0), rand_vec(&mut rng, 2.0));
        assert_eq!(lie_poisson_bracket(x, x, z), 0.0);
    }

    #[test]
    fn projections_are_poisson_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..200 {
            let p = rand_m_o(&mut rng);
            let x = ComplexAlgVec::new(rand_vec(&mut rng, 2.0), rand_vec(&mut rng, 2.0));
            let y = ComplexAlgVec::new(rand_vec(&mut rng, 2.0), rand_vec(&mut rng, 2.0));
            for proj in [Projection::Pr12, Projection::Pr13] {
                let r = poisson_map_residual(&p, x, y, proj).unwrap();
                assert!(r < 1e-10, "poisson map residual {r:e}");
            }
        }
    }

    #[test]
    fn orbit_classification_examples() {
        let z = ComplexAlgVec::new(e(0), e(1));
        let class = orbit_classify(z);
        assert_eq!(class.kind, OrbitKind::Nilpotent);
        assert!(class.casimir.abs() < 1e-15);

        let z = ComplexAlgVec::new(e(0) * 2f64.sqrt(), e(1));
        let class = orbit_classify(z);
        assert_eq!(class.kind, OrbitKind::RegularSemisimple);
        assert!((class.casimir.re - 1.0).abs() < 1e-12 && class.casimir.im.abs() < 1e-15);

        assert_eq!(
            orbit_classify(ComplexAlgVec::default()).kind,
            OrbitKind::Zero
        );
    }

    #[test]
    fn projected_casimir_is_conserved_and_matches_the_radius() {
        let p0 = MPoint::new(e(0) * 2f64.sqrt(), e(1), e(2));
        assert!((projected_casimir(&p0).re - 1.0).abs() < 1e-12);
        let traj = integrate(&p0, &FlowConfig::new(0.0, -15.0)).unwrap();
        for p in &traj.points {
            let c = projected_casimir(p);
            assert!((c.re - 1.0).abs() < 1e-8 && c.im.abs() < 1e-8);
        }
        // G-action preserves it as well
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let r = adjoint_rotation(rand_vec(&mut rng, 3.0));
        let c = projected_casimir(&p0.rotate(&r));
        assert!((c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12);
    }

    #[test]
    fn projection_rank_is_four_on_the_strata() {
        assert_eq!(
            projection_rank(&MPoint::new(e(0) * 2f64.sqrt(), e(1), e(2))).unwrap(),
            4
        );
        assert_eq!(projection_rank(&std_point()).unwrap(), 4);
    }

    #[test]
    fn nilpotent_points_satisfy_the_closure_identity() {
        // On the zero-orbit stratum, c = [a,b]/|a| identically.
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        for _ in 0..20 {
            let lam = rng.random_range(0.2..2.0);
            let r = adjoint_rotation(rand_vec(&mut rng, 3.0));
            let p = MPoint::new(
                r.rotate(e(0)) * lam,
                r.rotate(e(1)) * lam,
                r.rotate(e(2)) * lam,
            );
            let predicted = bracket(p.a, p.b) * (1.0 / inner(p.a, p.a).sqrt());
            assert!((predicted - p.c).norm() < 1e-12 * (1.0 + p.c.norm()));
        }
    }

    #[test]
    fn preimages_of_bounded_regions_stay_bounded_on_the_stratum() {
        // On the orbit stratum the third coordinate is controlled by the
        // projected pair: <c,c> <= r^2 + <b,b> in any frame, so bounded
        // (a, b) forces bounded c under the projection.
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        for _ in 0..100 {
            let r = rng.random_range(0.3..2.0);
            let lam = rng.random_range(0.1..2.0);
            let p0 = crate::sample::sample_stratum(&mut rng, r, lam);
            let o = adjoint_rotation(rand_vec(&mut rng, 3.0));
            let p = p0.mix_slots(&o);
            assert!(
                inner(p.c, p.c) <= r * r + inner(p.b, p.b) + 1e-12,
                "bound violated"
            );
        }
    }

    #[test]
    fn orbit_form_matches_leaf_form_up_to_one_sign() {
        let rep = kks_residual(&MPoint::new(e(0) * 2f64.sqrt(), e(1), e(2))).unwrap();
        assert!(rep.residual < 1e-6, "residual {:e}", rep.residual);
        let nil = kks_residual(&std_point()).unwrap();
        assert!(nil.residual < 1e-6, "residual {:e}", nil.residual);
        assert_eq!(rep.sign, nil.sign);
    }

    #[test]
    fn adjoint_representative_requires_orbit_tangency() {
        // a direction transverse to the orbit is rejected
        let z = ComplexAlgVec::new(e(0), e(1)); // nilpotent, <z,z> = 0
                                                // [u,z] always pairs to zero with z, so t = z itself cannot be hit
                                                // unless <z,z> = 0 ... here <z,t> = <z,z> = 0, so use t with
                                                // <z,t> != 0 to force failure
        let t = ComplexAlgVec::new(e(0), -e(1));
        assert!(matches!(
            adjoint_representative(z, t),
            Err(OrbitError::RankDeficient { .. })
        ));
    }
}
