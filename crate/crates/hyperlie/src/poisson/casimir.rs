//! The five casimirs cutting out the common symplectic leaves:
//! <a,b>, <b,c>, <c,a>, <a,a>-<b,b>, <b,b>-<c,c>.

use crate::algebra::inner;
use crate::poisson::{CotangentVec, MPoint, Tangent};

/// Values of the five casimirs at a point.
pub fn casimirs(p: &MPoint) -> [f64; 5] {
    [
        inner(p.a, p.b),
        inner(p.b, p.c),
        inner(p.c, p.a),
        inner(p.a, p.a) - inner(p.b, p.b),
        inner(p.b, p.b) - inner(p.c, p.c),
    ]
}

/// Analytic gradients of the five casimirs.
pub fn casimir_gradients(p: &MPoint) -> [CotangentVec; 5] {
    [
        CotangentVec::new(p.b, p.a, crate::algebra::AlgVec::ZERO),
        CotangentVec::new(crate::algebra::AlgVec::ZERO, p.c, p.b),
        CotangentVec::new(p.c, crate::algebra::AlgVec::ZERO, p.a),
        CotangentVec::new(p.a * 2.0, p.b * -2.0, crate::algebra::AlgVec::ZERO),
        CotangentVec::new(crate::algebra::AlgVec::ZERO, p.b * 2.0, p.c * -2.0),
    ]
}

/// Directional derivatives of all five casimirs along a tangent vector.
pub fn casimir_derivatives(p: &MPoint, t: &Tangent) -> [f64; 5] {
    let grads = casimir_gradients(p);
    [
        grads[0].pair(t),
        grads[1].pair(t),
        grads[2].pair(t),
        grads[3].pair(t),
        grads[4].pair(t),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgVec;
    use crate::poisson::{adjoint_generator, grad_phi, phi};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn values_on_reference_points() {
        let e = AlgVec::basis;
        assert_eq!(casimirs(&MPoint::new(e(0), e(1), e(2))), [0.0; 5]);
        assert_eq!(
            casimirs(&MPoint::new(e(0) * 2.0, e(1), e(2))),
            [0.0, 0.0, 0.0, 3.0, 0.0]
        );
    }

    #[test]
    fn annihilated_by_gradient_field_and_rotation_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rand_vec = |s: f64, rng: &mut ChaCha8Rng| {
            AlgVec::new(
                rng.random_range(-s..s),
                rng.random_range(-s..s),
                rng.random_range(-s..s),
            )
        };
        for _ in 0..200 {
            let p = MPoint::new(
                rand_vec(2.0, &mut rng),
                rand_vec(2.0, &mut rng),
                rand_vec(2.0, &mut rng),
            );
            let scale = 1.0 + p.norm() * p.norm();
            for d in casimir_derivatives(&p, &grad_phi(&p)) {
                assert!(d.abs() <= 1e-10 * scale * (1.0 + phi(&p).abs()));
            }
            let xi = rand_vec(2.0, &mut rng);
            for d in casimir_derivatives(&p, &adjoint_generator(&p, xi)) {
                assert!(d.abs() <= 1e-10 * scale * (1.0 + xi.norm()));
            }
        }
    }
}
