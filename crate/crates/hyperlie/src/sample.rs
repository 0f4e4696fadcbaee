//! Seeded, reproducible sampling of algebra elements, points, rotations
//! and stratum points. Every suite derives its generator from a base seed
//! and a label, so reports are identical run to run.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{adjoint_rotation, AlgVec, Frame};
use crate::poisson::{phi, MPoint};

/// Sign region of the invariant to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Plus,
    Minus,
    Both,
}

impl Region {
    pub fn parse(s: &str) -> Option<Region> {
        match s {
            "plus" => Some(Region::Plus),
            "minus" => Some(Region::Minus),
            "both" => Some(Region::Both),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Plus => "plus",
            Region::Minus => "minus",
            Region::Both => "both",
        }
    }

    fn accepts(&self, phi_val: f64, floor: f64) -> bool {
        match self {
            Region::Plus => phi_val > floor,
            Region::Minus => phi_val < -floor,
            Region::Both => phi_val.abs() > floor,
        }
    }
}

/// Split a base seed with a label (FNV-1a mix) so suites draw independent
/// but reproducible streams.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn sample_vec(rng: &mut ChaCha8Rng, scale: f64) -> AlgVec {
    AlgVec::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

/// Unit vector, by rejection from the cube.
pub fn sample_unit_vec(rng: &mut ChaCha8Rng) -> AlgVec {
    loop {
        let v = sample_vec(rng, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

pub fn sample_point(rng: &mut ChaCha8Rng, scale: f64) -> MPoint {
    MPoint::new(
        sample_vec(rng, scale),
        sample_vec(rng, scale),
        sample_vec(rng, scale),
    )
}

/// Point with the invariant bounded away from zero in the chosen region.
pub fn sample_m_o(rng: &mut ChaCha8Rng, phi_min: f64, region: Region) -> MPoint {
    loop {
        let p = sample_point(rng, 1.5);
        if region.accepts(phi(&p), phi_min) {
            return p;
        }
    }
}

/// Haar-ish random rotation via the exponential of a random generator.
pub fn sample_rotation(rng: &mut ChaCha8Rng) -> Frame {
    adjoint_rotation(sample_vec(rng, std::f64::consts::PI))
}

/// Point of the backward-flow stratum with orbit radius `r` and scale
/// `lambda`, in standard alignment rotated by a random group element:
/// (sqrt(lambda^2 + r^2) R e1, lambda R e2, lambda R e3).
pub fn sample_stratum(rng: &mut ChaCha8Rng, r: f64, lambda: f64) -> MPoint {
    let rot = sample_rotation(rng);
    let s = (lambda * lambda + r * r).sqrt();
    MPoint::new(
        rot.rotate(AlgVec::E1) * s,
        rot.rotate(AlgVec::E2) * lambda,
        rot.rotate(AlgVec::E3) * lambda,
    )
}
