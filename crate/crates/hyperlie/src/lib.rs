//! Numerics for a frame-parameterised family of compatible Poisson
//! structures on the product of three copies of su(2).
//!
//! The crate provides:
//!
//! - exact su(2) and sl(2,C) primitives ([`algebra`]);
//! - the cubic invariant, the symmetric tensor entering the mixed bracket
//!   block, bracket tables, casimirs, and the stratification by
//!   backward-flow basins ([`poisson`]);
//! - pointwise charts of the common 4-dimensional symplectic leaves with
//!   their symplectic triple, pseudo-metric and quaternionic structures
//!   ([`leaf`]);
//! - an adaptive integrator for the gradient flow of the invariant
//!   (Nahm's equations) with conserved-quantity monitoring and basin
//!   classification ([`flow`]);
//! - projections onto sl(2,C) with its real Lie-Poisson structure, orbit
//!   invariants and the orbit-symplectic-form comparison ([`orbit`]);
//! - seed-split reproducible verification suites ([`verify`]).

// index loops over tiny fixed-size matrices read better than iterators
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod flow;
pub mod leaf;
pub mod linalg;
pub mod orbit;
pub mod poisson;
pub mod sample;
pub mod verify;
