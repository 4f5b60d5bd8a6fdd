//! Peak-power minimization for trusses under multi-harmonic periodic loads.
//!
//! Finite elements, harmonic loads, trigonometric polynomials, the conic
//! relaxation builders, an interior-point backend, analysis and sensitivities.
//! `no_std` with `alloc`; the `std` feature only adds wall-clock timing.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod analysis;
pub mod conic;
pub mod fem;
pub mod linalg;
pub mod loads;
pub mod presets;
pub mod reference;
pub mod sdp;
pub mod sensitivity;
pub mod solver;
pub mod trigpoly;
