//! Numerical toolkit for the maximal function along the moment curve
//! `(t, t^2, ..., t^d)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`parabolic`]: parabolic dilations, the homogeneous norm `rho` and polar coordinates.
//! * [`oscillatory`]: polynomial-phase oscillatory integrals and sublevel-set measures.
//! * [`curve`]: Fourier transforms of the curve measures and their decay envelopes.
//! * [`stable`]: the parabolic Poisson kernel, stable samplers and its certification.
//! * [`multiplier`]: the dyadic `l^2` multiplier profile, its supremum and the growth experiment.
//! * [`maxop`]: grid realizations of the maximal operators and their pointwise reductions.
//!
//! Fourier transforms use `f^(xi) = \int f(x) e^{-2 pi i xi.x} dx` throughout.

// NaN-rejecting comparisons are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
mod error;
pub mod grid;
pub mod maxop;
pub mod multiplier;
pub mod oscillatory;
mod par;
pub mod parabolic;
pub mod poly;
pub mod quad;
pub mod rng;
pub mod stable;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use parabolic::ParabolicSpace;
