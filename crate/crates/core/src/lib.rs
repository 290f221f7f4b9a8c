//! Numerics for the crown domain of the upper half plane.
//!
//! The crate models the crown `Xi = X x conj(X)` inside the complexified
//! symmetric space of `SL(2,R)`, the holomorphic horospherical projection on
//! it, the spherical unitary principal series continued into the crown,
//! Sobolev norms of continued vectors, the spherical transform with its
//! Parseval and Gutzmer identities, invariant kernels, and the Fourier
//! coefficient bound chain used for cusp forms.
//!
//! Every quantity that can be checked numerically is exposed together with
//! an error estimate, and the [`suite`] module bundles the acceptance checks.

pub mod config;
pub mod crown;
pub mod error;
pub mod horo;
pub mod lie;
pub mod maass;
pub mod numerics;
pub mod par;
pub mod principal;
pub mod sobolev;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
