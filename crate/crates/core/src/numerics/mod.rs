//! Quadrature, finite differences, Taylor jets and sampled functions.

mod diff;
mod gauss;
mod grid;
mod jet;
mod quad;

pub use diff::{finite_diff, finite_diff_complex, DiffOrder};
pub use gauss::{gauss_legendre, GaussPanels};
pub use grid::{GridFunction, TailModel};
pub use jet::{Jet, MAX_ORDER};
pub use quad::{
    integrate, integrate_real, integrate_singular, tanh_sinh, trapezoid_periodic, Estimate,
    QuadratureConfig,
};
