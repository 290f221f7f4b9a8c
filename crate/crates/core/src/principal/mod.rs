//! The spherical unitary principal series on `L²(R)` and its continuation
//! into the crown.

mod hfunc;
mod kahler;
mod spherical;
mod vector;

use serde::Serialize;

use crate::error::{Error, Result};

pub use hfunc::{h_functional_eval, vh_limit_scan, Convention, HFunctional, HKind, LimitPoint};
pub use kahler::{levi_check, orbit_norm_sq, Disc};
pub use spherical::{
    doubling_check, phi_lambda, phi_laplace, phi_mehler, phi_superposition, DoublingCheck,
};
pub use vector::{
    apply_pi, continue_vk, continued_vk, d_pi, inner, l2_norm, norm_growth, norm_sq, orbit_vector,
    v_k, AnalyticVector, Direction, NormGrowthPoint, RepVector,
};

/// Real spectral parameter of a tempered spherical principal series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParam {
    pub lambda: f64,
}

impl SpectralParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "spectral parameter {lambda} is not finite"
            )));
        }
        Ok(Self { lambda })
    }

    /// The parameter of the same representation under `λ ↦ -λ`.
    pub fn reflect(self) -> Self {
        Self {
            lambda: -self.lambda,
        }
    }
}
