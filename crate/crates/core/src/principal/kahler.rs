use serde::Serialize;

use super::vector::{continued_vk, norm_sq};
use super::SpectralParam;
use crate::crown::{crown_contains, point_to_tangent, PairPoint};
use crate::error::{Error, Result};
use crate::lie::ProjPoint;
use crate::numerics::QuadratureConfig;
use crate::C64;

/// `‖π(exp(iφh)) v_K‖²`, which determines `‖π(z) v_K‖²` on the crown.
pub fn orbit_norm_sq(
    lambda: SpectralParam,
    phi: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let e = norm_sq(&continued_vk(lambda, phi), cfg)?;
    Ok((e.value.re, e.error))
}

/// Complex affine line `w ↦ (z₁ + w a₁, z₂ + w a₂)` in pair coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disc {
    pub center: PairPoint,
    pub direction: (C64, C64),
}

impl Disc {
    pub fn at(&self, w: C64) -> Result<PairPoint> {
        match (self.center.first, self.center.second) {
            (ProjPoint::Finite(a), ProjPoint::Finite(b)) => {
                PairPoint::finite(a + w * self.direction.0, b + w * self.direction.1)
            }
            _ => Err(Error::PointAtInfinity),
        }
    }
}

/// Five-point Laplacian in `w` of `log ‖π(c(w)) v_K‖²` at `w₀`.
///
/// Fails with `StepTooSmall` when the quadrature noise amplified by `1/step²`
/// is comparable to the result.
pub fn levi_check(
    lambda: SpectralParam,
    disc: &Disc,
    w0: C64,
    step: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let offsets = [
        C64::new(0.0, 0.0),
        C64::new(step, 0.0),
        C64::new(-step, 0.0),
        C64::new(0.0, step),
        C64::new(0.0, -step),
    ];
    let mut logs = [0.0; 5];
    let mut noise = 0.0;
    for (slot, off) in logs.iter_mut().zip(offsets) {
        let z = disc.at(w0 + off)?;
        if !crown_contains(&z) {
            return Err(Error::NotInCrown);
        }
        let phi = point_to_tangent(&z)?.y.h.re;
        let (n, err) = orbit_norm_sq(lambda, phi, cfg)?;
        *slot = n.ln();
        noise += err / n;
    }
    let lap = (logs[1] + logs[2] + logs[3] + logs[4] - 4.0 * logs[0]) / (step * step);
    let noise = 2.0 * noise / (step * step);
    if noise >= 0.5 * lap.abs() {
        return Err(Error::StepTooSmall { step });
    }
    Ok(lap)
}
