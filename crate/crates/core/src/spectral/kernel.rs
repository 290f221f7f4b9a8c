//! `G`-invariant sesqui-holomorphic kernels on the crown and the
//! polarised Poisson kernel.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{LambdaGrid, SpectralDensity};
use crate::crown::{crown_contains, PairPoint};
use crate::error::{Error, Result};
use crate::lie::GroupElement;
use crate::numerics::{integrate, QuadratureConfig};
use crate::principal::phi_superposition;
use crate::{c, par, C64, I};

/// Exponents `c` at which `∫ e^{cλ} dμ` must be finite.
pub const ADMISSIBILITY_PROBES: [f64; 3] = [0.5, 1.0, 1.9];

/// A positive measure `dμ = m(λ) dλ` on the tempered ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMeasure {
    pub density: SpectralDensity,
}

impl KernelMeasure {
    pub fn new(density: SpectralDensity) -> Result<Self> {
        if density.values.iter().any(|v| v.re < 0.0 || v.im != 0.0) {
            return Err(Error::InvalidInput(
                "kernel measure must be real and non-negative".into(),
            ));
        }
        for c in ADMISSIBILITY_PROBES {
            if admissibility_integral(&density, c).is_none() {
                return Err(Error::AdmissibilityFailure { c });
            }
        }
        Ok(Self { density })
    }

    /// `λ tanh(πλ/2) / cosh(πλ) dλ` on the standard grid.
    pub fn hardy() -> Self {
        static HARDY: OnceLock<KernelMeasure> = OnceLock::new();
        HARDY
            .get_or_init(|| {
                let d = SpectralDensity::from_fn(
                    &LambdaGrid::standard(),
                    |l| c(l * (0.5 * PI * l).tanh() / (PI * l).cosh(), 0.0),
                    None,
                )
                .expect("finite density");
                KernelMeasure::new(d).expect("the Hardy density decays like exp(-pi lambda)")
            })
            .clone()
    }

    /// `μ([0, ∞))`, the kernel on the diagonal at `x₀`.
    pub fn total_mass(&self) -> f64 {
        self.density.integrate(|_, v| v).re
    }
}

/// `∫ e^{cλ} |m(λ)| dλ` on the grid, or `None` when the tail diverges.
pub fn admissibility_integral(d: &SpectralDensity, c: f64) -> Option<f64> {
    if !d.decay_tag.integrable(1.0, c) {
        return None;
    }
    let v = d.integrate(|l, v| C64::from(v.norm() * (c * l).exp())).re;
    v.is_finite().then_some(v)
}

/// The invariant `C(z, w)` with `K^λ(z, w) = Φ_λ(2C)`:
/// `C = 1 - 2 (z₁ - w̄₂)(z₂ - w̄₁) / ((z₁ - z₂)(w̄₂ - w̄₁))`.
///
/// `C` is unchanged by real Möbius maps, so coordinates at infinity are
/// first rotated away.
pub fn kernel_trace(z: &PairPoint, w: &PairPoint) -> Result<C64> {
    if !crown_contains(z) || !crown_contains(w) {
        return Err(Error::NotInCrown);
    }
    let [z1, z2, w1, w2] = finite_frame(z, w)?;
    let (s, t) = (w2.conj(), w1.conj());
    Ok(1.0 - 2.0 * (z1 - s) * (z2 - t) / ((z1 - z2) * (s - t)))
}

fn finite_frame(z: &PairPoint, w: &PairPoint) -> Result<[C64; 4]> {
    for j in 0..32 {
        let g = GroupElement::k(0.1 * j as f64);
        let pts = [z.first, z.second, w.first, w.second].map(|p| g.act(p).finite());
        if pts.iter().all(|p| p.is_some_and(|p| p.norm() < 1e6)) {
            return Ok(pts.map(|p| p.expect("checked")));
        }
    }
    Err(Error::PointAtInfinity)
}

/// `K(z, w) = ∫ Φ_λ(2C(z, w)) dμ(λ)`, holomorphic in `z`, antiholomorphic
/// in `w`.
pub fn invariant_kernel(
    mu: &KernelMeasure,
    z: &PairPoint,
    w: &PairPoint,
    cfg: &QuadratureConfig,
) -> Result<C64> {
    let zeta = kernel_trace(z, w)?.acosh();
    phi_superposition(&mu.density.terms(|_| 1.0), zeta, cfg)
}

pub fn hardy_kernel(z: &PairPoint, w: &PairPoint, cfg: &QuadratureConfig) -> Result<C64> {
    invariant_kernel(&KernelMeasure::hardy(), z, w, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub matrix: Vec<Vec<C64>>,
    /// `max |K_ij - conj K_ji|`
    pub hermitian_gap: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub trace: f64,
}

/// Gram matrix `K(z_i, z_j)` and the spectrum of its Hermitian part.
pub fn gram_matrix(
    mu: &KernelMeasure,
    points: &[PairPoint],
    cfg: &QuadratureConfig,
) -> Result<GramReport> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    let entries = par::try_map_range(n * n, |k| {
        invariant_kernel(mu, &points[k / n], &points[k % n], cfg)
    })?;
    let m = DMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
    let mut gap: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            gap = gap.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let herm = (&m + m.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GramReport {
        matrix: (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)]).collect())
            .collect(),
        hermitian_gap: gap,
        min_eigenvalue: min,
        max_eigenvalue: max,
        trace: (0..n).map(|i| m[(i, i)].re).sum(),
    })
}

/// `P(z) = Im z / (π |z|²)` on the upper half plane.
pub fn poisson_kernel(z: C64) -> Result<f64> {
    if !(z.im > 0.0) {
        return Err(Error::NotInCrown);
    }
    Ok(z.im / (PI * z.norm_sqr()))
}

/// `P~(z, w) = (z - w) / (2πi z w)`, equal to `P(z)` at `w = z̄`; its real
/// part is positive on `X × X̄`.
pub fn poisson_polarized(z: C64, w: C64) -> Result<C64> {
    if !(z.im > 0.0 && w.im < 0.0) {
        return Err(Error::NotInCrown);
    }
    Ok((z - w) / (2.0 * PI * I * z * w))
}

/// `∫ b(x) P~(z - x, w - x)^μ dx`, the holomorphic extension to the crown
/// of the eigenfunction with boundary values `b`.
pub fn poisson_extension(
    boundary: impl Fn(f64) -> C64,
    mu: C64,
    z: C64,
    w: C64,
    cfg: &QuadratureConfig,
) -> Result<C64> {
    poisson_polarized(z, w)?;
    let est = integrate(
        |x| {
            let p = (z - w) / (2.0 * PI * I * (z - x) * (w - x));
            boundary(x) * p.powc(mu)
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        cfg,
    )?;
    Ok(est.value)
}
