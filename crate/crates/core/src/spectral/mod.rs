//! Spherical transform of `K`-invariant functions on the upper half plane,
//! the Parseval and Gutzmer identities, strip norms, and invariant kernels
//! on the crown.
//!
//! Radial functions are given in hyperbolic distance `ρ` from `x₀` (the
//! point `a_t x₀` sits at `ρ = 2 log t`), the area element is
//! `2π sinh ρ dρ`, and `φ_λ(ρ) = Φ_λ(2 cosh ρ)` with the spectral
//! parameter of [`crate::principal`].

mod kernel;

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_singular, GaussPanels, QuadratureConfig};
use crate::principal::{phi_mehler, phi_superposition, SpectralParam};
use crate::{c, par, C64};

pub use kernel::{
    admissibility_integral, gram_matrix, hardy_kernel, invariant_kernel, kernel_trace,
    poisson_extension, poisson_kernel, poisson_polarized, GramReport, KernelMeasure,
    ADMISSIBILITY_PROBES,
};

/// Constant in front of `λ tanh(πλ/2) dλ`, obtained from the Parseval
/// calibration on `exp(-ρ²)` over the standard grid and frozen.
pub const PLANCHEREL_CONSTANT: f64 = 0.039_788_735_772_973_836;

/// Values below this are treated as underflow when reading off decay.
const NEGLIGIBLE: f64 = 1e-280;

/// Quadrature nodes and weights on a segment of the tempered ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LambdaGrid {
    /// 400 Gauss nodes on `[0, 30]`, with panels halving towards 0.
    pub fn standard() -> Self {
        Self::graded(30.0, 5, 20, 16)
    }

    pub fn graded(max: f64, levels: usize, uniform: usize, order: usize) -> Self {
        let p = GaussPanels::graded(0.0, max, levels, uniform, order);
        Self {
            nodes: p.nodes,
            weights: p.weights,
        }
    }

    /// Uniform Gauss panels on `[lo, hi]`.
    pub fn panels(lo: f64, hi: f64, panels: usize, order: usize) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi.is_finite()) || panels == 0 || order == 0 {
            return Err(Error::InvalidInput(format!(
                "bad lambda range [{lo}, {hi}]"
            )));
        }
        let breaks: Vec<f64> = (0..=panels)
            .map(|j| lo + (hi - lo) * j as f64 / panels as f64)
            .collect();
        let p = GaussPanels::new(&breaks, order);
        Ok(Self {
            nodes: p.nodes,
            weights: p.weights,
        })
    }

    /// Trapezoid weights on arbitrary increasing nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2
            || nodes[0] < 0.0
            || nodes.windows(2).any(|p| !(p[1] > p[0]))
            || !nodes[nodes.len() - 1].is_finite()
        {
            return Err(Error::InvalidInput(
                "lambda nodes must be increasing, finite and non-negative".into(),
            ));
        }
        let n = nodes.len();
        let weights = (0..n)
            .map(|j| {
                let left = if j > 0 { nodes[j] - nodes[j - 1] } else { 0.0 };
                let right = if j + 1 < n {
                    nodes[j + 1] - nodes[j]
                } else {
                    0.0
                };
                0.5 * (left + right)
            })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Tail behaviour of a spectral density, `|d(λ)|` as `λ → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayTag {
    SuperExponential,
    /// `|d| ~ e^{-rate·λ}`; a negative rate is growth.
    Exponential {
        rate: f64,
    },
    /// `|d| ~ λ^{-power}`.
    Polynomial {
        power: f64,
    },
}

impl DecayTag {
    /// Reads the tail off the upper third of the grid: underflow or a
    /// concave `log|d|` is super-exponential, otherwise whichever of a
    /// linear fit in `λ` or in `log λ` has the smaller residual.
    pub fn fit(nodes: &[f64], values: &[C64]) -> Self {
        let top = nodes.last().copied().unwrap_or(0.0);
        let tail: Vec<(f64, f64)> = nodes
            .iter()
            .zip(values)
            .filter(|(l, v)| **l >= 2.0 * top / 3.0 && **l > 0.0 && v.norm() > NEGLIGIBLE)
            .map(|(l, v)| (*l, v.norm().ln()))
            .collect();
        let n_tail = nodes
            .iter()
            .filter(|l| **l >= 2.0 * top / 3.0 && **l > 0.0)
            .count();
        if tail.len() < 6 || tail.len() < n_tail {
            return DecayTag::SuperExponential;
        }
        let quad = least_squares(&tail, |l| vec![1.0, l, l * l]);
        if quad.0[2] < -1e-2 {
            return DecayTag::SuperExponential;
        }
        let lin = least_squares(&tail, |l| vec![1.0, l]);
        let log = least_squares(&tail, |l| vec![1.0, l.ln()]);
        if log.1 < lin.1 {
            DecayTag::Polynomial { power: -log.0[1] }
        } else {
            DecayTag::Exponential { rate: -lin.0[1] }
        }
    }

    /// Whether `∫ |d(λ)|^p e^{cλ} dλ` converges.
    pub fn integrable(&self, p: f64, c: f64) -> bool {
        match *self {
            DecayTag::SuperExponential => true,
            DecayTag::Exponential { rate } => p * rate > c,
            DecayTag::Polynomial { power } => c < 0.0 || (c == 0.0 && p * power > 2.0),
        }
    }
}

fn least_squares(points: &[(f64, f64)], basis: impl Fn(f64) -> Vec<f64>) -> (Vec<f64>, f64) {
    let cols = basis(1.0).len();
    let a = DMatrix::from_fn(points.len(), cols, |i, j| basis(points[i].0)[j]);
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let res = (a * &x - b).norm();
    (x.iter().copied().collect(), res)
}

/// Values of a function of `λ` on a grid of the tempered ray, with the
/// grid's quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDensity {
    pub lambda_grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<C64>,
    pub decay_tag: DecayTag,
}

impl SpectralDensity {
    pub fn new(grid: &LambdaGrid, values: Vec<C64>, decay_tag: DecayTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidInput(
                "spectral density has non-finite values".into(),
            ));
        }
        Ok(Self {
            lambda_grid: grid.nodes.clone(),
            weights: grid.weights.clone(),
            values,
            decay_tag,
        })
    }

    /// Samples `f` on the grid; the decay tag is fitted unless given.
    pub fn from_fn(
        grid: &LambdaGrid,
        f: impl Fn(f64) -> C64,
        decay_tag: Option<DecayTag>,
    ) -> Result<Self> {
        let values: Vec<C64> = grid.nodes.iter().map(|&l| f(l)).collect();
        let tag = decay_tag.unwrap_or_else(|| DecayTag::fit(&grid.nodes, &values));
        Self::new(grid, values, tag)
    }

    /// `exp(-(λ - center)² / (2 width²))`.
    pub fn gaussian(grid: &LambdaGrid, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && center.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gaussian needs width > 0, got {width}"
            )));
        }
        Self::from_fn(
            grid,
            |l| c((-(l - center).powi(2) / (2.0 * width * width)).exp(), 0.0),
            Some(DecayTag::SuperExponential),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Σ_j w_j g(λ_j, d(λ_j))`.
    pub fn integrate(&self, g: impl Fn(f64, C64) -> C64) -> C64 {
        self.lambda_grid
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((l, w), v)| g(*l, *v) * *w)
            .sum()
    }

    /// `(λ_j, w_j d(λ_j) m(λ_j))` with negligible terms dropped.
    fn terms(&self, m: impl Fn(f64) -> f64) -> Vec<(f64, C64)> {
        let all: Vec<(f64, C64)> = self
            .lambda_grid
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((l, w), v)| (*l, *v * (w * m(*l))))
            .collect();
        let big = all.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
        all.into_iter()
            .filter(|t| t.1.norm() > 1e-17 * big)
            .collect()
    }

    /// Three columns `lambda,re,im` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,re,im\n");
        for (l, v) in self.lambda_grid.iter().zip(&self.values) {
            out.push_str(&format!("{l:e},{:e},{:e}\n", v.re, v.im));
        }
        out
    }

    /// Reads [`Self::to_csv`] output; weights are rebuilt with the
    /// trapezoid rule and the decay tag is fitted.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (n == 0 && line.starts_with("lambda")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("line {}: {e}", n + 1)))
            };
            match cols.as_slice() {
                [l, re, im] => {
                    nodes.push(parse(l)?);
                    values.push(c(parse(re)?, parse(im)?));
                }
                [l, re] => {
                    nodes.push(parse(l)?);
                    values.push(c(parse(re)?, 0.0));
                }
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "line {}: expected lambda,re,im",
                        n + 1
                    )))
                }
            }
        }
        let grid = LambdaGrid::from_nodes(nodes)?;
        let tag = DecayTag::fit(&grid.nodes, &values);
        Self::new(&grid, values, tag)
    }
}

/// A real function of hyperbolic distance, negligible beyond `reach`.
#[derive(Clone)]
pub struct RadialFunction {
    label: String,
    reach: f64,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("label", &self.label)
            .field("reach", &self.reach)
            .finish()
    }
}

impl RadialFunction {
    pub fn new(
        label: impl Into<String>,
        reach: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(reach > 0.0 && reach.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "reach must be positive, got {reach}"
            )));
        }
        Ok(Self {
            label: label.into(),
            reach,
            f: Arc::new(f),
        })
    }

    /// `exp(-(ρ/width)²)`, cut where `f² sinh ρ < e^{-75}`.
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "width must be positive, got {width}"
            )));
        }
        let w2 = width * width;
        let reach = 0.25 * w2 * (1.0 + (1.0 + 600.0 / w2).sqrt());
        Self::new(format!("gauss({width})"), reach, move |r| {
            (-(r * r) / w2).exp()
        })
    }

    pub fn zero() -> Self {
        Self::new("zero", 1.0, |_| 0.0).expect("positive reach")
    }

    /// `ρ ↦ f(ρ / s)`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "dilation must be positive, got {s}"
            )));
        }
        let f = self.f.clone();
        Self::new(format!("{}(./{s})", self.label), self.reach * s, move |r| {
            f(r / s)
        })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        (self.f)(rho)
    }

    pub fn reach(&self) -> f64 {
        self.reach
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(ρ_k, 2π w_k f(ρ_k) sinh ρ_k)` on Gauss panels of width at most 1/4.
    fn area_nodes(&self) -> Vec<(f64, f64)> {
        let panels = (self.reach / 0.25).ceil().max(4.0) as usize;
        let breaks: Vec<f64> = (0..=panels)
            .map(|j| self.reach * j as f64 / panels as f64)
            .collect();
        let p = GaussPanels::new(&breaks, 16);
        p.nodes
            .iter()
            .zip(&p.weights)
            .map(|(r, w)| (*r, 2.0 * PI * w * self.eval(*r) * r.sinh()))
            .collect()
    }
}

/// `∫_X |f|² dz`.
pub fn radial_l2_sq(f: &RadialFunction) -> f64 {
    f.area_nodes().iter().map(|(r, m)| m * f.eval(*r)).sum()
}

/// `F(λ) = ∫_X f(z) φ_λ(z) dz = 2π ∫ f(ρ) φ_λ(ρ) sinh ρ dρ` on the grid.
///
/// With `φ_λ` in Mehler form the double integral factors through the Abel
/// transform `A(s) = ∫_s^∞ f(ρ) sinh ρ (cosh ρ - cosh s)^{-1/2} dρ` as
/// `F(λ) = 2√2 ∫_0^∞ cos(λs/2) A(s) ds`, so `A` is computed once for all `λ`.
pub fn spherical_transform(
    f: &RadialFunction,
    grid: &LambdaGrid,
    cfg: &QuadratureConfig,
) -> Result<SpectralDensity> {
    let panels = (f.reach / 0.2).ceil().max(4.0) as usize;
    let breaks: Vec<f64> = (0..=panels)
        .map(|j| f.reach * j as f64 / panels as f64)
        .collect();
    let sp = GaussPanels::new(&breaks, 16);
    let tol = cfg.abs_tol.min(1e-12);
    let abel = par::try_map(&sp.nodes, |&s| -> Result<f64> {
        // ρ = s + u², with cosh ρ - cosh s = 2 sinh(s + u²/2) sinh(u²/2)
        let est = integrate_singular(
            |u| {
                let rho = s + u * u;
                let half = 0.5 * u * u;
                let q = if half < 1e-8 {
                    (s + half).sinh()
                } else {
                    2.0 * (s + half).sinh() * half.sinh() / (u * u)
                };
                c(2.0 * f.eval(rho) * rho.sinh() / q.sqrt(), 0.0)
            },
            0.0,
            (f.reach - s).max(0.0).sqrt(),
            &[],
            tol,
        )?;
        Ok(est.value.re)
    })?;
    let values: Vec<C64> = par::map(&grid.nodes, |&l| {
        let sum: f64 = sp
            .nodes
            .iter()
            .zip(&sp.weights)
            .zip(&abel)
            .map(|((s, w), a)| w * (0.5 * l * s).cos() * a)
            .sum();
        c(2.0 * 2f64.sqrt() * sum, 0.0)
    });
    let tag = DecayTag::fit(&grid.nodes, &values);
    SpectralDensity::new(grid, values, tag)
}

/// [`spherical_transform`] evaluated literally, one `φ_λ(ρ)` per node.
pub fn spherical_transform_direct(
    f: &RadialFunction,
    grid: &LambdaGrid,
    cfg: &QuadratureConfig,
) -> Result<SpectralDensity> {
    let area: Vec<(f64, f64)> = f
        .area_nodes()
        .into_iter()
        .filter(|(_, m)| *m != 0.0)
        .collect();
    let values = par::try_map(&grid.nodes, |&l| -> Result<C64> {
        let lam = SpectralParam::new(l)?;
        let mut sum = 0.0;
        for (r, m) in &area {
            sum += m * phi_mehler(lam, c(*r, 0.0), cfg)?.re;
        }
        Ok(c(sum, 0.0))
    })?;
    let tag = DecayTag::fit(&grid.nodes, &values);
    SpectralDensity::new(grid, values, tag)
}

/// The two printed candidates for the Plancherel density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightForm {
    /// `λ tanh(πλ/2)`
    HalfAngle,
    /// `λ tanh(πλ)`
    FullAngle,
}

impl WeightForm {
    pub fn density(self, lambda: f64) -> f64 {
        match self {
            WeightForm::HalfAngle => lambda * (0.5 * PI * lambda).tanh(),
            WeightForm::FullAngle => lambda * (PI * lambda).tanh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlancherelWeight {
    pub form: WeightForm,
    pub calibration_constant: f64,
}

impl PlancherelWeight {
    pub fn new(form: WeightForm, calibration_constant: f64) -> Result<Self> {
        if !(calibration_constant > 0.0 && calibration_constant.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "calibration constant must be positive, got {calibration_constant}"
            )));
        }
        Ok(Self {
            form,
            calibration_constant,
        })
    }

    /// `λ tanh(πλ/2)` with the frozen constant.
    pub fn calibrated() -> Self {
        Self {
            form: WeightForm::HalfAngle,
            calibration_constant: PLANCHEREL_CONSTANT,
        }
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.calibration_constant * self.form.density(lambda)
    }
}

impl Default for PlancherelWeight {
    fn default() -> Self {
        Self::calibrated()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub form: WeightForm,
    pub function: String,
    /// `∫_X |f|²`
    pub lhs: f64,
    /// `∫ |F|² w(λ) dλ` with unit constant.
    pub raw: f64,
    pub constant: f64,
}

/// The constant making Parseval exact for `f` under `form`.
pub fn calibrate(
    f: &RadialFunction,
    form: WeightForm,
    grid: &LambdaGrid,
    cfg: &QuadratureConfig,
) -> Result<Calibration> {
    let d = spherical_transform(f, grid, cfg)?;
    calibrate_with(f, &d, form)
}

fn calibrate_with(
    f: &RadialFunction,
    d: &SpectralDensity,
    form: WeightForm,
) -> Result<Calibration> {
    let lhs = radial_l2_sq(f);
    let raw = d
        .integrate(|l, v| c(v.norm_sqr() * form.density(l), 0.0))
        .re;
    if !(lhs > 0.0 && raw > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cannot calibrate on {}",
            f.label()
        )));
    }
    Ok(Calibration {
        form,
        function: f.label().to_string(),
        lhs,
        raw,
        constant: lhs / raw,
    })
}

/// Calibrations of both weight forms on two functions; the form whose
/// constant does not depend on the function is selected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlancherelVerdict {
    pub half_angle: [Calibration; 2],
    pub full_angle: [Calibration; 2],
    /// Relative disagreement of the two constants.
    pub half_angle_spread: f64,
    pub full_angle_spread: f64,
    pub selected: WeightForm,
}

pub fn plancherel_verdict(
    first: &RadialFunction,
    second: &RadialFunction,
    grid: &LambdaGrid,
    cfg: &QuadratureConfig,
) -> Result<PlancherelVerdict> {
    let d1 = spherical_transform(first, grid, cfg)?;
    let d2 = spherical_transform(second, grid, cfg)?;
    let pair = |form| -> Result<[Calibration; 2]> {
        Ok([
            calibrate_with(first, &d1, form)?,
            calibrate_with(second, &d2, form)?,
        ])
    };
    let spread = |p: &[Calibration; 2]| (p[0].constant - p[1].constant).abs() / p[0].constant;
    let half_angle = pair(WeightForm::HalfAngle)?;
    let full_angle = pair(WeightForm::FullAngle)?;
    let (hs, fs) = (spread(&half_angle), spread(&full_angle));
    Ok(PlancherelVerdict {
        half_angle,
        full_angle,
        half_angle_spread: hs,
        full_angle_spread: fs,
        selected: if hs <= fs {
            WeightForm::HalfAngle
        } else {
            WeightForm::FullAngle
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / |lhs|`, or 0 when both vanish.
    pub gap: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let gap = if lhs == 0.0 && rhs == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE)
        };
        Self { lhs, rhs, gap }
    }
}

/// `∫_X |f|²` against `∫ |F(λ)|² w(λ) dλ`.
pub fn parseval_check(
    f: &RadialFunction,
    weight: &PlancherelWeight,
    grid: &LambdaGrid,
    cfg: &QuadratureConfig,
) -> Result<IdentityCheck> {
    let lhs = radial_l2_sq(f);
    if lhs == 0.0 {
        return Ok(IdentityCheck::new(0.0, 0.0));
    }
    let d = spherical_transform(f, grid, cfg)?;
    let rhs = d
        .integrate(|l, v| c(v.norm_sqr() * weight.value(l), 0.0))
        .re;
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `f(z) = ∫ F(λ) φ_λ(z) w(λ) dλ` at a point with trace `2 cosh ζ`.
pub fn inverse_transform(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    zeta: C64,
    cfg: &QuadratureConfig,
) -> Result<C64> {
    phi_superposition(&d.terms(|l| weight.value(l)), zeta, cfg)
}

/// Trace `p` of `a_s k_θ exp(irh) x₀` with `ρ = 2 log s`.
pub fn orbit_trace(rho: f64, theta: f64, r: f64) -> C64 {
    let (sn, cs) = theta.sin_cos();
    let (e, ei) = (
        C64::from_polar(1.0, 2.0 * r),
        C64::from_polar(1.0, -2.0 * r),
    );
    let s2 = rho.exp();
    (e * cs * cs + ei * sn * sn) * s2 + (e * sn * sn + ei * cs * cs) / s2
}

/// Discretisation of `G` in polar coordinates `K A⁺ K` for orbit integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitGrid {
    /// Hard cap on the radial range.
    pub rho_max: f64,
    pub panel_width: f64,
    pub order: usize,
    /// Trapezoid points over `θ ∈ [0, π)`; rounded up to even.
    pub theta_points: usize,
}

impl Default for OrbitGrid {
    fn default() -> Self {
        Self {
            rho_max: 40.0,
            panel_width: 1.0,
            order: 12,
            theta_points: 32,
        }
    }
}

fn check_shift(r: f64) -> Result<()> {
    if !(0.0..FRAC_PI_4).contains(&r) {
        return Err(Error::DomainError(format!(
            "shift r = {r} must lie in [0, pi/4)"
        )));
    }
    Ok(())
}

/// `∫_G |f(g exp(irh) x₀)|² dg` with `dg` normalised to the area of `X`
/// and `f` continued by the inverse transform. The radial range grows
/// panel by panel until two consecutive panels are negligible.
pub fn gutzmer_lhs(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    r: f64,
    grid: &OrbitGrid,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_shift(r)?;
    if grid.theta_points == 0 || grid.order == 0 || !(grid.panel_width > 0.0) {
        return Err(Error::InvalidInput("orbit grid must be non-empty".into()));
    }
    let terms = d.terms(|l| weight.value(l));
    if terms.is_empty() {
        return Ok(0.0);
    }
    // the trace is even in θ about 0 and π/2
    let nt = grid.theta_points + grid.theta_points % 2;
    let half = nt / 2 + 1;
    let mut total = 0.0;
    let mut quiet = 0;
    let mut lo = 0.0;
    while lo < grid.rho_max {
        let hi = (lo + grid.panel_width).min(grid.rho_max);
        let p = GaussPanels::new(&[lo, hi], grid.order);
        let cells = par::try_map_range(p.len() * half, |k| -> Result<f64> {
            let (i, j) = (k / half, k % half);
            let rho = p.nodes[i];
            let theta = PI * j as f64 / nt as f64;
            let zeta = (orbit_trace(rho, theta, r) * 0.5).acosh();
            let v = phi_superposition(&terms, zeta, cfg)?;
            let mult = if j == 0 || j == nt / 2 { 1.0 } else { 2.0 };
            Ok(mult * p.weights[i] * rho.sinh() * v.norm_sqr())
        })?;
        let panel = 2.0 * PI * cells.iter().sum::<f64>() / nt as f64;
        total += panel;
        quiet = if panel.abs() <= 1e-13 * total.abs() {
            quiet + 1
        } else {
            0
        };
        if quiet >= 2 && hi > 4.0 {
            break;
        }
        lo = hi;
    }
    Ok(total)
}

/// `∫ |F(λ)|² φ_λ(exp(2irh) x₀) w(λ) dλ`.
pub fn gutzmer_rhs(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    r: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_shift(r)?;
    let nodes: Vec<(f64, f64)> = d
        .lambda_grid
        .iter()
        .zip(&d.weights)
        .zip(&d.values)
        .map(|((l, w), v)| (*l, w * v.norm_sqr() * weight.value(*l)))
        .collect();
    let big = nodes.iter().map(|t| t.1.abs()).fold(0.0, f64::max);
    let parts = par::try_map(&nodes, |&(l, m)| -> Result<f64> {
        if m.abs() <= 1e-17 * big {
            return Ok(0.0);
        }
        Ok(m * phi_mehler(SpectralParam::new(l)?, c(0.0, 4.0 * r), cfg)?.re)
    })?;
    Ok(parts.iter().sum())
}

/// Both sides of the Gutzmer identity at shift `r`.
pub fn gutzmer_check(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    r: f64,
    grid: &OrbitGrid,
    cfg: &QuadratureConfig,
) -> Result<IdentityCheck> {
    let lhs = gutzmer_lhs(d, weight, r, grid, cfg)?;
    let rhs = gutzmer_rhs(d, weight, r, cfg)?;
    Ok(IdentityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StripNorm {
    pub r_values: Vec<f64>,
    pub orbit_norms: Vec<f64>,
    pub sup: f64,
}

/// `sup_{r ∈ [0, R)} ∫_G |f(g exp(irh) x₀)|² dg` over `n` equally spaced
/// shifts.
pub fn strip_norm(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    big_r: f64,
    n: usize,
    grid: &OrbitGrid,
    cfg: &QuadratureConfig,
) -> Result<StripNorm> {
    if !(big_r > 0.0 && big_r <= FRAC_PI_4) || n == 0 {
        return Err(Error::DomainError(format!(
            "strip width R = {big_r} must lie in (0, pi/4]"
        )));
    }
    let r_values: Vec<f64> = (0..n).map(|k| big_r * k as f64 / n as f64).collect();
    let orbit_norms = r_values
        .iter()
        .map(|&r| gutzmer_lhs(d, weight, r, grid, cfg))
        .collect::<Result<Vec<_>>>()?;
    let sup = orbit_norms.iter().copied().fold(0.0, f64::max);
    Ok(StripNorm {
        r_values,
        orbit_norms,
        sup,
    })
}

/// Whether `sup_{r<R} ∫ |F|² φ_λ(exp(2irh)) w dλ` is finite: the tail of
/// `|F|² e^{2λr}` must be integrable for every `r < R` and the spectral
/// side must stay finite on `n` shifts.
pub fn er_membership(
    d: &SpectralDensity,
    weight: &PlancherelWeight,
    big_r: f64,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<bool> {
    if !(big_r > 0.0 && big_r <= FRAC_PI_4) || n == 0 {
        return Err(Error::DomainError(format!(
            "strip width R = {big_r} must lie in (0, pi/4]"
        )));
    }
    if !d.decay_tag.integrable(2.0, 2.0 * big_r) {
        return Ok(false);
    }
    for k in 0..n {
        let r = big_r * k as f64 / n as f64;
        if !gutzmer_rhs(d, weight, r, cfg)?.is_finite() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::geometry()
    }

    #[test]
    fn standard_grid_shape() {
        let g = LambdaGrid::standard();
        assert_eq!(g.len(), 400);
        assert!((g.weights.iter().sum::<f64>() - 30.0).abs() < 1e-12);
        assert!(g.nodes[0] > 0.0 && g.nodes[0] < 1e-2);
        assert!(g.nodes.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn decay_tags() {
        let g = LambdaGrid::standard();
        let fit = |f: &dyn Fn(f64) -> f64| {
            let v: Vec<C64> = g.nodes.iter().map(|&l| c(f(l), 0.0)).collect();
            DecayTag::fit(&g.nodes, &v)
        };
        assert_eq!(fit(&|l| (-l * l / 16.0).exp()), DecayTag::SuperExponential);
        assert_eq!(
            fit(&|l| if l < 5.0 { 1.0 } else { 0.0 }),
            DecayTag::SuperExponential
        );
        match fit(&|l| (3.0 * l).exp()) {
            DecayTag::Exponential { rate } => assert!((rate + 3.0).abs() < 1e-9),
            t => panic!("{t:?}"),
        }
        match fit(&|l| l * (0.5 * PI * l).tanh() / (PI * l).cosh()) {
            DecayTag::Exponential { rate } => assert!(rate > 3.0 && rate < PI + 1e-9, "{rate}"),
            t => panic!("{t:?}"),
        }
        match fit(&|l| 1.0 / (1.0 + l).powi(3)) {
            DecayTag::Polynomial { power } => assert!((power - 3.0).abs() < 0.2, "{power}"),
            t => panic!("{t:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let g = LambdaGrid::panels(0.0, 4.0, 2, 4).unwrap();
        let d = SpectralDensity::from_fn(&g, |l| c(l, -0.5 * l), None).unwrap();
        let back = SpectralDensity::from_csv(&d.to_csv()).unwrap();
        assert_eq!(back.lambda_grid, d.lambda_grid);
        assert_eq!(back.values, d.values);
        assert!(SpectralDensity::from_csv("lambda,re,im\n1,2\n0.5,1,0\n").is_err());
    }

    #[test]
    fn zero_function() {
        let g = LambdaGrid::panels(0.0, 5.0, 2, 8).unwrap();
        let d = spherical_transform(&RadialFunction::zero(), &g, &cfg()).unwrap();
        assert!(d.values.iter().all(|v| *v == c(0.0, 0.0)));
        let p = parseval_check(
            &RadialFunction::zero(),
            &PlancherelWeight::calibrated(),
            &g,
            &cfg(),
        )
        .unwrap();
        assert_eq!((p.lhs, p.rhs, p.gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn area_integral_of_gaussian() {
        // 2π ∫ e^{-ρ²} sinh ρ dρ = π^{3/2} e^{1/4} erf(1/2)
        let f = RadialFunction::gaussian(2f64.sqrt()).unwrap();
        let exact = PI.powf(1.5) * 0.25f64.exp() * 0.520_499_877_813_046_5;
        assert!((radial_l2_sq(&f) - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn abel_and_direct_transforms_agree() {
        let g = LambdaGrid::panels(0.0, 30.0, 3, 4).unwrap();
        for f in [
            RadialFunction::gaussian(1.0).unwrap(),
            RadialFunction::gaussian(0.4).unwrap(),
        ] {
            let a = spherical_transform(&f, &g, &cfg()).unwrap();
            let b = spherical_transform_direct(&f, &g, &cfg()).unwrap();
            let scale = b.values[0].norm();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(x.im == 0.0 && (x - y).norm() < 1e-9 * scale, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn transform_is_real_and_matches_abel_route() {
        // F(λ) = 2√2 ∫_0^∞ cos(λs/2) A(s) ds with the Abel transform
        // A(s) = ∫_s^∞ f(ρ) sinh ρ / √(cosh ρ - cosh s) dρ
        let f = RadialFunction::gaussian(1.0).unwrap();
        let g = LambdaGrid::panels(0.0, 8.0, 2, 4).unwrap();
        let d = spherical_transform_direct(&f, &g, &cfg()).unwrap();
        let abel = |s: f64| {
            crate::numerics::integrate_singular(
                |u| {
                    let rho = s + u * u;
                    let half = 0.5 * u * u;
                    let den = (2.0 * (s + half).sinh() * half.sinh() / (u * u)).sqrt();
                    c(2.0 * f.eval(rho) * rho.sinh() / den, 0.0)
                },
                0.0,
                f.reach(),
                &[],
                1e-13,
            )
            .unwrap()
            .value
            .re
        };
        let sp = GaussPanels::new(&(0..=40).map(|j| j as f64 * 0.2).collect::<Vec<_>>(), 16);
        let a: Vec<f64> = sp.nodes.iter().map(|&s| abel(s)).collect();
        for (l, v) in g.nodes.iter().zip(&d.values) {
            let other: f64 = sp
                .nodes
                .iter()
                .zip(&sp.weights)
                .zip(&a)
                .map(|((s, w), a)| w * (l * s / 2.0).cos() * a)
                .sum::<f64>()
                * 2.0
                * 2f64.sqrt();
            assert!(v.im == 0.0);
            assert!(
                (v.re - other).abs() < 1e-8 * other.abs().max(1e-3),
                "{l}: {} vs {other}",
                v.re
            );
        }
    }

    #[test]
    fn calibration_selects_half_angle() {
        let a = RadialFunction::gaussian(1.0 / 2f64.sqrt()).unwrap();
        let b = RadialFunction::gaussian(1.5).unwrap();
        let v = plancherel_verdict(&a, &b, &LambdaGrid::standard(), &cfg()).unwrap();
        assert_eq!(v.selected, WeightForm::HalfAngle);
        assert!(v.half_angle_spread < 1e-6, "{v:?}");
        assert!(v.full_angle_spread > 1e-2, "{v:?}");
        for cal in &v.half_angle {
            assert!(
                (cal.constant - PLANCHEREL_CONSTANT).abs() < 1e-8 * PLANCHEREL_CONSTANT,
                "{cal:?}"
            );
        }
    }

    #[test]
    fn parseval_on_held_out_functions() {
        let w = PlancherelWeight::calibrated();
        let g = LambdaGrid::standard();
        for f in [
            RadialFunction::gaussian(1.0).unwrap(),
            RadialFunction::gaussian(1.0 / 2f64.sqrt())
                .unwrap()
                .dilate(2.0)
                .unwrap(),
            RadialFunction::new("poly-gauss", 7.0, |r: f64| (1.0 + r * r) * (-r * r).exp())
                .unwrap(),
        ] {
            let p = parseval_check(&f, &w, &g, &cfg()).unwrap();
            assert!(p.gap < 1e-6, "{}: {p:?}", f.label());
        }
    }

    fn narrow() -> SpectralDensity {
        SpectralDensity::gaussian(&LambdaGrid::standard(), 2.0, 0.5).unwrap()
    }

    #[test]
    fn gutzmer_at_zero_is_parseval() {
        let d = narrow();
        let w = PlancherelWeight::calibrated();
        let g = gutzmer_check(&d, &w, 0.0, &OrbitGrid::default(), &cfg()).unwrap();
        let plain = d.integrate(|l, v| c(v.norm_sqr() * w.value(l), 0.0)).re;
        assert!((g.rhs - plain).abs() < 1e-10 * plain);
        assert!(g.gap < 1e-4, "{g:?}");
    }

    #[test]
    fn gutzmer_identity_inside_the_strip() {
        let d = narrow();
        let w = PlancherelWeight::calibrated();
        let g = gutzmer_check(&d, &w, 0.5 * FRAC_PI_4, &OrbitGrid::default(), &cfg()).unwrap();
        assert!(g.gap < 1e-2, "{g:?}");
        let mut last = 0.0;
        for k in [0.0, 0.2, 0.5, 0.8, 0.95] {
            let rhs = gutzmer_rhs(&d, &w, k * FRAC_PI_4, &cfg()).unwrap();
            assert!(rhs > last);
            last = rhs;
        }
    }

    #[test]
    fn strip_membership() {
        let g = LambdaGrid::standard();
        let w = PlancherelWeight::calibrated();
        let compact = SpectralDensity::from_fn(
            &g,
            |l| c(if l < 4.0 { (4.0 - l) * l } else { 0.0 }, 0.0),
            None,
        )
        .unwrap();
        assert!(er_membership(&compact, &w, 0.99 * FRAC_PI_4, 8, &cfg()).unwrap());
        let growing = SpectralDensity::from_fn(&g, |l| c((3.0 * l).exp(), 0.0), None).unwrap();
        assert!(!er_membership(&growing, &w, FRAC_PI_4, 8, &cfg()).unwrap());
        let slow = SpectralDensity::from_fn(&g, |l| c((-0.5 * l).exp(), 0.0), None).unwrap();
        assert!(er_membership(&slow, &w, 0.4, 4, &cfg()).unwrap());
        assert!(!er_membership(&slow, &w, 0.6, 4, &cfg()).unwrap());
    }

    #[test]
    fn strip_norm_starts_at_l2_norm() {
        let d = narrow();
        let w = PlancherelWeight::calibrated();
        let coarse = OrbitGrid {
            order: 8,
            theta_points: 12,
            ..OrbitGrid::default()
        };
        let s = strip_norm(&d, &w, 0.5, 3, &coarse, &cfg()).unwrap();
        let plain = d.integrate(|l, v| c(v.norm_sqr() * w.value(l), 0.0)).re;
        assert!((s.orbit_norms[0] - plain).abs() < 1e-4 * plain);
        assert_eq!(s.sup, s.orbit_norms[2]);
        assert!(strip_norm(&d, &w, 1.0, 3, &OrbitGrid::default(), &cfg()).is_err());
    }
}
