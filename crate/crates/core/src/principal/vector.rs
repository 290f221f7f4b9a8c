use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use super::SpectralParam;
use crate::crown::{point_to_tangent, PairPoint};
use crate::error::{Error, Result};
use crate::lie::{GroupElement, LieVector, ProjPoint};
use crate::numerics::{integrate, Estimate, GridFunction, Jet, QuadratureConfig, MAX_ORDER};
use crate::{c, C64, I};

type Eval = Arc<dyn Fn(f64, usize) -> Jet + Send + Sync>;
type Mover = Arc<dyn Fn(&GroupElement) -> Result<AnalyticVector> + Send + Sync>;

/// A vector of `L²(R)` known in closed form, evaluated through Taylor jets.
#[derive(Clone)]
pub struct AnalyticVector {
    eval: Eval,
    hints: Vec<f64>,
    support: Option<(f64, f64)>,
    /// Exact group action, used instead of composition when present.
    mover: Option<Mover>,
    label: String,
}

impl fmt::Debug for AnalyticVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticVector")
            .field("label", &self.label)
            .field("hints", &self.hints)
            .field("support", &self.support)
            .finish()
    }
}

impl AnalyticVector {
    /// `eval(x, n)` must return the order-`n` Taylor jet at the real point `x`.
    pub fn new(
        label: impl Into<String>,
        hints: Vec<f64>,
        eval: impl Fn(f64, usize) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            hints,
            support: None,
            mover: None,
            label: label.into(),
        }
    }

    /// Wraps a function written in jet arithmetic.
    pub fn from_jet_fn(
        label: impl Into<String>,
        hints: Vec<f64>,
        f: impl Fn(&Jet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, hints, move |x, n| f(&Jet::var(x, n)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Points where the vector peaks or is singular; used as quadrature breakpoints.
    pub fn hints(&self) -> &[f64] {
        &self.hints
    }

    /// Interval outside of which the vector vanishes, if known.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    /// Integration range: the support if known, otherwise the line.
    pub fn range(&self) -> (f64, f64) {
        self.support.unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
    }

    /// Pointwise product with a function written in jet arithmetic.
    pub fn modulate(
        &self,
        label: impl Into<String>,
        extra_hints: &[f64],
        support: Option<(f64, f64)>,
        m: impl Fn(&Jet) -> Jet + Send + Sync + 'static,
    ) -> Self {
        let inner = self.eval.clone();
        let mut hints = self.hints.clone();
        hints.extend_from_slice(extra_hints);
        let support = match (self.support, support) {
            (Some(a), Some(b)) => Some((a.0.max(b.0), a.1.min(b.1))),
            (a, b) => a.or(b),
        };
        Self {
            eval: Arc::new(move |x, n| m(&Jet::var(x, n)) * inner(x, n)),
            hints,
            support,
            mover: None,
            label: label.into(),
        }
    }

    pub fn jet(&self, x: f64, order: usize) -> Jet {
        (self.eval)(x, order)
    }

    pub fn value(&self, x: f64) -> C64 {
        (self.eval)(x, 0).value()
    }

    pub fn derivative(&self, x: f64, k: usize) -> C64 {
        (self.eval)(x, k).derivative(k)
    }

    pub fn scale(&self, s: C64) -> Self {
        let eval = self.eval.clone();
        Self {
            eval: Arc::new(move |x, n| eval(x, n) * s),
            hints: self.hints.clone(),
            support: self.support,
            mover: None,
            label: format!("{s}*{}", self.label),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut hints = self.hints.clone();
        hints.extend_from_slice(&other.hints);
        Self {
            eval: Arc::new(move |x, n| a(x, n) + b(x, n)),
            hints,
            support: match (self.support, other.support) {
                (Some(p), Some(q)) => Some((p.0.min(q.0), p.1.max(q.1))),
                _ => None,
            },
            mover: None,
            label: format!("({}+{})", self.label, other.label),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Samples the vector on a grid.
    pub fn sample(
        &self,
        panels: &crate::numerics::GaussPanels,
        tail_exponent: f64,
    ) -> Result<GridFunction> {
        GridFunction::sample(
            |x| self.value(x),
            panels,
            crate::numerics::TailModel {
                exponent: tail_exponent,
            },
        )
    }
}

/// A vector of the representation space, either in closed form or sampled.
#[derive(Debug, Clone)]
pub enum RepVector {
    Analytic(AnalyticVector),
    Sampled(GridFunction),
}

impl From<AnalyticVector> for RepVector {
    fn from(v: AnalyticVector) -> Self {
        RepVector::Analytic(v)
    }
}

impl From<GridFunction> for RepVector {
    fn from(v: GridFunction) -> Self {
        RepVector::Sampled(v)
    }
}

fn exponent(lambda: SpectralParam) -> C64 {
    c(-1.0, lambda.lambda)
}

/// The normalised `K`-fixed vector `π^{-1/2} (1 + x²)^{-(1-iλ)/2}`.
pub fn v_k(lambda: SpectralParam) -> AnalyticVector {
    continued_vk(lambda, 0.0).with_label("v_K")
}

/// `π(exp(iαh)) v_K` for `|α| < π/4`, in closed form:
/// `e^{iα(-1+iλ)} π^{-1/2} (1 + e^{-4iα} x²)^{-(1-iλ)/2}`.
///
/// `e^{-4iα} x²` stays off the negative axis, so the principal power is the
/// continuation from `α = 0`.
pub fn continued_vk(lambda: SpectralParam, alpha: f64) -> AnalyticVector {
    transported_vk(lambda, alpha, GroupElement::identity())
        .expect("the identity is real")
        .with_label(format!("pi(exp({alpha} ih))v_K"))
}

/// `π(g exp(iαh)) v_K = e^{iα(-1+iλ)} π^{-1/2} ((cx+d)² + e^{-4iα}(ax+b)²)^{-(1-iλ)/2}`
/// with `(a, b; c, d) = g⁻¹`; free of the cancellation that composition
/// suffers near `g·∞`.
fn transported_vk(lambda: SpectralParam, alpha: f64, g: GroupElement) -> Result<AnalyticVector> {
    let [[a, b], [cc, d]] = real_entries(&g.inverse())?;
    let q = C64::from_polar(1.0, -4.0 * alpha);
    let pref = (I * alpha * exponent(lambda)).exp() / PI.sqrt();
    let power = exponent(lambda) * 0.5;
    let hints = if alpha == 0.0 {
        vec![]
    } else {
        [-1.0, 1.0]
            .iter()
            .filter_map(|&s| g.act(ProjPoint::Finite(c(s, 0.0))).finite().map(|z| z.re))
            .filter(|x| x.abs() < 1e8)
            .collect()
    };
    let mut v = AnalyticVector::from_jet_fn(format!("pi(g exp({alpha} ih))v_K"), hints, move |x| {
        let u = *x * cc + d;
        let w = *x * a + b;
        (u * u + (w * w) * q).powc(power) * pref
    });
    v.mover = Some(Arc::new(move |h: &GroupElement| {
        transported_vk(lambda, alpha, *h * g)
    }));
    Ok(v)
}

/// `π(a_ε) v_K` with `a_ε = exp(i(π/4 - ε)h)`.
pub fn continue_vk(lambda: SpectralParam, eps: f64) -> Result<AnalyticVector> {
    if !(eps > 0.0 && eps < 2.0 * FRAC_PI_4) {
        return Err(Error::DomainError(format!(
            "eps = {eps} must lie in (0, pi/2)"
        )));
    }
    Ok(continued_vk(lambda, FRAC_PI_4 - eps))
}

/// `π(z) v_K` for a crown point `z = g exp(iφh) x₀`, well defined because
/// `v_K` is fixed by `K_C`.
pub fn orbit_vector(lambda: SpectralParam, z: &PairPoint) -> Result<AnalyticVector> {
    let t = point_to_tangent(z)?;
    apply_pi_analytic(lambda, &t.g, &continued_vk(lambda, t.y.h.re))
}

fn real_entries(g: &GroupElement) -> Result<[[f64; 2]; 2]> {
    g.as_real()
        .ok_or_else(|| Error::InvalidInput("the unitary action needs a real group element".into()))
}

fn apply_pi_analytic(
    lambda: SpectralParam,
    g: &GroupElement,
    f: &AnalyticVector,
) -> Result<AnalyticVector> {
    if let Some(mover) = &f.mover {
        real_entries(g)?;
        let label = f.label.clone();
        return Ok(mover(g)?.with_label(format!("pi(g){label}")));
    }
    let [[a, b], [cc, d]] = real_entries(&g.inverse())?;
    let ex = exponent(lambda);
    let inner = f.eval.clone();
    let mut hints: Vec<f64> = f
        .hints
        .iter()
        .filter_map(|&s| g.act(ProjPoint::Finite(c(s, 0.0))).finite().map(|z| z.re))
        .filter(|x| x.abs() < 1e8)
        .collect();
    if let Some(p) = g
        .act(ProjPoint::Infinity)
        .finite()
        .filter(|p| p.re.abs() < 1e8)
    {
        hints.push(p.re);
    }
    let eval = move |x: f64, n: usize| {
        let xj = Jet::var(x, n);
        let den = xj * cc + d;
        let y = (xj * a + b) / den;
        let y0 = y.value().re;
        let fy = inner(y0, n).compose(&y);
        den.abs_real().powc(ex) * fy
    };
    // a diagonal element maps intervals to intervals
    let support = match (f.support, cc == 0.0 && b == 0.0) {
        (Some((lo, hi)), true) => {
            let (p, q) = ((lo * d) / a, (hi * d) / a);
            hints.extend([p, q]);
            Some((p.min(q), p.max(q)))
        }
        _ => None,
    };
    Ok(AnalyticVector {
        eval: Arc::new(eval),
        hints,
        support,
        mover: None,
        label: format!("pi(g){}", f.label),
    })
}

/// `[π(g)f](x) = |cx+d|^{-1+iλ} f((ax+b)/(cx+d))` with `(a, b; c, d) = g⁻¹`.
pub fn apply_pi(lambda: SpectralParam, g: &GroupElement, f: &RepVector) -> Result<RepVector> {
    match f {
        RepVector::Analytic(v) => Ok(RepVector::Analytic(apply_pi_analytic(lambda, g, v)?)),
        RepVector::Sampled(grid) => {
            let [[a, b], [cc, d]] = real_entries(&g.inverse())?;
            let ex = exponent(lambda);
            let values = grid
                .nodes()
                .iter()
                .map(|&x| {
                    let den = cc * x + d;
                    if den == 0.0 {
                        return Err(Error::SampleUnderflow { at: x });
                    }
                    let y = (a * x + b) / den;
                    Ok(grid.value_at(y)? * c(den.abs(), 0.0).powc(ex))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RepVector::Sampled(grid.with_values(values)?))
        }
    }
}

/// Basis directions of the derived representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    H,
    E,
    F,
    U,
    EPlusF,
}

impl Direction {
    pub const ALL: [Direction; 5] = [
        Direction::H,
        Direction::E,
        Direction::F,
        Direction::U,
        Direction::EPlusF,
    ];

    pub fn vector(self) -> LieVector {
        match self {
            Direction::H => LieVector::H,
            Direction::E => LieVector::E,
            Direction::F => LieVector::F,
            Direction::U => LieVector::U,
            Direction::EPlusF => LieVector::E_PLUS_F,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::H => "h",
            Direction::E => "e",
            Direction::F => "f",
            Direction::U => "u",
            Direction::EPlusF => "e+f",
        }
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Direction::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown direction {s:?}")))
    }
}

/// Coefficients `(α, β, γ)` of `α f + β x f + γ f'` for `dπ(v)`, as jets in `x`.
fn dpi_coeffs(lambda: SpectralParam, v: &LieVector, x: &Jet) -> (Jet, Jet) {
    let ex = exponent(lambda);
    let one = Jet::constant(c(1.0, 0.0), x.order());
    let x2 = *x * *x;
    // h: (iλ-1) f - 2x f';  e: -f';  f: (1-iλ) x f + x² f'
    let zeroth = one * (v.h * ex) + *x * (-v.f * ex);
    let first = *x * (v.h * -2.0) - one * v.e + x2 * v.f;
    (zeroth, first)
}

/// Derived representation `dπ(v)` for any `v` in the Lie algebra.
pub fn d_pi(lambda: SpectralParam, v: &LieVector, f: &RepVector) -> Result<RepVector> {
    match f {
        RepVector::Analytic(av) => {
            let inner = av.eval.clone();
            let v = *v;
            let eval = move |x: f64, n: usize| {
                assert!(n < MAX_ORDER, "derivative order exhausted");
                let xj = Jet::var(x, n);
                let fj = inner(x, n + 1);
                let (z, d) = dpi_coeffs(lambda, &v, &xj);
                z * fj + d * fj.diff()
            };
            Ok(RepVector::Analytic(AnalyticVector {
                eval: Arc::new(eval),
                hints: av.hints.clone(),
                support: av.support,
                mover: None,
                label: format!("dpi{}", av.label),
            }))
        }
        RepVector::Sampled(grid) => {
            let deriv = grid.derivative();
            let values = grid
                .nodes()
                .iter()
                .zip(grid.values())
                .zip(deriv)
                .map(|((&x, &fx), dfx)| {
                    let (z, d) = dpi_coeffs(lambda, v, &Jet::var(x, 0));
                    z.value() * fx + d.value() * dfx
                })
                .collect();
            Ok(RepVector::Sampled(grid.with_values(values)?))
        }
    }
}

/// `∫ |f|²` over the line.
pub fn norm_sq(f: &AnalyticVector, cfg: &QuadratureConfig) -> Result<Estimate> {
    let cfg = cfg.clone().with_hints(f.hints.iter().copied());
    let (lo, hi) = f.range();
    integrate(|x| c(f.value(x).norm_sqr(), 0.0), lo, hi, &cfg)
}

pub fn l2_norm(f: &RepVector, cfg: &QuadratureConfig) -> Result<f64> {
    match f {
        RepVector::Analytic(v) => Ok(norm_sq(v, cfg)?.value.re.max(0.0).sqrt()),
        RepVector::Sampled(g) => g.l2_norm(),
    }
}

/// `⟨f, g⟩ = ∫ f conj(g)`.
pub fn inner(f: &AnalyticVector, g: &AnalyticVector, cfg: &QuadratureConfig) -> Result<Estimate> {
    let cfg = cfg
        .clone()
        .with_hints(f.hints.iter().chain(&g.hints).copied());
    integrate(
        |x| f.value(x) * g.value(x).conj(),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &cfg,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormGrowthPoint {
    pub eps: f64,
    pub norm: f64,
    /// `‖π(a_ε)v_K‖ / √|log ε|`.
    pub ratio: f64,
    pub error: f64,
}

/// Norms of `π(a_ε) v_K` along a list of `ε`.
pub fn norm_growth(
    lambda: SpectralParam,
    eps_list: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<NormGrowthPoint>> {
    crate::par::try_map(eps_list, |&eps| {
        let v = continue_vk(lambda, eps)?;
        let est = norm_sq(&v, cfg)?;
        let norm = est.value.re.sqrt();
        Ok(NormGrowthPoint {
            eps,
            norm,
            ratio: norm / eps.ln().abs().sqrt(),
            error: est.error,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::exp_lie;
    use crate::numerics::{finite_diff_complex, DiffOrder};
    use proptest::prelude::*;

    fn lam(l: f64) -> SpectralParam {
        SpectralParam::new(l).unwrap()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::representation()
    }

    #[test]
    fn spherical_vector_is_normalised() {
        for l in [0.0, 0.5, 1.0, 3.0] {
            let n = l2_norm(&v_k(lam(l)).into(), &cfg()).unwrap();
            assert!((n - 1.0).abs() < 1e-8, "{l}: {n}");
        }
        let v = v_k(lam(1.0));
        assert!((v.value(0.0) - c(1.0 / PI.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn continuation_endpoints() {
        let v = continue_vk(lam(1.0), FRAC_PI_4).unwrap();
        let w = v_k(lam(1.0));
        for x in [-3.0, 0.0, 0.7, 10.0] {
            assert!((v.value(x) - w.value(x)).norm() < 1e-15);
        }
        assert!(continue_vk(lam(1.0), 0.0).is_err());
    }

    #[test]
    fn dilation_matches_scaling_formula() {
        let l = lam(0.8);
        let t = 2.5;
        let v = v_k(l);
        let moved = match apply_pi(l, &GroupElement::b(t), &v.clone().into()).unwrap() {
            RepVector::Analytic(a) => a,
            _ => unreachable!(),
        };
        let pref = C64::new(t, 0.0).powc(C64::new(0.5, -0.4));
        for x in [-1.3, 0.2, 4.0] {
            assert!((moved.value(x) - pref * v.value(t * x)).norm() < 1e-13);
        }
    }

    #[test]
    fn identity_acts_trivially_on_grids() {
        let panels = GridFunction::line_panels(200.0, 12);
        let g = v_k(lam(1.0)).sample(&panels, 1.0).unwrap();
        let RepVector::Sampled(h) =
            apply_pi(lam(1.0), &GroupElement::identity(), &g.clone().into()).unwrap()
        else {
            unreachable!()
        };
        for (a, b) in g.values().iter().zip(h.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn derived_operators_match_difference_quotients() {
        let l = lam(1.3);
        let f: RepVector = continued_vk(l, 0.2).into();
        for dir in Direction::ALL {
            let RepVector::Analytic(df) = d_pi(l, &dir.vector(), &f).unwrap() else {
                unreachable!()
            };
            for x in [-2.0, -0.3, 0.5, 1.7] {
                let fd = finite_diff_complex(
                    |t| {
                        let g = exp_lie(&dir.vector(), c(t, 0.0));
                        match apply_pi(l, &g, &f).unwrap() {
                            RepVector::Analytic(a) => a.value(x),
                            _ => unreachable!(),
                        }
                    },
                    0.0,
                    DiffOrder::First,
                    1e-3,
                )
                .unwrap();
                let exact = df.value(x);
                assert!(
                    (fd - exact).norm() < 1e-8 * (1.0 + exact.norm()),
                    "{dir:?} x={x}"
                );
            }
        }
    }

    #[test]
    fn u_operator_has_linear_zeroth_order_term() {
        let l = lam(0.7);
        let f = continued_vk(l, 0.1);
        let RepVector::Analytic(du) = d_pi(l, &LieVector::U, &f.clone().into()).unwrap() else {
            unreachable!()
        };
        let x = 0.9;
        let expect = c(-1.0, 0.7) * x * f.value(x) - (1.0 + x * x) * f.derivative(x, 1);
        assert!((du.value(x) - expect).norm() < 1e-13);
    }

    #[test]
    fn continued_norm_grows_logarithmically() {
        let pts = norm_growth(lam(1.0), &[1e-2, 1e-4], &cfg()).unwrap();
        assert!(pts[1].norm > pts[0].norm);
        let r: Vec<f64> = pts.iter().map(|p| p.ratio * p.ratio).collect();
        assert!(r[1] / r[0] < 1.5 && r[0] / r[1] < 1.5, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn unitarity(x in -2.0f64..2.0, s in -1.0f64..1.0, th in 0.0f64..6.3, l in -2.0f64..2.0, al in -0.6f64..0.6) {
            let g = GroupElement::n(x) * GroupElement::a(s.exp()) * GroupElement::k(th);
            let f: RepVector = continued_vk(lam(l), al).into();
            let n0 = l2_norm(&f, &cfg()).unwrap();
            let n1 = l2_norm(&apply_pi(lam(l), &g, &f).unwrap(), &cfg()).unwrap();
            prop_assert!((n0 - n1).abs() < 2e-7 * n0, "{} {}", n0, n1);
        }

        #[test]
        fn representation_property(x in -2.0f64..2.0, s in -1.0f64..1.0, th in 0.0f64..6.3, y in -2.0f64..2.0, pt in -3.0f64..3.0) {
            let l = lam(0.9);
            let g1 = GroupElement::n(x) * GroupElement::k(th);
            let g2 = GroupElement::a(s.exp()) * GroupElement::n(y);
            let f: RepVector = continued_vk(l, 0.3).into();
            let lhs = apply_pi(l, &g1, &apply_pi(l, &g2, &f).unwrap()).unwrap();
            let rhs = apply_pi(l, &(g1 * g2), &f).unwrap();
            let (RepVector::Analytic(a), RepVector::Analytic(b)) = (lhs, rhs) else { unreachable!() };
            prop_assert!((a.value(pt) - b.value(pt)).norm() < 1e-9 * (1.0 + b.value(pt).norm()));
        }
    }
}
