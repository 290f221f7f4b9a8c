//! Sobolev norms of the principal series and the dyadic bound for the
//! invariant norm.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{GroupElement, LieVector};
use crate::numerics::{GridFunction, Jet, QuadratureConfig, TailModel};
use crate::par;
use crate::principal::{
    apply_pi, continue_vk, d_pi, l2_norm, AnalyticVector, RepVector, SpectralParam,
};
use crate::{c, C64};

/// Highest supported order; beyond it jets run out and grid noise dominates.
pub const MAX_SOBOLEV_ORDER: usize = 4;

/// One-parameter subgroups with their generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subgroup {
    A,
    N,
    NBar,
    H,
    K,
}

impl Subgroup {
    pub const ALL: [Subgroup; 5] = [
        Subgroup::A,
        Subgroup::N,
        Subgroup::NBar,
        Subgroup::H,
        Subgroup::K,
    ];

    pub fn generator(self) -> LieVector {
        match self {
            Subgroup::A => LieVector::H,
            Subgroup::N => LieVector::E,
            Subgroup::NBar => LieVector::F,
            Subgroup::H => LieVector::E_PLUS_F,
            Subgroup::K => LieVector::U,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subgroup::A => "A",
            Subgroup::N => "N",
            Subgroup::NBar => "Nbar",
            Subgroup::H => "H",
            Subgroup::K => "K",
        }
    }
}

impl FromStr for Subgroup {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Subgroup::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown subgroup {s:?}")))
    }
}

/// `S_k` in the basis `(h, e, f)`, or `S_{k,L}` when a subgroup is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevSpec {
    pub k: usize,
    pub subgroup: Option<Subgroup>,
    /// Relative derivative noise tolerated on sampled vectors.
    pub noise_tol: f64,
}

impl SobolevSpec {
    pub fn full(k: usize) -> Result<Self> {
        Self::check(k)?;
        Ok(Self {
            k,
            subgroup: None,
            noise_tol: 1e-3,
        })
    }

    pub fn restricted(k: usize, subgroup: Subgroup) -> Result<Self> {
        Self::check(k)?;
        Ok(Self {
            k,
            subgroup: Some(subgroup),
            noise_tol: 1e-3,
        })
    }

    pub fn with_noise_tol(mut self, tol: f64) -> Self {
        self.noise_tol = tol;
        self
    }

    fn check(k: usize) -> Result<()> {
        if k > MAX_SOBOLEV_ORDER {
            return Err(Error::InvalidInput(format!(
                "Sobolev order {k} exceeds {MAX_SOBOLEV_ORDER}"
            )));
        }
        Ok(())
    }

    /// Monomials `Z₁^{k₁} Z₂^{k₂} Z₃^{k₃}` as lists of generators in the
    /// order they are applied.
    pub fn words(&self) -> Vec<Vec<LieVector>> {
        match self.subgroup {
            Some(g) => (0..=self.k).map(|j| vec![g.generator(); j]).collect(),
            None => {
                let mut out = Vec::new();
                for k1 in 0..=self.k {
                    for k2 in 0..=self.k - k1 {
                        for k3 in 0..=self.k - k1 - k2 {
                            let mut w = vec![LieVector::F; k3];
                            w.extend(std::iter::repeat_n(LieVector::E, k2));
                            w.extend(std::iter::repeat_n(LieVector::H, k1));
                            out.push(w);
                        }
                    }
                }
                out
            }
        }
    }
}

fn coarse(grid: &GridFunction) -> Result<GridFunction> {
    let nodes = grid.nodes().iter().step_by(2).copied().collect();
    let values = grid.values().iter().step_by(2).copied().collect();
    GridFunction::new(nodes, values, grid.tail())
}

/// Relative gap between a grid-derived quantity and the same quantity on
/// the grid with every other node dropped, compared on the shared nodes.
fn grid_noise(fine: &GridFunction, coarse: &GridFunction) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in fine.values().iter().step_by(2).zip(coarse.values()) {
        num += (a - b).norm_sqr();
        den += a.norm_sqr();
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

fn sampled_dpi(
    lambda: SpectralParam,
    v: &LieVector,
    grid: &GridFunction,
    tol: f64,
) -> Result<GridFunction> {
    let RepVector::Sampled(fine) = d_pi(lambda, v, &RepVector::Sampled(grid.clone()))? else {
        unreachable!("sampled input stays sampled")
    };
    let RepVector::Sampled(rough) = d_pi(lambda, v, &RepVector::Sampled(coarse(grid)?))? else {
        unreachable!("sampled input stays sampled")
    };
    let noise = grid_noise(&fine, &rough);
    if noise > tol {
        return Err(Error::GridResolution { noise });
    }
    Ok(fine)
}

fn apply_word(
    lambda: SpectralParam,
    word: &[LieVector],
    f: &RepVector,
    tol: f64,
) -> Result<RepVector> {
    let mut cur = f.clone();
    for v in word {
        cur = match &cur {
            RepVector::Analytic(_) => d_pi(lambda, v, &cur)?,
            RepVector::Sampled(g) => RepVector::Sampled(sampled_dpi(lambda, v, g, tol)?),
        };
    }
    Ok(cur)
}

/// Norms of every monomial of `spec` applied to `f`, in the order of
/// [`SobolevSpec::words`].
pub fn sobolev_terms(
    lambda: SpectralParam,
    f: &RepVector,
    spec: &SobolevSpec,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let words = spec.words();
    par::try_map(&words, |w| {
        l2_norm(&apply_word(lambda, w, f, spec.noise_tol)?, cfg)
    })
}

/// `Σ ‖dπ(Z₁)^{k₁} dπ(Z₂)^{k₂} dπ(Z₃)^{k₃} f‖` over `k₁ + k₂ + k₃ ≤ k`, or
/// `Σ_{j ≤ k} ‖dπ(Z_L)^j f‖` for a subgroup.
pub fn sobolev_norm(
    lambda: SpectralParam,
    f: &RepVector,
    spec: &SobolevSpec,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(sobolev_terms(lambda, f, spec, cfg)?.iter().sum())
}

/// `Σ_{j ≤ k} ‖x^j f^{(j)}‖`.
pub fn radial_norm(f: &RepVector, k: usize, cfg: &QuadratureConfig) -> Result<f64> {
    SobolevSpec::check(k)?;
    let terms = par::try_map_range(k + 1, |j| -> Result<f64> {
        match f {
            RepVector::Analytic(v) => {
                let inner = v.clone();
                let mut r =
                    AnalyticVector::new(format!("R{j}"), v.hints().to_vec(), move |x, n| {
                        let mut d = inner.jet(x, n + j);
                        for _ in 0..j {
                            d = d.diff();
                        }
                        let xj = Jet::var(x, n);
                        let mut p = Jet::constant(c(1.0, 0.0), n);
                        for _ in 0..j {
                            p = p * xj;
                        }
                        p * d
                    });
                if let Some((lo, hi)) = v.support() {
                    r = r.with_support(lo, hi);
                }
                l2_norm(&RepVector::Analytic(r), cfg)
            }
            RepVector::Sampled(g) => {
                let mut cur = g.clone();
                let mut rough = coarse(g)?;
                for _ in 0..j {
                    cur = cur.with_values(cur.derivative())?;
                    rough = rough.with_values(rough.derivative())?;
                    let noise = grid_noise(&cur, &rough);
                    if noise > 1e-3 {
                        return Err(Error::GridResolution { noise });
                    }
                }
                let vals = cur
                    .nodes()
                    .iter()
                    .zip(cur.values())
                    .map(|(&x, &v)| v * x.powi(j as i32))
                    .collect();
                cur.with_values(vals)?.l2_norm()
            }
        }
    })?;
    Ok(terms.iter().sum())
}

fn smooth_step(t: &Jet) -> Jet {
    let n = t.order();
    let t0 = t.value().re;
    // exp(-1/t) and all its derivatives are below 1e-200 here
    if t0 <= 2e-3 {
        return Jet::constant(c(0.0, 0.0), n);
    }
    if t0 >= 1.0 - 2e-3 {
        return Jet::constant(c(1.0, 0.0), n);
    }
    let a = (-t.recip()).exp();
    let b = (-(-*t + 1.0).recip()).exp();
    a / (a + b)
}

/// `χ(sx)` with `χ = 1` on `|x| ≤ 1`, `χ = 0` on `|x| ≥ 2`, glued smoothly
/// from `exp(-1/t)`.
fn chi(x: &Jet, s: f64) -> Jet {
    let y = *x * s;
    let r = y.value().re.abs();
    let n = x.order();
    if r.is_nan() || r >= 2.0 {
        return Jet::constant(c(0.0, 0.0), n);
    }
    if r <= 1.0 {
        return Jet::constant(c(1.0, 0.0), n);
    }
    Jet::constant(c(1.0, 0.0), n) - smooth_step(&(y.abs_real() - 1.0))
}

/// The cutoff functions of the dyadic decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cutoff {
    /// `τ = 1 - χ`, supported in `|x| ≥ 1`.
    Tau,
    /// `τ + φ = 1 - χ(2·)`, equal to one on `|x| ≥ 1`.
    Outer,
    /// `φ_j = φ(2^j ·)` with `φ = χ - χ(2·)` supported in `I₀`.
    Phi(usize),
    /// `τ_m = χ(2^{m+1} ·)`.
    TauM(usize),
}

impl Cutoff {
    pub fn jet(&self, x: &Jet) -> Jet {
        let one = Jet::constant(c(1.0, 0.0), x.order());
        match *self {
            Cutoff::Tau => one - chi(x, 1.0),
            Cutoff::Outer => one - chi(x, 2.0),
            Cutoff::Phi(j) => {
                let s = 2f64.powi(j as i32);
                chi(x, s) - chi(x, 2.0 * s)
            }
            Cutoff::TauM(m) => chi(x, 2f64.powi(m as i32 + 1)),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(&Jet::var(x, 0)).value().re
    }

    pub fn derivative(&self, x: f64, l: usize) -> f64 {
        self.jet(&Jet::var(x, l)).derivative(l).re
    }

    /// Bounded support, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Cutoff::Tau | Cutoff::Outer => None,
            Cutoff::Phi(j) => {
                let r = 2f64.powi(1 - j as i32);
                Some((-r, r))
            }
            Cutoff::TauM(m) => {
                let r = 2f64.powi(-(m as i32));
                Some((-r, r))
            }
        }
    }

    /// Points where the cutoff stops being locally constant.
    pub fn breakpoints(&self) -> Vec<f64> {
        let radii: Vec<f64> = match *self {
            Cutoff::Tau => vec![1.0, 2.0],
            Cutoff::Outer => vec![0.5, 1.0],
            Cutoff::Phi(j) => {
                let s = 2f64.powi(-(j as i32));
                vec![0.5 * s, s, 2.0 * s]
            }
            Cutoff::TauM(m) => {
                let s = 2f64.powi(-(m as i32));
                vec![0.5 * s, s]
            }
        };
        radii.iter().flat_map(|r| [-r, *r]).collect()
    }

    pub fn label(&self) -> String {
        match *self {
            Cutoff::Tau => "tau".into(),
            Cutoff::Outer => "tau+phi".into(),
            Cutoff::Phi(j) => format!("phi_{j}"),
            Cutoff::TauM(m) => format!("tau_{m}"),
        }
    }
}

/// Multiplies an analytic vector by a cutoff.
pub fn cut(f: &AnalyticVector, cutoff: Cutoff) -> AnalyticVector {
    f.modulate(
        format!("{}*{}", cutoff.label(), f.label()),
        &cutoff.breakpoints(),
        cutoff.support(),
        move |x| cutoff.jet(x),
    )
}

/// `b_t`, acting by `f ↦ t^{(1-iλ)/2} f(t·)`.
pub fn dilation(t: f64) -> GroupElement {
    GroupElement::b(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicDecomposition {
    pub m: usize,
    #[serde(skip)]
    pub tau: GridFunction,
    /// `φ_0, …, φ_m`.
    #[serde(skip)]
    pub phi: Vec<GridFunction>,
    #[serde(skip)]
    pub tau_m: GridFunction,
    /// `g_j = b_{2^{-j}}` for `j = 1..m`.
    pub group_elements: Vec<GroupElement>,
    /// `g = b_{2^{-(m+1)}}`.
    pub g: GroupElement,
}

impl DyadicDecomposition {
    pub fn nodes(&self) -> &[f64] {
        self.tau.nodes()
    }

    /// `max |τ + τ_m + Σ_{j=0}^m φ_j - 1|` over the grid.
    pub fn partition_residual(&self) -> f64 {
        let n = self.nodes().len();
        (0..n)
            .map(|i| {
                let s = self.tau.values()[i]
                    + self.tau_m.values()[i]
                    + self.phi.iter().map(|p| p.values()[i]).sum::<C64>();
                (s - 1.0).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |τ_m^{(l)}(x) + 2^{lm} φ^{(l)}(2^m x)|` over the grid nodes in
    /// the support `|x| ≤ 2^{-m}` of `τ_m`, for `l ≥ 1`, relative to `1 + 2^{lm}`.
    pub fn derivative_identity_residual(&self, l: usize) -> f64 {
        let scale = 2f64.powi((l * self.m) as i32);
        let pm = 2f64.powi(self.m as i32);
        self.nodes()
            .iter()
            .filter(|x| x.abs() <= 1.0 / pm)
            .map(|&x| {
                let lhs = Cutoff::TauM(self.m).derivative(x, l);
                let rhs = -scale * Cutoff::Phi(0).derivative(pm * x, l);
                (lhs - rhs).abs() / (1.0 + scale)
            })
            .fold(0.0, f64::max)
    }
}

/// Samples the cutoffs of level `m` on increasing `nodes`.
pub fn build_dyadic(m: usize, nodes: &[f64]) -> Result<DyadicDecomposition> {
    if m < 1 {
        return Err(Error::InvalidInput(
            "dyadic level m must be at least 1".into(),
        ));
    }
    let tail = TailModel { exponent: 1.0 };
    let sample = |cut: Cutoff| {
        GridFunction::new(
            nodes.to_vec(),
            nodes.iter().map(|&x| c(cut.value(x), 0.0)).collect(),
            tail,
        )
    };
    Ok(DyadicDecomposition {
        m,
        tau: sample(Cutoff::Tau)?,
        phi: (0..=m)
            .map(|j| sample(Cutoff::Phi(j)))
            .collect::<Result<_>>()?,
        tau_m: sample(Cutoff::TauM(m))?,
        group_elements: (1..=m).map(|j| dilation(2f64.powi(-(j as i32)))).collect(),
        g: dilation(2f64.powi(-(m as i32 + 1))),
    })
}

/// Which chart a block of the invariant bound lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Chart {
    /// Around `0` after rotating by `k₀`.
    Origin,
    /// Around `∞`, brought to `0` by the Weyl element.
    Infinity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockValue {
    pub chart: Chart,
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantBound {
    /// Upper bound for `S_k^G(f)`.
    pub bound: f64,
    /// `S_{k,N̄}(f) + ‖f‖ + S_{k,A}(f)`.
    pub comparison: f64,
    pub norm: f64,
    pub m_origin: usize,
    pub m_infinity: usize,
    /// Whether the `τ_m` block dropped below `‖f‖` in each chart.
    pub m_criterion_met: bool,
    pub blocks: Vec<BlockValue>,
}

const MAX_DYADIC_LEVEL: usize = 48;

fn dilated(lambda: SpectralParam, f: &AnalyticVector, t: f64) -> Result<RepVector> {
    apply_pi(lambda, &dilation(t), &RepVector::Analytic(f.clone()))
}

fn tau_block(
    lambda: SpectralParam,
    base: &AnalyticVector,
    m: usize,
    spec: &SobolevSpec,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let piece = cut(base, Cutoff::TauM(m));
    sobolev_norm(
        lambda,
        &dilated(lambda, &piece, 2f64.powi(-(m as i32 + 1)))?,
        spec,
        cfg,
    )
}

/// Smallest `m` whose `τ_m` block is at most `target`, by doubling then
/// bisection.
fn choose_m(
    lambda: SpectralParam,
    base: &AnalyticVector,
    target: f64,
    spec: &SobolevSpec,
    cfg: &QuadratureConfig,
) -> Result<(usize, bool)> {
    let mut lo = 0;
    let mut hi = 1;
    loop {
        if tau_block(lambda, base, hi, spec, cfg)? <= target {
            break;
        }
        if hi >= MAX_DYADIC_LEVEL {
            return Ok((MAX_DYADIC_LEVEL, false));
        }
        lo = hi;
        hi = (2 * hi).min(MAX_DYADIC_LEVEL);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tau_block(lambda, base, mid, spec, cfg)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi, true))
}

fn chart_blocks(
    lambda: SpectralParam,
    chart: Chart,
    base: &AnalyticVector,
    m: usize,
    include_outer: bool,
    spec: &SobolevSpec,
    cfg: &QuadratureConfig,
) -> Result<Vec<BlockValue>> {
    let mut jobs: Vec<(String, Cutoff, Option<f64>)> = Vec::new();
    if include_outer {
        jobs.push((Cutoff::Outer.label(), Cutoff::Outer, None));
    }
    jobs.push((
        Cutoff::TauM(m).label(),
        Cutoff::TauM(m),
        Some(2f64.powi(-(m as i32 + 1))),
    ));
    for j in 1..=m {
        jobs.push((
            Cutoff::Phi(j).label(),
            Cutoff::Phi(j),
            Some(2f64.powi(-(j as i32))),
        ));
    }
    par::try_map(&jobs, |(label, cutoff, t)| {
        let piece = cut(base, *cutoff);
        let moved = match t {
            Some(t) => dilated(lambda, &piece, *t)?,
            None => RepVector::Analytic(piece),
        };
        Ok(BlockValue {
            chart,
            label: label.clone(),
            value: sobolev_norm(lambda, &moved, spec, cfg)?,
        })
    })
}

/// Computable upper bound for `S_k^G(f)` from the dyadic decomposition.
///
/// `f` is first rotated by `k₀`, so that the fixed points `±1` of `H` sit at
/// the fixed points `0, ∞` of `A`. The piece near infinity is brought to
/// the origin by the Weyl element and decomposed the same way. Every block
/// is then measured by `S_k` after its dilation `b_{2^{-j}}` or
/// `b_{2^{-(m+1)}}`. With `m = None` the level is chosen per chart as the
/// smallest one whose `τ_m` block is at most `‖f‖`.
pub fn invariant_upper_bound(
    lambda: SpectralParam,
    f: &RepVector,
    k: usize,
    m: Option<usize>,
    cfg: &QuadratureConfig,
) -> Result<InvariantBound> {
    if matches!(f, RepVector::Sampled(_)) {
        return Err(Error::InvalidInput(
            "the dyadic bound needs an analytic vector".into(),
        ));
    }
    if m == Some(0) {
        return Err(Error::InvalidInput(
            "dyadic level m must be at least 1".into(),
        ));
    }
    let spec = SobolevSpec::full(k)?;
    let norm = l2_norm(f, cfg)?;
    let RepVector::Analytic(origin) = apply_pi(lambda, &GroupElement::k0(), f)? else {
        unreachable!("analytic input stays analytic")
    };
    // π(w)((τ+φ)F) = ((τ+φ)∘w⁻¹) · π(w)F, supported in [-2, 2]
    let weyl = GroupElement::k(FRAC_PI_2);
    let RepVector::Analytic(moved) = apply_pi(lambda, &weyl, &RepVector::Analytic(origin.clone()))?
    else {
        unreachable!("analytic input stays analytic")
    };
    let [[a, b], [cc, d]] = weyl.inverse().as_real().expect("the Weyl element is real");
    let mut edges = Cutoff::Outer
        .breakpoints()
        .iter()
        .map(|r| -1.0 / r)
        .collect::<Vec<_>>();
    edges.push(0.0);
    let far = moved.modulate(
        format!("far*{}", moved.label()),
        &edges,
        Some((-2.0, 2.0)),
        move |x| Cutoff::Outer.jet(&((*x * a + b) / (*x * cc + d))),
    );

    let (m0, ok0) = match m {
        Some(m) => (m, true),
        None => choose_m(lambda, &origin, norm, &spec, cfg)?,
    };
    let (m1, ok1) = match m {
        Some(m) => (m, true),
        None => choose_m(lambda, &far, norm, &spec, cfg)?,
    };
    let mut blocks = chart_blocks(lambda, Chart::Origin, &origin, m0, false, &spec, cfg)?;
    blocks.extend(chart_blocks(
        lambda,
        Chart::Infinity,
        &far,
        m1,
        true,
        &spec,
        cfg,
    )?);
    let bound = blocks.iter().map(|b| b.value).sum();

    let restricted =
        |g| -> Result<f64> { sobolev_norm(lambda, f, &SobolevSpec::restricted(k, g)?, cfg) };
    let comparison = restricted(Subgroup::NBar)? + norm + restricted(Subgroup::A)?;
    Ok(InvariantBound {
        bound,
        comparison,
        norm,
        m_origin: m0,
        m_infinity: m1,
        m_criterion_met: ok0 && ok1,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationCheck {
    /// `S_{k,A}(π(k₀) f)`.
    pub lhs: f64,
    /// `S_{k,H}(f)`.
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `S_{k,A}(π(k₀)f)` with `S_{k,H}(f)`.
pub fn rotate_a_to_h(
    lambda: SpectralParam,
    f: &RepVector,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<RotationCheck> {
    let rotated = apply_pi(lambda, &GroupElement::k0(), f)?;
    let lhs = sobolev_norm(
        lambda,
        &rotated,
        &SobolevSpec::restricted(k, Subgroup::A)?,
        cfg,
    )?;
    let rhs = sobolev_norm(lambda, f, &SobolevSpec::restricted(k, Subgroup::H)?, cfg)?;
    Ok(RotationCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyPoint {
    pub eps: f64,
    pub norm: f64,
    /// `S_k(π(a_ε)v_K)`.
    pub full: f64,
    /// `S_{k,H}(π(a_ε)v_K)`.
    pub restricted_h: f64,
    pub bound: Option<InvariantBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyScan {
    pub k: usize,
    pub points: Vec<DichotomyPoint>,
    /// Least-squares slope of `log S_k` against `log ε`.
    pub slope: f64,
    /// `max/min` of `S_{k,H}/‖·‖` over the scan.
    pub h_band: f64,
    /// `max/min` of the invariant bound over `‖·‖`, if computed.
    pub bound_band: Option<f64>,
}

fn band(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    hi / lo
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `S_k`, `S_{k,H}` and optionally the invariant bound of `π(a_ε)v_K` along
/// `eps_list`.
pub fn dichotomy_scan(
    lambda: SpectralParam,
    k: usize,
    eps_list: &[f64],
    with_bound: bool,
    cfg: &QuadratureConfig,
) -> Result<DichotomyScan> {
    let full = SobolevSpec::full(k)?;
    let h = SobolevSpec::restricted(k, Subgroup::H)?;
    let points = eps_list
        .iter()
        .map(|&eps| -> Result<DichotomyPoint> {
            let v = RepVector::Analytic(continue_vk(lambda, eps)?);
            Ok(DichotomyPoint {
                eps,
                norm: l2_norm(&v, cfg)?,
                full: sobolev_norm(lambda, &v, &full, cfg)?,
                restricted_h: sobolev_norm(lambda, &v, &h, cfg)?,
                bound: if with_bound {
                    Some(invariant_upper_bound(lambda, &v, k, None, cfg)?)
                } else {
                    None
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.eps.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.full.ln()).collect();
    Ok(DichotomyScan {
        k,
        slope: fit_slope(&xs, &ys),
        h_band: band(points.iter().map(|p| p.restricted_h / p.norm)),
        bound_band: with_bound.then(|| {
            band(
                points
                    .iter()
                    .filter_map(|p| p.bound.as_ref().map(|b| b.bound / p.norm)),
            )
        }),
        points,
    })
}
