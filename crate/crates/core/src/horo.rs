//! Holomorphic horospherical projection, trace domains and the escape curve.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::crown::{crown_contains, PairPoint};
use crate::error::{Error, Result};
use crate::lie::{complex_na_decompose, GroupElement, ProjPoint};
use crate::numerics::QuadratureConfig;
use crate::par::{self, Mode};
use crate::principal::{orbit_norm_sq, SpectralParam};
use crate::{c, C64, I};

/// Coefficient of `h` in `log a_C(z)`, continued along a path from `x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoroProjection {
    pub value: C64,
    /// Number of accepted steps on the path from the base point.
    pub path_steps: usize,
}

impl HoroProjection {
    /// `a_C = exp(value · h)`, defined up to `M = {±1}`.
    pub fn a_part(&self) -> C64 {
        self.value.exp()
    }
}

/// `ζ` with `k_θ exp(iφh) · x₀ ∈ N_C a_ζ · x₀`, continued from `ζ = e^{iφ}`
/// at `θ = 0`.
pub fn ac_closed_form(theta: f64, phi: f64) -> Result<C64> {
    if !(phi.abs() < FRAC_PI_4) {
        return Err(Error::DomainError(format!(
            "|phi| = {} must be below pi/4",
            phi.abs()
        )));
    }
    let (s, co) = theta.sin_cos();
    let radicand =
        co * co * C64::from_polar(1.0, -2.0 * phi) + s * s * C64::from_polar(1.0, 2.0 * phi);
    if radicand.re <= 0.0 {
        return Err(Error::BranchCut(format!(
            "radicand {radicand} at theta = {theta}"
        )));
    }
    Ok(radicand.sqrt().inv())
}

fn a_square(z1: C64, z2: C64) -> C64 {
    (z1 - z2) / (2.0 * I)
}

/// `log a_C(z)`, tracked along the segment from `x₀` to `z` in pair
/// coordinates, which stays inside the crown.
pub fn log_ac(z: &PairPoint) -> Result<HoroProjection> {
    if !crown_contains(z) {
        return Err(Error::NotInCrown);
    }
    let (Some(z1), Some(z2)) = (z.first.finite(), z.second.finite()) else {
        return Err(Error::NotInCrown);
    };
    let start = (I, -I);
    let at = |t: f64| a_square(start.0 + t * (z1 - start.0), start.1 + t * (z2 - start.1));
    let mut t: f64 = 0.0;
    let mut step: f64 = 0.125;
    let mut prev = at(0.0);
    let mut log = C64::new(0.0, 0.0);
    let mut steps = 0;
    while t < 1.0 {
        let next_t = (t + step).min(1.0);
        let next = at(next_t);
        let jump = (next / prev).arg();
        if jump.abs() > FRAC_PI_2 {
            step *= 0.5;
            if step < 1e-14 {
                return Err(Error::BranchCut("path tracking step underflow".into()));
            }
            continue;
        }
        log += c((next.norm() / prev.norm()).ln(), jump);
        prev = next;
        t = next_t;
        steps += 1;
    }
    Ok(HoroProjection {
        value: 0.5 * log,
        path_steps: steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityScan {
    pub phi: f64,
    pub min_im: f64,
    pub max_im: f64,
    /// `max(|max_im - |φ||, |min_im + |φ||)`.
    pub endpoint_gap: f64,
    /// Largest excursion outside `[-|φ|, |φ|]`, zero if contained.
    pub overshoot: f64,
}

/// Extremes of `Im log a_C(k_θ exp(iφh) x₀)` over `n_samples` equispaced
/// angles in `[0, 2π)`.
pub fn convexity_scan(phi: f64, n_samples: usize) -> Result<ConvexityScan> {
    convexity_scan_with(Mode::default(), phi, n_samples)
}

pub fn convexity_scan_with(mode: Mode, phi: f64, n_samples: usize) -> Result<ConvexityScan> {
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let ims = par::map_range_with(mode, n_samples, |i| {
        let theta = 2.0 * PI * i as f64 / n_samples as f64;
        ac_closed_form(theta, phi).map(|z| z.arg())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let min_im = ims.iter().copied().fold(f64::INFINITY, f64::min);
    let max_im = ims.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b = phi.abs();
    Ok(ConvexityScan {
        phi,
        min_im,
        max_im,
        endpoint_gap: (max_im - b).abs().max((min_im + b).abs()),
        overshoot: (max_im - b).max(-b - min_im).max(0.0),
    })
}

/// The invariant `p(z) = tr(g gᵀ)` for `z = g · x₀`, in pair coordinates.
pub fn trace_of_point(z: &PairPoint) -> Result<C64> {
    let d = complex_na_decompose(z)?;
    let w = d.n_part;
    Ok(d.a_square + (1.0 + w * w) / d.a_square)
}

/// `X_C(ω)` for `ω = (-b, b)·h`, or `X_C(2ω)` when `doubled`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceDomainSpec {
    pub omega_bound: f64,
    pub doubled: bool,
}

impl TraceDomainSpec {
    pub fn new(omega_bound: f64, doubled: bool) -> Result<Self> {
        if !(omega_bound > 0.0 && omega_bound <= FRAC_PI_4) {
            return Err(Error::DomainError(format!(
                "omega bound {omega_bound} outside (0, pi/4]"
            )));
        }
        Ok(Self {
            omega_bound,
            doubled,
        })
    }

    /// The full domain `Ω` or `2Ω`.
    pub fn full(doubled: bool) -> Self {
        Self {
            omega_bound: FRAC_PI_4,
            doubled,
        }
    }

    fn effective(&self) -> f64 {
        if self.doubled {
            2.0 * self.omega_bound
        } else {
            self.omega_bound
        }
    }

    /// `p(a_t exp(iφh) x₀) = 2 cosh(2 log t + 2iφ)`.
    pub fn image_point(t: f64, phi: f64) -> C64 {
        2.0 * c(2.0 * t.ln(), 2.0 * phi).cosh()
    }
}

/// Membership of `value` in `p(A exp(iω') x₀)`, with `ω'` the (possibly
/// doubled) segment of `spec`.
///
/// The image is `{2 cosh w : |Im w| < 2b'}`, so the test is exact via the
/// principal `acosh`.
pub fn trace_domain_contains(spec: &TraceDomainSpec, value: C64) -> bool {
    let w = (value * 0.5).acosh();
    w.is_finite() && w.im.abs() < 2.0 * spec.effective()
}

/// Sampled version of [`trace_domain_contains`]: seeds from a dense
/// parametric sample of the image, refines by Newton on `2 cosh w = value`,
/// and accepts within `tol`.
pub fn trace_domain_contains_sampled(spec: &TraceDomainSpec, value: C64, tol: f64) -> bool {
    let bound = 2.0 * spec.effective();
    let target = value * 0.5;
    let (nu, nv) = (241, 61);
    let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
    for i in 0..nu {
        let u = -12.0 + 24.0 * i as f64 / (nu - 1) as f64;
        for j in 0..nv {
            let v = -bound + 2.0 * bound * (j as f64 + 0.5) / nv as f64;
            let w = c(u, v);
            let d = (w.cosh() - target).norm() / (1.0 + target.norm());
            if d < best.0 {
                best = (d, w);
            }
        }
    }
    let mut w = best.1;
    for _ in 0..60 {
        let step = (w.cosh() - target) / w.sinh();
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    // fold onto the fundamental strip: w ~ -w, w ~ w + 2πi
    let mut v = w.im.rem_euclid(2.0 * PI);
    if v > PI {
        v -= 2.0 * PI;
    }
    let residual = (w.cosh() - target).norm() / (1.0 + target.norm());
    residual < tol && v.abs() < bound
}

/// `p(a_r n_{it} x₀)`, evaluated through the pair model.
pub fn unipotent_trace(r: f64, t: f64) -> Result<C64> {
    let z = PairPoint::finite(r * r * I * (1.0 + t), r * r * I * (t - 1.0))?;
    trace_of_point(&z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapePoint {
    pub s: f64,
    pub gamma: GroupElement,
    pub sigma: f64,
}

/// The upper-triangular curve `γ(s)` for `π/4 < |φ| < π/2` and
/// `σ(s) = p(γ(s) exp(iφh) x₀)`.
pub fn escape_curve(phi: f64, s: f64) -> Result<EscapePoint> {
    if !(phi.abs() > FRAC_PI_4 && phi.abs() < FRAC_PI_2) {
        return Err(Error::DomainError(format!(
            "|phi| = {} outside (pi/4, pi/2)",
            phi.abs()
        )));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::DomainError(format!("s = {s} outside [0, 1]")));
    }
    let root = (-(2.0 * phi).cos()).sqrt();
    let a = (root + s * (1.0 - root)) / root;
    let b = (a * a - 1.0 / (a * a)).max(0.0).sqrt();
    let gamma = GroupElement::from_real(a, b, 0.0, 1.0 / a)?;
    let w = I * C64::from_polar(1.0, 2.0 * phi);
    let sigma = trace_of_point(&gamma.act_pair(&PairPoint::new_unchecked(
        ProjPoint::Finite(w),
        ProjPoint::Finite(-w),
    )))?;
    Ok(EscapePoint {
        s,
        gamma,
        sigma: sigma.re,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupPoint {
    pub s: f64,
    pub sigma: f64,
    pub value: Option<f64>,
    pub error: Option<f64>,
    /// Peak of the integrand predicted beyond the representable cap.
    pub saturated: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupScan {
    pub points: Vec<BlowupPoint>,
    pub monotone: bool,
    pub all_positive: bool,
    /// Ratio of the last two finite values.
    pub last_ratio: Option<f64>,
}

const BLOWUP_CAP: f64 = 1e12;

/// `Φ_λ(σ) = ‖π(exp(iψh)) v_K‖²` with `2 cos 4ψ = σ`, evaluated along the
/// escape curve.
pub fn phi_blowup_scan(
    lambda: SpectralParam,
    phi: f64,
    s_values: &[f64],
    cfg: &QuadratureConfig,
) -> Result<BlowupScan> {
    let curve = s_values
        .iter()
        .map(|&s| escape_curve(phi, s))
        .collect::<Result<Vec<_>>>()?;
    let points = par::map(&curve, |p| {
        let sigma = p.sigma.clamp(-2.0, 2.0);
        let psi = 0.25 * (0.5 * sigma).acos();
        // σ = -2 + δ only resolves ψ to about √δ
        let gap = 0.25 * (-0.5 * sigma).acos();
        let mut point = BlowupPoint {
            s: p.s,
            sigma: p.sigma,
            value: None,
            error: None,
            saturated: false,
            failure: None,
        };
        if sigma + 2.0 <= f64::EPSILON * 8.0 || 1.0 / gap > BLOWUP_CAP {
            point.saturated = true;
            return point;
        }
        match orbit_norm_sq(lambda, psi, cfg) {
            Ok((v, e)) => {
                point.value = Some(v);
                point.error = Some(e);
            }
            Err(e) => point.failure = Some(e.to_string()),
        }
        point
    });
    let finite: Vec<f64> = points.iter().filter_map(|p| p.value).collect();
    Ok(BlowupScan {
        monotone: finite.windows(2).all(|w| w[1] > w[0]),
        all_positive: finite.iter().all(|v| *v > 0.0),
        last_ratio: (finite.len() >= 2)
            .then(|| finite[finite.len() - 1] / finite[finite.len() - 2]),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crown::random_crown_point;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute(theta: f64, phi: f64) -> C64 {
        let g = GroupElement::k(theta) * GroupElement::a_complex(C64::from_polar(1.0, phi));
        let z = g.act_pair(&PairPoint::base());
        complex_na_decompose(&z).unwrap().a_part
    }

    fn mod_sign(a: C64, b: C64) -> f64 {
        (a - b).norm().min((a + b).norm())
    }

    #[test]
    fn closed_form_examples() {
        for phi in [-0.5, 0.1, 0.7] {
            let z = ac_closed_form(0.0, phi).unwrap();
            assert!((z - C64::from_polar(1.0, phi)).norm() < 1e-15);
        }
        assert!(mod_sign(ac_closed_form(0.7, 0.5).unwrap(), brute(0.7, 0.5)) < 1e-10);
        assert!(ac_closed_form(0.3, FRAC_PI_4).is_err());
    }

    #[test]
    fn closed_form_matches_decomposition_on_grid() {
        for i in 0..60 {
            for j in 0..60 {
                let theta = 2.0 * PI * i as f64 / 60.0;
                let phi = 0.9 * FRAC_PI_4 * (2.0 * j as f64 / 59.0 - 1.0);
                let d = mod_sign(ac_closed_form(theta, phi).unwrap(), brute(theta, phi));
                assert!(d < 1e-10, "theta {theta} phi {phi}: {d}");
            }
        }
    }

    #[test]
    fn log_projection_examples() {
        let h = log_ac(&PairPoint::base()).unwrap();
        assert!(h.value.norm() < 1e-15);
        let g = GroupElement::n(0.8) * GroupElement::a(1.7);
        let h = log_ac(&g.act_pair(&PairPoint::base())).unwrap();
        assert!((h.value - 1.7f64.ln()).norm() < 1e-12);
        let off = PairPoint::finite(c(1.0, 0.0), c(0.0, -1.0)).unwrap();
        assert_eq!(log_ac(&off), Err(Error::NotInCrown));
    }

    #[test]
    fn log_projection_reproduces_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let z = random_crown_point(&mut rng, 2.0, 0.99 * FRAC_PI_4);
            let h = log_ac(&z).unwrap();
            let d = complex_na_decompose(&z).unwrap();
            assert!(((2.0 * h.value).exp() - d.a_square).norm() < 1e-10 * d.a_square.norm());
        }
    }

    #[test]
    fn k_orbit_imaginary_part_is_contained() {
        for phi in [0.2, -0.4, 0.75] {
            for i in 0..200 {
                let theta = 2.0 * PI * i as f64 / 200.0;
                let g = GroupElement::k(theta) * GroupElement::a_complex(C64::from_polar(1.0, phi));
                let h = log_ac(&g.act_pair(&PairPoint::base())).unwrap();
                assert!(h.value.im.abs() <= phi.abs() + 1e-12);
                let z = ac_closed_form(theta, phi).unwrap();
                assert!((h.value.im - z.arg()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn convexity_examples() {
        let s = convexity_scan(0.0, 64).unwrap();
        assert_eq!((s.min_im, s.max_im), (0.0, 0.0));
        for phi in [FRAC_PI_8, 0.7 * FRAC_PI_4] {
            let s = convexity_scan(phi, 10_000).unwrap();
            assert!(s.overshoot < 1e-9);
            assert!(s.endpoint_gap < 1e-6);
        }
        let a = convexity_scan_with(Mode::Sequential, 0.4, 1000).unwrap();
        let b = convexity_scan_with(Mode::Parallel, 0.4, 1000).unwrap();
        assert_eq!(a, b);
    }

    use std::f64::consts::FRAC_PI_8;

    #[test]
    fn trace_matches_parametric_image() {
        for (t, phi) in [(1.0, 0.0), (2.0, 0.3), (0.4, -0.6)] {
            let g = GroupElement::a(t) * GroupElement::a_complex(C64::from_polar(1.0, phi));
            let p = trace_of_point(&g.act_pair(&PairPoint::base())).unwrap();
            let closed = (2.0 * phi).cos() * (t * t + 1.0 / (t * t))
                + I * (2.0 * phi).sin() * (t * t - 1.0 / (t * t));
            assert!((p - closed).norm() < 1e-12);
            assert!((p - TraceDomainSpec::image_point(t, phi)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_domain_examples() {
        let full = TraceDomainSpec::full(false);
        let dbl = TraceDomainSpec::full(true);
        assert!(trace_domain_contains(&full, c(2.0, 0.0)));
        assert!(trace_domain_contains(&dbl, c(2.0, 0.0)));
        assert!(!trace_domain_contains(&dbl, c(-3.0, 0.0)));
        assert!(!trace_domain_contains(&dbl, c(-2.0, 0.0)));
        assert!(trace_domain_contains(&dbl, c(-3.0, 1e-6)));
        assert!(trace_domain_contains(&full, c(1e-3, 5.0)));
        assert!(!trace_domain_contains(&full, c(-1e-3, 5.0)));
    }

    #[test]
    fn sampled_oracle_agrees_with_exact_test() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        use rand::Rng;
        for b in [0.2, 0.5, FRAC_PI_4] {
            for doubled in [false, true] {
                let spec = TraceDomainSpec::new(b, doubled).unwrap();
                for _ in 0..200 {
                    let v = c(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
                    let w = (v * 0.5).acosh();
                    // skip values within the sampling tolerance of the boundary
                    if (w.im.abs() - 2.0 * spec.effective()).abs() < 1e-3 {
                        continue;
                    }
                    assert_eq!(
                        trace_domain_contains(&spec, v),
                        trace_domain_contains_sampled(&spec, v, 1e-6),
                        "b {b} doubled {doubled} v {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn random_crown_points_have_doubled_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dbl = TraceDomainSpec::full(true);
        let single = TraceDomainSpec::full(false);
        for _ in 0..2000 {
            let z = random_crown_point(&mut rng, 3.0, 0.999 * FRAC_PI_4);
            let p = trace_of_point(&z).unwrap();
            assert!(trace_domain_contains(&dbl, p));
            assert!(trace_domain_contains(&single, p));
        }
    }

    #[test]
    fn unipotent_trace_formula() {
        for (r, t) in [(1.0, 0.5), (0.7, 1.3), (2.0, -0.9)] {
            let p = unipotent_trace(r, t).unwrap();
            let f = r * r + 1.0 / (r * r) - t * t * r * r;
            assert!((p - f).norm() < 1e-12);
        }
    }

    #[test]
    fn escape_curve_endpoints_and_monotonicity() {
        let phi = 3.0 * FRAC_PI_8;
        let end = escape_curve(phi, 1.0).unwrap();
        assert!((end.sigma + 2.0).abs() < 1e-12);
        let start = escape_curve(phi, 0.0).unwrap();
        assert!((start.sigma - 2.0 * (2.0 * phi).cos()).abs() < 1e-12);
        let mid = escape_curve(phi, 0.5).unwrap().sigma;
        assert!(mid > -2.0 && mid < 2.0);
        let sig: Vec<f64> = (0..200)
            .map(|i| escape_curve(phi, i as f64 / 199.0).unwrap().sigma)
            .collect();
        assert!(sig.windows(2).all(|w| w[1] < w[0]));
        assert!(escape_curve(0.5, 0.5).is_err());
        assert!(escape_curve(phi, 1.5).is_err());
    }

    #[test]
    fn blowup_grows_towards_the_end_of_the_curve() {
        let lam = SpectralParam::new(1.0).unwrap();
        let scan = phi_blowup_scan(
            lam,
            3.0 * FRAC_PI_8,
            &[0.9, 0.99, 0.999],
            &QuadratureConfig::representation(),
        )
        .unwrap();
        assert!(scan.monotone && scan.all_positive, "{scan:?}");
        assert!(scan.points.iter().all(|p| p.value.is_some()));
        let sat = phi_blowup_scan(
            lam,
            3.0 * FRAC_PI_8,
            &[1.0],
            &QuadratureConfig::representation(),
        )
        .unwrap();
        assert!(sat.points[0].saturated);
    }

    proptest! {
        #[test]
        fn escape_sigma_is_decreasing(phi in FRAC_PI_4 + 1e-3..FRAC_PI_2 - 1e-3, s in 0.0f64..0.99) {
            let a = escape_curve(phi, s).unwrap().sigma;
            let b = escape_curve(phi, s + 0.01).unwrap().sigma;
            prop_assert!(b < a);
            prop_assert!((-2.0 - 1e-12..=2.0).contains(&a));
        }

        #[test]
        fn closed_form_stays_in_right_half_plane(theta in 0.0..2.0 * PI, phi in -0.78f64..0.78) {
            let z = ac_closed_form(theta, phi).unwrap();
            prop_assert!(z.arg().abs() <= phi.abs() + 1e-12);
        }
    }
}
