use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use super::vector::{apply_pi, continued_vk, inner, AnalyticVector, RepVector};
use super::SpectralParam;
use crate::crown::PairPoint;
use crate::error::{Error, Result};
use crate::lie::GroupElement;
use crate::numerics::{integrate, QuadratureConfig};
use crate::{c, C64, I};

/// `φ_λ(z) = (1/π) ∫_0^π exp((1+iλ) log a_C(k_θ z)) dθ`.
///
/// Points of the closure of the crown are accepted; where a rotated
/// coordinate passes through infinity the integrand has an integrable
/// inverse-square-root peak, removed by a quadratic substitution.
pub fn phi_lambda(lambda: SpectralParam, z: &PairPoint, cfg: &QuadratureConfig) -> Result<C64> {
    let (z1, z2) = match (z.first.finite(), z.second.finite()) {
        (Some(a), Some(b)) if a.im >= 0.0 && b.im <= 0.0 => (a, b),
        _ => return Err(Error::NotInCrown),
    };
    let sq = (z1 - z2) / (2.0 * I);
    let power = c(1.0, lambda.lambda) * 0.5;
    // a real coordinate w = cot θ₀ gives the factor sin(θ₀ - θ)/sin θ₀
    let pole = |w: C64| {
        (w.im.abs() < 1e-12).then(|| {
            let t = (1.0 / w.re).atan();
            if t < 0.0 {
                t + PI
            } else {
                t
            }
        })
    };
    let poles = [pole(z1), pole(z2)];
    // integrand at θ = base + off, with the offset kept exact near a pole
    let f = |base: f64, off: f64| {
        let factor = |w: C64, p: Option<f64>| match p {
            Some(t0) if t0 == base => C64::from((-off).sin() / t0.sin()),
            Some(t0) => C64::from((t0 - base - off).sin() / t0.sin()),
            None => (base + off).cos() - (base + off).sin() * w,
        };
        let q = sq / (factor(z1, poles[0]) * factor(z2, poles[1]));
        (q.ln() * power).exp()
    };
    let mut edges: Vec<f64> = poles
        .iter()
        .flatten()
        .copied()
        .filter(|t| *t > 0.0 && *t < PI)
        .collect();
    edges.extend([0.0, PI]);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let is_pole = |t: f64| poles.contains(&Some(t));
    let mut total = C64::new(0.0, 0.0);
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if !is_pole(lo) && !is_pole(hi) {
            total += integrate(|th| f(lo, th - lo), lo, hi, cfg)?.value;
            continue;
        }
        // u² substitution on each half removes the inverse-square-root peak
        let half = 0.5 * (hi - lo);
        for (anchor, sign) in [(lo, 1.0), (hi, -1.0)] {
            total += if is_pole(anchor) {
                integrate(
                    |u| f(anchor, sign * u * u) * (2.0 * u),
                    0.0,
                    half.sqrt(),
                    cfg,
                )?
                .value
            } else {
                let mid = lo + half;
                integrate(|th| f(mid, th - mid), mid.min(anchor), mid.max(anchor), cfg)?.value
            };
        }
    }
    Ok(total / PI)
}

/// `Φ_λ(2 cosh ζ)` for `|Im ζ| < π/2` from the Laplace-type integral
/// `(1/π) ∫_0^π (cosh ζ + sinh ζ cos θ)^{-(1+iλ)/2} dθ`.
///
/// The substitution `tan(θ/2) = e^s` turns it into an integral over the
/// line with exponentially decaying, analytic integrand, on which the
/// trapezoid rule converges geometrically.
pub fn phi_laplace(lambda: SpectralParam, zeta: C64, tol: f64) -> Result<C64> {
    if zeta.im.abs() >= FRAC_PI_2 {
        return Err(Error::DomainError(format!(
            "|Im zeta| = {} must be below pi/2",
            zeta.im.abs()
        )));
    }
    let nu = c(-0.5, -0.5 * lambda.lambda);
    let softplus = |u: f64| {
        if u > 0.0 {
            u + (-u).exp().ln_1p()
        } else {
            u.exp().ln_1p()
        }
    };
    let integrand = |s: f64| -> C64 {
        // Log(e^ζ + e^{-ζ + 2s}) without overflow
        let a = zeta;
        let b = -zeta + 2.0 * s;
        let log_sum = if b.re > a.re {
            b + ((a - b).exp()).ln_1p_c()
        } else {
            a + ((b - a).exp()).ln_1p_c()
        };
        let log_val = nu * log_sum - (nu + 1.0) * softplus(2.0 * s) + s;
        log_val.exp() * (2.0 / PI)
    };
    let reach = 40.0 + zeta.re.abs();
    let (lo, hi) = (-reach, reach);
    let mut h = 0.25;
    let mut prev: Option<C64> = None;
    for _ in 0..14 {
        let n = ((hi - lo) / h).ceil() as usize;
        let step = (hi - lo) / n as f64;
        let sum: C64 = (0..=n)
            .map(|j| integrand(lo + j as f64 * step))
            .sum::<C64>()
            * step;
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::InvalidIntegrand { at: f64::NAN });
        }
        if let Some(p) = prev {
            if (sum - p).norm() <= tol * (1.0 + sum.norm()) {
                return Ok(sum);
            }
        }
        prev = Some(sum);
        h *= 0.5;
    }
    let p = prev.unwrap_or_default();
    Err(Error::NonConvergence {
        estimate: p.re,
        error: f64::NAN,
        subdivisions: 14,
    })
}

/// `Φ_λ(2 cosh ζ)` for `|Im ζ| < π`, which covers the traces of the doubled
/// crown.
///
/// Uses Mehler's integral `(√2/π) ∫_0^ζ cos(λs/2) (cosh ζ - cosh s)^{-1/2} ds`
/// along `s = (1 - v²) ζ`. Writing `cosh ζ - cosh s` as a product of two
/// `sinh` factors makes the integrand analytic in `v` on `[0, 1]`, with no
/// branch to track.
pub fn phi_mehler(lambda: SpectralParam, zeta: C64, cfg: &QuadratureConfig) -> Result<C64> {
    phi_superposition(&[(lambda.lambda, c(1.0, 0.0))], zeta, cfg)
}

/// `Σ c_j Φ_{λ_j}(2 cosh ζ)` from a single Mehler integral.
pub fn phi_superposition(terms: &[(f64, C64)], zeta: C64, cfg: &QuadratureConfig) -> Result<C64> {
    if zeta.im.abs() >= PI {
        return Err(Error::DomainError(format!(
            "|Im zeta| = {} must be below pi",
            zeta.im.abs()
        )));
    }
    if zeta.re.abs() > 600.0 {
        return Err(Error::DomainError(format!(
            "Re zeta = {} overflows",
            zeta.re
        )));
    }
    let est = integrate(
        |v| {
            let w = 1.0 - v * v;
            let s = zeta * w;
            let mix: C64 = terms.iter().map(|(l, cj)| cj * (s * (0.5 * l)).cos()).sum();
            let den = (2.0 - v * v).sqrt()
                * sinhc_sqrt(zeta * (0.5 * (1.0 + w)))
                * sinhc_sqrt(zeta * (0.5 * v * v));
            mix / den
        },
        0.0,
        1.0,
        cfg,
    )?;
    Ok(est.value * (4.0 / PI))
}

/// Principal `√(sinh w / w)`; the quotient never meets the negative axis on
/// `|Im w| < π`.
fn sinhc_sqrt(w: C64) -> C64 {
    let q = if w.norm() < 1e-3 {
        let w2 = w * w;
        1.0 + w2 / 6.0 + w2 * w2 / 120.0
    } else {
        w.sinh() / w
    };
    q.sqrt()
}

trait Ln1p {
    fn ln_1p_c(self) -> C64;
}

impl Ln1p for C64 {
    fn ln_1p_c(self) -> C64 {
        if self.norm() < 1e-4 {
            self - self * self / 2.0 + self * self * self / 3.0
        } else {
            (self + 1.0).ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingCheck {
    pub lhs: C64,
    pub rhs: C64,
    /// Relative gap `|lhs - rhs| / |lhs|`.
    pub gap: f64,
}

/// Compares `φ_λ(a_t exp(2iφh) x₀)` from the `K`-integral with the pairing
/// `⟨π(a_t exp(iφh)) v_K, π(exp(iφh)) v_K⟩`.
pub fn doubling_check(
    lambda: SpectralParam,
    t: f64,
    phi: f64,
    cfg: &QuadratureConfig,
) -> Result<DoublingCheck> {
    if !(t > 0.0) || 2.0 * phi.abs() > std::f64::consts::FRAC_PI_4 + 1e-15 {
        return Err(Error::DomainError(
            "need t > 0 and the doubled point in the closed crown".into(),
        ));
    }
    let a = GroupElement::a(t);
    let w = I * C64::from_polar(1.0, 4.0 * phi);
    let point = a.act_pair(&PairPoint::finite(w, -w)?);
    let lhs = phi_lambda(lambda, &point, cfg)?;
    let half = continued_vk(lambda, phi);
    let RepVector::Analytic(moved) = apply_pi(lambda, &a, &RepVector::Analytic(half.clone()))?
    else {
        unreachable!("analytic input stays analytic")
    };
    let rhs = pairing(&moved, &half, cfg)?;
    Ok(DoublingCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).norm() / lhs.norm(),
    })
}

fn pairing(f: &AnalyticVector, g: &AnalyticVector, cfg: &QuadratureConfig) -> Result<C64> {
    Ok(inner(f, g, cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crown::{elliptic_point, random_crown_point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lam(l: f64) -> SpectralParam {
        SpectralParam::new(l).unwrap()
    }

    fn geo() -> QuadratureConfig {
        QuadratureConfig::geometry()
    }

    #[test]
    fn normalised_at_base_point() {
        let v = phi_lambda(lam(1.0), &PairPoint::base(), &geo()).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
        let w = phi_laplace(lam(1.0), c(0.0, 0.0), 1e-13).unwrap();
        assert!((w - 1.0).norm() < 1e-12, "{w}");
    }

    #[test]
    fn real_points_are_positive_and_match_laplace_form() {
        for t in [1.3, 2.0, 5.0] {
            let z = GroupElement::a(t).act_pair(&PairPoint::base());
            let k = phi_lambda(lam(1.0), &z, &geo()).unwrap();
            assert!(k.im.abs() < 1e-10 && k.re > 0.0);
            let l = phi_laplace(lam(1.0), c(2.0 * t.ln(), 0.0), 1e-13).unwrap();
            assert!((k - l).norm() < 1e-9, "t={t}: {k} vs {l}");
        }
    }

    #[test]
    fn complex_points_match_laplace_form() {
        for (t, phi) in [(1.0, 0.3), (2.0, -0.5), (0.7, 0.7)] {
            let z = elliptic_point(&GroupElement::a(t), phi).unwrap();
            let k = phi_lambda(lam(0.6), &z, &geo()).unwrap();
            let l = phi_laplace(lam(0.6), c(2.0 * f64::ln(t), 2.0 * phi), 1e-13).unwrap();
            assert!((k - l).norm() < 1e-9, "{k} vs {l}");
        }
    }

    #[test]
    fn symmetric_in_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let z = random_crown_point(&mut rng, 1.5, 0.7);
            let a = phi_lambda(lam(1.4), &z, &geo()).unwrap();
            let b = phi_lambda(lam(-1.4), &z, &geo()).unwrap();
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn mehler_matches_laplace_inside_the_crown() {
        for zeta in [
            c(0.0, 0.0),
            c(0.4, 0.0),
            c(3.0, 0.0),
            c(1.2, 0.9),
            c(-0.7, -1.3),
            c(6.0, 1.5),
        ] {
            for l in [0.0, 1.0, 7.5] {
                let m = phi_mehler(lam(l), zeta, &geo()).unwrap();
                let p = phi_laplace(lam(l), zeta, 1e-13).unwrap();
                assert!(
                    (m - p).norm() < 1e-9 * (1.0 + p.norm()),
                    "{zeta} {l}: {m} vs {p}"
                );
            }
        }
    }

    #[test]
    fn mehler_matches_doubled_orbit_norm() {
        let rep = QuadratureConfig::representation().with_tolerances(1e-11, 1e-11);
        for psi in [0.1, 0.45, 0.7] {
            let (n, _) = crate::principal::orbit_norm_sq(lam(1.0), psi, &rep).unwrap();
            let m = phi_mehler(lam(1.0), c(0.0, 4.0 * psi), &geo()).unwrap();
            assert!(
                m.im.abs() < 1e-10 && (m.re - n).abs() < 1e-7 * n,
                "{psi}: {m} vs {n}"
            );
        }
        assert!(phi_mehler(lam(1.0), c(0.0, PI), &geo()).is_err());
    }

    #[test]
    fn superposition_is_linear() {
        let z = c(2.0, 2.1);
        let terms = [(0.5, c(1.0, 2.0)), (3.0, c(-0.5, 0.0))];
        let whole = phi_superposition(&terms, z, &geo()).unwrap();
        let parts: C64 = terms
            .iter()
            .map(|(l, w)| w * phi_mehler(lam(*l), z, &geo()).unwrap())
            .sum();
        assert!((whole - parts).norm() < 1e-9 * parts.norm());
    }

    #[test]
    fn boundary_point_matches_orbit_norm() {
        let rep = QuadratureConfig::representation().with_tolerances(1e-11, 1e-11);
        let (n, _) = crate::principal::orbit_norm_sq(lam(1.0), PI / 8.0, &rep).unwrap();
        let z = PairPoint::finite(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        let v = phi_lambda(lam(1.0), &z, &rep).unwrap();
        assert!((v - n).norm() < 1e-10 * n, "{v} vs {n}");
        assert!(doubling_check(lam(1.0), 4.0, PI / 8.0, &rep).unwrap().gap < 1e-10);
    }

    #[test]
    fn doubling_examples() {
        let rep = QuadratureConfig::representation().with_tolerances(1e-11, 1e-11);
        let d = doubling_check(lam(1.0), 1.0, 0.0, &rep).unwrap();
        assert!((d.lhs - 1.0).norm() < 1e-10 && (d.rhs - 1.0).norm() < 1e-8);
        let d = doubling_check(lam(1.0), 2.0, PI / 16.0, &rep).unwrap();
        assert!(d.gap < 1e-5, "{d:?}");
        let d = doubling_check(lam(1.0), 1.0, PI / 10.0, &rep).unwrap();
        assert!(d.lhs.re > 0.0);
    }
}
