use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use super::vector::{continue_vk, inner, AnalyticVector};
use super::SpectralParam;
use crate::error::Result;
use crate::numerics::{integrate_singular, QuadratureConfig};
use crate::{c, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    /// `π^{-1/2} (1 - x²)^{-(1-iλ)/2}` on `|x| < 1`.
    Eta1,
    /// `π^{-1/2} (x² - 1)^{-(1-iλ)/2}` on `|x| > 1`.
    Eta2,
    /// Boundary limit of `π(a_ε) v_K`.
    VH,
    /// Complex conjugate of `VH`.
    VHBar,
}

/// Phase convention for the two coefficients of `v_H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `e^{∓iπ(1-iλ)/4}`, the limit of the continued vector.
    Derived,
    /// `e^{∓iπ(1-λ)/4}`, with a real exponent.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HFunctional {
    pub kind: HKind,
    pub lambda: SpectralParam,
    pub convention: Convention,
}

impl HFunctional {
    pub fn new(kind: HKind, lambda: SpectralParam) -> Self {
        Self {
            kind,
            lambda,
            convention: Convention::Derived,
        }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// Coefficients of `η₁` and `η₂` in `v_H`.
    pub fn coefficients(&self) -> (C64, C64) {
        let l = self.lambda.lambda;
        let s = match self.convention {
            Convention::Derived => c(1.0, -l),
            Convention::Printed => c(1.0 - l, 0.0),
        };
        let a = I * FRAC_PI_4 * s;
        ((-a).exp(), a.exp())
    }

    /// Pointwise value; zero off the support and `NaN`-free except at `±1`.
    pub fn value(&self, x: f64) -> C64 {
        let power = c(-0.5, 0.5 * self.lambda.lambda);
        let d = 1.0 - x * x;
        let eta1 = if d > 0.0 {
            c(d, 0.0).powc(power) / PI.sqrt()
        } else {
            c(0.0, 0.0)
        };
        let eta2 = if d < 0.0 {
            c(-d, 0.0).powc(power) / PI.sqrt()
        } else {
            c(0.0, 0.0)
        };
        match self.kind {
            HKind::Eta1 => eta1,
            HKind::Eta2 => eta2,
            HKind::VH | HKind::VHBar => {
                let (c1, c2) = self.coefficients();
                let v = c1 * eta1 + c2 * eta2;
                if self.kind == HKind::VHBar {
                    v.conj()
                } else {
                    v
                }
            }
        }
    }
}

/// `⟨hf, ψ⟩ = ∫ hf(x) conj(ψ(x)) dx`.
///
/// The functionals behave like `|x ∓ 1|^{-1/2}` times a phase oscillating in
/// `log|x ∓ 1|`, so the pieces between breakpoints use tanh–sinh.
pub fn h_functional_eval(
    hf: &HFunctional,
    psi: &AnalyticVector,
    cfg: &QuadratureConfig,
) -> Result<C64> {
    let mut breaks = vec![-1.0, 1.0];
    breaks.extend_from_slice(psi.hints());
    let (lo, hi) = match hf.kind {
        HKind::Eta1 => (-1.0, 1.0),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let f = |x: f64| hf.value(x) * psi.value(x).conj();
    Ok(integrate_singular(f, lo, hi, &breaks, cfg.abs_tol)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPoint {
    pub eps: f64,
    pub pairing: C64,
    pub gap: f64,
}

/// `⟨π(a_ε) v_K, ψ⟩` along `eps_list` and its distance to `⟨v_H, ψ⟩`.
pub fn vh_limit_scan(
    lambda: SpectralParam,
    psi: &AnalyticVector,
    eps_list: &[f64],
    convention: Convention,
    cfg: &QuadratureConfig,
) -> Result<(C64, Vec<LimitPoint>)> {
    let limit = h_functional_eval(
        &HFunctional::new(HKind::VH, lambda).with_convention(convention),
        psi,
        cfg,
    )?;
    let pts = crate::par::try_map(eps_list, |&eps| {
        let v = continue_vk(lambda, eps)?;
        let pairing = inner(&v, psi, cfg)?.value;
        Ok(LimitPoint {
            eps,
            pairing,
            gap: (pairing - limit).norm(),
        })
    })?;
    Ok((limit, pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Jet;

    fn lam(l: f64) -> SpectralParam {
        SpectralParam::new(l).unwrap()
    }

    fn gaussian(center: f64) -> AnalyticVector {
        AnalyticVector::from_jet_fn("gauss", vec![], move |x: &Jet| {
            let d = *x - center;
            (d * d * -1.0).exp()
        })
    }

    #[test]
    fn eta_values() {
        let e1 = HFunctional::new(HKind::Eta1, lam(1.0));
        assert!((e1.value(0.0) - c(1.0 / PI.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(e1.value(2.0), c(0.0, 0.0));
        assert_eq!(
            HFunctional::new(HKind::Eta2, lam(1.0)).value(0.5),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn disjoint_support_pairs_to_zero() {
        let bump = AnalyticVector::new("outer bump", vec![-2.0, -1.5, 1.5, 2.0], |x, n| {
            let ax = x.abs();
            if ax > 1.5 && ax < 2.0 {
                let t = Jet::var(x, n);
                let u = (t * t - 2.25) * (t * t * -1.0 + 4.0);
                (u.recip() * -1.0).exp()
            } else {
                Jet::constant(c(0.0, 0.0), n)
            }
        });
        let e1 = HFunctional::new(HKind::Eta1, lam(1.0));
        let v = h_functional_eval(&e1, &bump, &QuadratureConfig::representation()).unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn continued_vector_converges_to_vh() {
        let cfg = QuadratureConfig::representation().with_tolerances(1e-9, 1e-9);
        let (_, pts) = vh_limit_scan(
            lam(1.0),
            &gaussian(0.3),
            &[1e-1, 1e-2, 1e-3],
            Convention::Derived,
            &cfg,
        )
        .unwrap();
        assert!(
            pts[0].gap > pts[1].gap && pts[1].gap > pts[2].gap,
            "{pts:?}"
        );
        assert!(pts[2].gap < 1e-2);
    }

    #[test]
    fn conventions_differ_unless_lambda_vanishes() {
        let a = HFunctional::new(HKind::VH, lam(0.0)).coefficients();
        let b = HFunctional::new(HKind::VH, lam(0.0))
            .with_convention(Convention::Printed)
            .coefficients();
        assert!((a.0 - b.0).norm() < 1e-15);
        let a = HFunctional::new(HKind::VH, lam(1.0)).coefficients();
        let b = HFunctional::new(HKind::VH, lam(1.0))
            .with_convention(Convention::Printed)
            .coefficients();
        assert!((a.0 - b.0).norm() > 0.1);
    }
}
