//! Fourier-coefficient bounds for functions holomorphic on a horizontal
//! strip, chained into the sup-norm decay estimate for cusp forms.
//!
//! No automorphic forms are computed here; the sup bound on the continued
//! orbit is an input ([`SupBoundModel`]) and the chain is exercised on
//! synthetic periodic strip functions.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::trapezoid_periodic;
use crate::{par, C64, I};

/// Trapezoid points on the shifted contour.
pub const CONTOUR_POINTS: usize = 1 << 12;

/// `B(ε) = C √|log ε|`, the assumed sup of a cusp form on the orbit
/// through `n_{i(1-ε)} x₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupBoundModel {
    pub c: f64,
}

impl SupBoundModel {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bound constant must be positive, got {c}"
            )));
        }
        Ok(Self { c })
    }

    pub fn scaled(self, s: f64) -> Result<Self> {
        Self::new(self.c * s)
    }

    pub fn value(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        Ok(self.c * eps.ln().abs().sqrt())
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!(
            "eps = {eps} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// A 1-periodic function holomorphic on `|Im w| < strip`.
#[derive(Clone)]
pub struct PeriodicStripFunction {
    eval: Arc<dyn Fn(C64) -> C64 + Send + Sync>,
    strip: f64,
    label: String,
}

impl fmt::Debug for PeriodicStripFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicStripFunction")
            .field("label", &self.label)
            .field("strip", &self.strip)
            .finish()
    }
}

impl PeriodicStripFunction {
    pub fn new(
        label: impl Into<String>,
        strip: f64,
        eval: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(strip > 0.0) {
            return Err(Error::InvalidInput(format!(
                "strip half-width must be positive, got {strip}"
            )));
        }
        Ok(Self {
            eval: Arc::new(eval),
            strip,
            label: label.into(),
        })
    }

    /// `Σ A_n e^{2πinw}` over finitely many modes, entire.
    pub fn from_modes(
        label: impl Into<String>,
        strip: f64,
        modes: Vec<(i64, C64)>,
    ) -> Result<Self> {
        Self::new(label, strip, move |w| {
            modes
                .iter()
                .map(|(n, a)| a * (TAU * I * (*n as f64) * w).exp())
                .sum()
        })
    }

    /// `A_n = e^{-2π|n|y}` for `1 ≤ |n| ≤ modes`, the decay the bound chain
    /// predicts at height `y`.
    pub fn saturating(y: f64, modes: i64) -> Result<Self> {
        let coeffs = (1..=modes)
            .flat_map(|n| [n, -n])
            .map(|n| (n, C64::from((-TAU * n.abs() as f64 * y).exp())))
            .collect();
        Self::from_modes(format!("saturating(y={y})"), y, coeffs)
    }

    pub fn eval(&self, w: C64) -> C64 {
        (self.eval)(w)
    }

    pub fn strip(&self) -> f64 {
        self.strip
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max |F(w + 1) - F(w)|` over the given points.
    pub fn period_defect(&self, points: &[C64]) -> f64 {
        points
            .iter()
            .map(|w| (self.eval(w + 1.0) - self.eval(*w)).norm())
            .fold(0.0, f64::max)
    }
}

/// `t_ε = ½ arcsin(1 - ε)`, so that `sin 2t_ε = 1 - ε`.
pub fn eps_to_t(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::DomainError(format!(
            "eps = {eps} must lie in (0, 1]"
        )));
    }
    Ok(0.5 * (1.0 - eps).asin())
}

/// `(π/4 - t_ε) / √ε`, which tends to `√2/2`.
pub fn eps_to_t_constant(eps: f64) -> Result<f64> {
    Ok((FRAC_PI_4 - eps_to_t(eps)?) / eps.sqrt())
}

/// `A_n = e^{-2π|n|(1-ε)y} ∫_0^1 F(u ∓ i(1-ε)y) e^{-2πinu} du`, the contour
/// moved towards the side where the mode decays.
pub fn fourier_coeff(f: &PeriodicStripFunction, n: i64, y: f64, eps: f64) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "the constant term is not extracted".into(),
        ));
    }
    if !(y > 0.0) || !(0.0..=1.0).contains(&eps) {
        return Err(Error::DomainError(format!(
            "need y > 0 and eps in [0, 1], got y = {y}, eps = {eps}"
        )));
    }
    let shift = (1.0 - eps) * y;
    if shift >= f.strip() {
        return Err(Error::StripExceeded {
            shift,
            strip: f.strip(),
        });
    }
    let nf = n as f64;
    let dir = -(n.signum() as f64) * shift;
    let integral = trapezoid_periodic(
        |u| f.eval(C64::new(u, dir)) * (-TAU * I * nf * u).exp(),
        0.0,
        1.0,
        CONTOUR_POINTS,
    );
    Ok(integral * (-TAU * nf.abs() * shift).exp())
}

/// `C e^{-2π|n|y(1-ε)} √|log ε|`.
pub fn coeff_bound(n: i64, y: f64, eps: f64, b: &SupBoundModel) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be non-zero".into()));
    }
    Ok((-TAU * n.abs() as f64 * y * (1.0 - eps)).exp() * b.value(eps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupDecay {
    pub y: f64,
    /// `Σ_{n≠0} e^{-2π|n|(y-1)}`
    pub geometric_sum: f64,
    /// `C √(log y) Σ_{n≠0} e^{-2π|n|(y-1)}`
    pub value: f64,
    /// `value / (√(log y) e^{-2πy})`
    pub constant: f64,
}

/// The coefficient bounds at `ε = 1/y` summed over `n ≠ 0` in closed form.
pub fn sup_decay_bound(y: f64, b: &SupBoundModel) -> Result<SupDecay> {
    if !(y > 2.0) || !y.is_finite() {
        return Err(Error::DomainError(format!("y = {y} must exceed 2")));
    }
    let g = (-TAU * (y - 1.0)).exp();
    let geometric_sum = 2.0 * g / (1.0 - g);
    let value = b.c * y.ln().sqrt() * geometric_sum;
    Ok(SupDecay {
        y,
        geometric_sum,
        value,
        constant: value / (y.ln().sqrt() * (-TAU * y).exp()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffRow {
    pub n: i64,
    pub abs_coeff: f64,
    /// Roundoff floor of the extraction.
    pub noise: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub label: String,
    pub y: f64,
    pub eps: f64,
    /// Median of `|A_n| e^{2π|n|y}` over resolved modes; the bound constant
    /// is multiplied by it.
    pub fit: f64,
    pub rows: Vec<CoeffRow>,
    /// `Σ |A_n|`, which dominates `|F(0)|`.
    pub coeff_sum: f64,
    pub f0: f64,
    pub sup_bound: f64,
    pub pass: bool,
}

/// Extracts `A_n(y)` for `1 ≤ |n| ≤ modes` at `ε = 1/y`, fits one constant
/// against the `e^{-2π|n|y}` shape, and checks every coefficient bound and
/// the sup bound with the fitted constant.
pub fn pipeline_demo(
    f: &PeriodicStripFunction,
    y: f64,
    b: &SupBoundModel,
    modes: i64,
) -> Result<PipelineReport> {
    if modes < 1 {
        return Err(Error::InvalidInput("need at least one mode".into()));
    }
    let eps = 1.0 / y;
    sup_decay_bound(y, b)?;
    let ns: Vec<i64> = (1..=modes).flat_map(|n| [n, -n]).collect();
    let coeffs = par::try_map(&ns, |&n| fourier_coeff(f, n, y, eps))?;
    let shift = (1.0 - eps) * y;
    let contour_max = [shift, -shift]
        .iter()
        .flat_map(|&v| (0..64).map(move |k| C64::new(k as f64 / 64.0, v)))
        .map(|w| f.eval(w).norm())
        .fold(0.0, f64::max);
    let noise = |n: i64| 1e-14 * contour_max * (-TAU * n.abs() as f64 * shift).exp();
    let mut ratios: Vec<f64> = ns
        .iter()
        .zip(&coeffs)
        .filter(|(n, a)| a.norm() > 100.0 * noise(**n))
        .map(|(n, a)| a.norm() * (TAU * n.abs() as f64 * y).exp())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let fit = match ratios.len() {
        0 => 1.0,
        k if k % 2 == 1 => ratios[k / 2],
        k => (ratios[k / 2 - 1] * ratios[k / 2]).sqrt(),
    };
    let model = b.scaled(fit)?;
    let rows = ns
        .iter()
        .zip(&coeffs)
        .map(|(&n, a)| -> Result<CoeffRow> {
            let bound = coeff_bound(n, y, eps, &model)?;
            Ok(CoeffRow {
                n,
                abs_coeff: a.norm(),
                noise: noise(n),
                bound,
                pass: a.norm() <= bound + noise(n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let coeff_sum: f64 = rows.iter().map(|r| r.abs_coeff).sum();
    let f0 = f.eval(C64::new(0.0, 0.0)).norm();
    let sup_bound = sup_decay_bound(y, &model)?.value;
    let pass = rows.iter().all(|r| r.pass) && f0 <= sup_bound * (1.0 + 1e-12);
    Ok(PipelineReport {
        label: f.label().to_string(),
        y,
        eps,
        fit,
        rows,
        coeff_sum,
        f0,
        sup_bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit() -> SupBoundModel {
        SupBoundModel::new(1.0).unwrap()
    }

    #[test]
    fn t_eps_examples() {
        assert_eq!(eps_to_t(1.0).unwrap(), 0.0);
        let e = 1.0 - (PI / 3.0).sin();
        assert!((eps_to_t(e).unwrap() - PI / 6.0).abs() < 1e-15);
        assert!(eps_to_t(0.0).is_err() && eps_to_t(1.5).is_err());
        for eps in [1e-4, 1e-6, 1e-8] {
            let k = eps_to_t_constant(eps).unwrap();
            assert!(
                (k - 0.5 * 2f64.sqrt()).abs() < 2.0 * eps.sqrt(),
                "{eps}: {k}"
            );
        }
    }

    proptest! {
        #[test]
        fn t_eps_inverts_sine(eps in 1e-9f64..1.0) {
            let t = eps_to_t(eps).unwrap();
            prop_assert!(((2.0 * t).sin() - (1.0 - eps)).abs() < 1e-15);
            prop_assert!(eps_to_t(eps * 0.9).unwrap() > t);
        }
    }

    #[test]
    fn single_mode_and_orthogonality() {
        let f = PeriodicStripFunction::from_modes("e1", 4.0, vec![(1, c(1.0, 0.0))]).unwrap();
        for (y, eps) in [(3.0, 0.1), (2.0, 0.5), (3.9, 0.0)] {
            assert!((fourier_coeff(&f, 1, y, eps).unwrap() - 1.0).norm() < 1e-10);
            assert!(fourier_coeff(&f, 2, y, eps).unwrap().norm() < 1e-10);
            assert!(fourier_coeff(&f, -1, y, eps).unwrap().norm() < 1e-10);
        }
        assert_eq!(
            fourier_coeff(&f, 1, 5.0, 0.1),
            Err(Error::StripExceeded {
                shift: 4.5,
                strip: 4.0
            })
        );
    }

    #[test]
    fn contour_independence() {
        let f = PeriodicStripFunction::from_modes(
            "two",
            3.0,
            vec![(2, c(0.3, -1.0)), (-3, c(2.0, 0.5))],
        )
        .unwrap();
        for n in [2, -3, 1] {
            let a = fourier_coeff(&f, n, 2.5, 0.2).unwrap();
            let b = fourier_coeff(&f, n, 2.5, 0.7).unwrap();
            assert!((a - b).norm() < 1e-9, "{n}: {a} vs {b}");
        }
        // a non-polynomial strip function: 1 / (cosh(2π·2) - cos 2πw)
        let g = PeriodicStripFunction::new("pole", 2.0, |w: C64| {
            1.0 / ((TAU * 2.0).cosh() - (TAU * w).cos())
        })
        .unwrap();
        assert!(g.period_defect(&[c(0.1, 0.3), c(-0.7, -1.2)]) < 1e-12);
        for n in [1, -2, 4] {
            let a = fourier_coeff(&g, n, 1.9, 0.3).unwrap();
            let b = fourier_coeff(&g, n, 1.9, 0.9).unwrap();
            assert!(
                (a - b).norm() < 1e-9 * a.norm().max(1e-12),
                "{n}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn bound_formula() {
        let v = coeff_bound(1, 2.0, 0.5, &unit()).unwrap();
        assert!((v - (-TAU).exp() * 2f64.ln().sqrt()).abs() < 1e-16);
        for y in [2.5, 4.0, 9.0] {
            for n in [1i64, -2, 5] {
                let spec = coeff_bound(n, y, 1.0 / y, &unit()).unwrap();
                let closed = (-TAU * n.abs() as f64 * (y - 1.0)).exp() * y.ln().sqrt();
                assert!((spec - closed).abs() <= 1e-14 * closed);
            }
            assert!(
                coeff_bound(3, y, 0.3, &unit()).unwrap() < coeff_bound(2, y, 0.3, &unit()).unwrap()
            );
        }
        assert!(coeff_bound(1, 2.0, 1.0, &unit()).is_err());
    }

    #[test]
    fn sup_decay() {
        let s = sup_decay_bound(2.0 + 1e-12, &unit()).unwrap();
        let g = (-TAU).exp();
        assert!((0.5 * s.geometric_sum - g / (1.0 - g)).abs() < 1e-12);
        assert!(sup_decay_bound(2.0, &unit()).is_err());
        let cs: Vec<f64> = (0..=15)
            .map(|k| {
                sup_decay_bound(2.5 + 0.5 * k as f64, &unit())
                    .unwrap()
                    .constant
            })
            .collect();
        let (lo, hi) = cs
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
        assert!(
            hi / lo < 1.01
                && hi <= 2.0 * TAU.exp() / (1.0 - (-TAU).exp()) * (1.0 + 1e-12)
                && lo >= 2.0 * TAU.exp() * (1.0 - 1e-12)
        );
        for y in [3.0, 5.0, 8.0] {
            let sum: f64 = (1..200)
                .flat_map(|n| [n, -n])
                .map(|n| coeff_bound(n, y, 1.0 / y, &unit()).unwrap())
                .sum();
            let closed = sup_decay_bound(y, &unit()).unwrap().value;
            assert!(sum <= closed * (1.0 + 1e-12) && (sum - closed).abs() < 1e-12 * closed);
        }
    }

    #[test]
    fn pipeline_examples() {
        let y = 3.0;
        let r = pipeline_demo(
            &PeriodicStripFunction::saturating(y, 4).unwrap(),
            y,
            &unit(),
            4,
        )
        .unwrap();
        assert!(r.pass && (r.fit - 1.0).abs() < 1e-6, "{r:?}");
        let single =
            PeriodicStripFunction::from_modes("single", y, vec![(1, c(1.0, 0.0))]).unwrap();
        assert!(pipeline_demo(&single, y, &unit(), 4).unwrap().pass);
        let mut modes: Vec<(i64, C64)> = (2..=4i64)
            .flat_map(|n| [n, -n])
            .map(|n| (n, C64::from((-TAU * n.abs() as f64 * y).exp())))
            .collect();
        modes.extend([(1, c(1.0, 0.0)), (-1, C64::from((-TAU * y).exp()))]);
        let bad = PeriodicStripFunction::from_modes("violating", y, modes).unwrap();
        let r = pipeline_demo(&bad, y, &unit(), 4).unwrap();
        assert!(!r.pass);
        assert!(!r.rows.iter().find(|row| row.n == 1).unwrap().pass);
    }
}
