#![allow(clippy::needless_range_loop)]

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::C64;

pub const MAX_ORDER: usize = 6;
const N: usize = MAX_ORDER + 1;

/// Truncated Taylor expansion `sum c_k (x - x0)^k` with complex coefficients.
///
/// Arithmetic propagates derivatives exactly up to `order`, which lets a
/// function written once in jet arithmetic yield both values and
/// derivatives, and compose with changes of variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [C64; N],
    order: usize,
}

const ZERO: C64 = C64::new(0.0, 0.0);

impl Jet {
    pub fn constant(v: C64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [ZERO; N];
        c[0] = v;
        Self { c, order }
    }

    /// The identity function expanded at `x0`.
    pub fn var(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(C64::new(x0, 0.0), order);
        if order >= 1 {
            j.c[1] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(coeffs: &[C64]) -> Self {
        let order = coeffs.len().saturating_sub(1);
        let mut j = Self::constant(ZERO, order);
        j.c[..coeffs.len()].copy_from_slice(coeffs);
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.c[k]
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> C64 {
        assert!(k <= self.order);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.c[k] * fact
    }

    /// Jet of the derivative, one order lower.
    pub fn diff(&self) -> Self {
        let order = self.order.saturating_sub(1);
        let mut c = [ZERO; N];
        for k in 0..self.order {
            c[k] = self.c[k + 1] * (k + 1) as f64;
        }
        Self { c, order }
    }

    fn same(&self, o: &Self) -> usize {
        self.order.min(o.order)
    }

    pub fn scale(mut self, s: C64) -> Self {
        for v in &mut self.c[..=self.order] {
            *v *= s;
        }
        self
    }

    pub fn recip(&self) -> Self {
        let mut r = [ZERO; N];
        r[0] = self.c[0].inv();
        for k in 1..=self.order {
            let s: C64 = (1..=k).map(|j| self.c[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Self {
            c: r,
            order: self.order,
        }
    }

    pub fn exp(&self) -> Self {
        let mut e = [ZERO; N];
        e[0] = self.c[0].exp();
        for k in 1..=self.order {
            let s: C64 = (1..=k).map(|j| self.c[j] * e[k - j] * j as f64).sum();
            e[k] = s / k as f64;
        }
        Self {
            c: e,
            order: self.order,
        }
    }

    /// Principal logarithm; the caller keeps the expansion point off the cut.
    pub fn ln(&self) -> Self {
        let mut l = [ZERO; N];
        l[0] = self.c[0].ln();
        for k in 1..=self.order {
            let s: C64 = (1..k).map(|j| l[j] * self.c[k - j] * j as f64).sum();
            l[k] = (self.c[k] - s / k as f64) / self.c[0];
        }
        Self {
            c: l,
            order: self.order,
        }
    }

    /// Principal power `self^a`.
    pub fn powc(&self, a: C64) -> Self {
        self.ln().scale(a).exp()
    }

    pub fn powf(&self, a: f64) -> Self {
        self.powc(C64::new(a, 0.0))
    }

    /// `|self|` for a jet that is real along the real line and nonzero at
    /// the expansion point.
    pub fn abs_real(&self) -> Self {
        if self.c[0].re < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn conj(mut self) -> Self {
        for v in &mut self.c[..=self.order] {
            *v = v.conj();
        }
        self
    }

    /// Treats `self` as the Taylor series of `f` at `inner.value()` and
    /// returns the jet of `f ∘ inner`.
    pub fn compose(&self, inner: &Jet) -> Self {
        let order = self.same(inner);
        let mut delta = *inner;
        delta.c[0] = ZERO;
        delta.order = order;
        let mut acc = Self::constant(self.c[order], order);
        for k in (0..order).rev() {
            acc = acc * delta + self.c[k];
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.c[..=self.order]
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.same(&o);
        let mut c = [ZERO; N];
        for k in 0..=order {
            c[k] = self.c[k] + o.c[k];
        }
        Jet { c, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.same(&o);
        let mut c = [ZERO; N];
        for k in 0..=order {
            c[k] = (0..=k).map(|j| self.c[j] * o.c[k - j]).sum();
        }
        Jet { c, order }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<C64> for Jet {
    type Output = Jet;
    fn add(mut self, v: C64) -> Jet {
        self.c[0] += v;
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, v: f64) -> Jet {
        self + C64::new(v, 0.0)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, v: f64) -> Jet {
        self + C64::new(-v, 0.0)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, v: C64) -> Jet {
        self.scale(v)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, v: f64) -> Jet {
        self.scale(C64::new(v, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn derivatives_of_exp_sin_like() {
        let x = Jet::var(0.3, 4);
        let e = (x * C64::new(0.0, 1.0)).exp();
        for k in 0..=4 {
            let expect = C64::new(0.0, 1.0).powu(k as u32) * C64::new(0.0, 0.3).exp();
            assert!(close(e.derivative(k), expect, 1e-13), "k={k}");
        }
    }

    #[test]
    fn power_rule() {
        let x = Jet::var(2.0, 3);
        let p = (x * x + 1.0).powf(-0.5);
        // d/dx (1+x^2)^{-1/2} = -x (1+x^2)^{-3/2}
        let d1 = -2.0 * 5f64.powf(-1.5);
        assert!(close(p.derivative(1), C64::new(d1, 0.0), 1e-13));
    }

    #[test]
    fn composition_is_chain_rule() {
        let x0 = 0.4;
        let inner = (Jet::var(x0, 5) * 2.0 + 1.0).recip();
        let y0 = inner.value().re;
        let outer = Jet::var(y0, 5).exp();
        let direct = inner.exp();
        let composed = outer.compose(&inner);
        for k in 0..=5 {
            assert!(close(composed.coeff(k), direct.coeff(k), 1e-12), "k={k}");
        }
    }

    proptest! {
        #[test]
        fn ln_inverts_exp(a in -2.0f64..2.0, b in -1.0f64..1.0, x0 in -1.0f64..1.0) {
            let x = Jet::var(x0, 6);
            let j = x * C64::new(a, b) + 0.5;
            let back = j.exp().ln();
            for k in 0..=6 {
                prop_assert!(close(back.coeff(k), j.coeff(k), 1e-10));
            }
        }

        #[test]
        fn product_rule(x0 in -2.0f64..2.0) {
            let x = Jet::var(x0, 5);
            let f = (x * x + 2.0).recip();
            let g = x.exp();
            let fg = f * g;
            let lhs = fg.derivative(1);
            let rhs = f.derivative(1) * g.value() + f.value() * g.derivative(1);
            prop_assert!(close(lhs, rhs, 1e-12));
            prop_assert!(close((f / f).value(), C64::new(1.0, 0.0), 1e-14));
        }
    }
}
