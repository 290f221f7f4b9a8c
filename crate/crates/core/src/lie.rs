//! Matrix models of `SL(2,R)` inside `SL(2,C)`, the fixed Lie algebra basis,
//! Iwasawa-type decompositions and the symmetric-matrix model of the
//! complexified symmetric space.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::ops::Mul;

use serde::Serialize;

use crate::crown::PairPoint;
use crate::error::{Error, Result};
use crate::{c, C64, I};

const DET_TOL: f64 = 1e-12;

/// A point of the complex projective line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProjPoint {
    Finite(C64),
    Infinity,
}

impl ProjPoint {
    pub fn finite(&self) -> Option<C64> {
        match self {
            ProjPoint::Finite(z) => Some(*z),
            ProjPoint::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }

    /// Imaginary part, with `None` at infinity.
    pub fn im(&self) -> Option<f64> {
        self.finite().map(|z| z.im)
    }

    /// Chordal distance on the Riemann sphere.
    pub fn chordal(&self, other: &ProjPoint) -> f64 {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => 0.0,
            (ProjPoint::Finite(z), ProjPoint::Infinity)
            | (ProjPoint::Infinity, ProjPoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (ProjPoint::Finite(a), ProjPoint::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
            }
        }
    }
}

impl From<C64> for ProjPoint {
    fn from(z: C64) -> Self {
        ProjPoint::Finite(z)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Element of `SL(2,C)`; real elements form `SL(2,R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupElement {
    m: [[C64; 2]; 2],
}

impl GroupElement {
    /// Checked constructor; fails unless the determinant is 1.
    pub fn new(a: C64, b: C64, cc: C64, d: C64) -> Result<Self> {
        let g = Self::from_entries(a, b, cc, d);
        let det = g.det();
        if (det - 1.0).norm() > DET_TOL * (1.0 + g.max_entry().powi(2)) {
            return Err(Error::DomainError(format!("determinant {det} is not 1")));
        }
        Ok(g)
    }

    pub fn from_real(a: f64, b: f64, cc: f64, d: f64) -> Result<Self> {
        Self::new(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0))
    }

    pub(crate) fn from_entries(a: C64, b: C64, cc: C64, d: C64) -> Self {
        Self {
            m: [[a, b], [cc, d]],
        }
    }

    pub(crate) fn real_entries(a: f64, b: f64, cc: f64, d: f64) -> Self {
        Self::from_entries(c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0))
    }

    pub fn identity() -> Self {
        Self::real_entries(1.0, 0.0, 0.0, 1.0)
    }

    /// `diag(t, 1/t)`, so that `a(t)` moves `i` to `t^2 i`.
    pub fn a(t: f64) -> Self {
        Self::real_entries(t, 0.0, 0.0, 1.0 / t)
    }

    /// Complex diagonal element `diag(z, 1/z)`.
    pub fn a_complex(z: C64) -> Self {
        Self::from_entries(z, C64::new(0.0, 0.0), C64::new(0.0, 0.0), z.inv())
    }

    /// Unipotent `(1, x; 0, 1)`.
    pub fn n(x: f64) -> Self {
        Self::real_entries(1.0, x, 0.0, 1.0)
    }

    pub fn n_complex(z: C64) -> Self {
        Self::from_entries(c(1.0, 0.0), z, C64::new(0.0, 0.0), c(1.0, 0.0))
    }

    /// Lower unipotent `(1, 0; x, 1)`.
    pub fn nbar(x: f64) -> Self {
        Self::real_entries(1.0, 0.0, x, 1.0)
    }

    /// Rotation `(cos θ, sin θ; -sin θ, cos θ)`.
    pub fn k(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Self::real_entries(co, s, -s, co)
    }

    /// Complex rotation, an element of `K_C = SO(2,C)`.
    pub fn k_complex(theta: C64) -> Self {
        let (s, co) = (theta.sin(), theta.cos());
        Self::from_entries(co, s, -s, co)
    }

    /// The rotation by `π/4`, which exchanges the fixed points of `A` and `H`.
    pub fn k0() -> Self {
        Self::k(FRAC_PI_4)
    }

    /// Dilation acting by `f(x) ↦ t^{(1-iλ)/2} f(tx)` in the principal series.
    pub fn b(t: f64) -> Self {
        Self::a(t.powf(-0.5))
    }

    /// `exp(i(π/4 - ε) h)`.
    pub fn a_eps(eps: f64) -> Self {
        exp_lie(&LieVector::H, I * (FRAC_PI_4 - eps))
    }

    /// `exp(iπ/4 h)`, which conjugates `H_C` onto `K_C`.
    pub fn z_h() -> Self {
        Self::a_eps(0.0)
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.m
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    fn max_entry(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        let scale = 1.0 + self.max_entry();
        self.m
            .iter()
            .flatten()
            .all(|v| v.im.abs() < DET_TOL * scale)
    }

    /// Real parts of the entries when the element is real.
    pub fn as_real(&self) -> Option<[[f64; 2]; 2]> {
        self.is_real().then(|| {
            [
                [self.m[0][0].re, self.m[0][1].re],
                [self.m[1][0].re, self.m[1][1].re],
            ]
        })
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::from_entries(d, -b, -cc, a)
    }

    pub fn transpose(&self) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::from_entries(a, cc, b, d)
    }

    pub fn conj(&self) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::from_entries(a.conj(), b.conj(), cc.conj(), d.conj())
    }

    /// Fractional-linear action on the projective line.
    pub fn act(&self, z: ProjPoint) -> ProjPoint {
        let [[a, b], [cc, d]] = self.m;
        let (num, den) = match z {
            ProjPoint::Finite(z) => (a * z + b, cc * z + d),
            ProjPoint::Infinity => (a, cc),
        };
        if den.norm() <= 1e-300 * num.norm().max(1e-300) || den == C64::new(0.0, 0.0) {
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(num / den)
        }
    }

    pub fn act_c(&self, z: C64) -> ProjPoint {
        self.act(ProjPoint::Finite(z))
    }

    /// Diagonal action on pairs.
    pub fn act_pair(&self, z: &PairPoint) -> PairPoint {
        PairPoint::new_unchecked(self.act(z.first), self.act(z.second))
    }

    /// Operator-norm style distance used for residuals.
    pub fn distance(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance up to the sign ambiguity `±1`.
    pub fn distance_mod_sign(&self, other: &Self) -> f64 {
        self.distance(other).min(self.distance(&other.scaled(-1.0)))
    }

    fn scaled(&self, s: f64) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::from_entries(a * s, b * s, cc * s, d * s)
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, o: GroupElement) -> GroupElement {
        let a = self.m;
        let b = o.m;
        let mut r = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        GroupElement { m: r }
    }
}

/// Coefficients in the basis `h = diag(1,-1)`, `e` upper nilpotent, `f` lower nilpotent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LieVector {
    pub h: C64,
    pub e: C64,
    pub f: C64,
}

impl LieVector {
    pub const ZERO: LieVector = LieVector::real(0.0, 0.0, 0.0);
    pub const H: LieVector = LieVector::real(1.0, 0.0, 0.0);
    pub const E: LieVector = LieVector::real(0.0, 1.0, 0.0);
    pub const F: LieVector = LieVector::real(0.0, 0.0, 1.0);
    /// `u = e - f`, generating `K`.
    pub const U: LieVector = LieVector::real(0.0, 1.0, -1.0);
    /// `e + f`, generating `H`.
    pub const E_PLUS_F: LieVector = LieVector::real(0.0, 1.0, 1.0);

    pub const fn real(h: f64, e: f64, f: f64) -> Self {
        Self {
            h: C64::new(h, 0.0),
            e: C64::new(e, 0.0),
            f: C64::new(f, 0.0),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            h: self.h * s,
            e: self.e * s,
            f: self.f * s,
        }
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[self.h, self.e], [self.f, -self.h]]
    }

    fn is_real(&self) -> bool {
        [self.h, self.e, self.f]
            .iter()
            .all(|v| v.im.abs() < DET_TOL)
    }

    /// Multiples of `h` in the open segment `|c| < π/4`.
    pub fn in_omega(&self) -> bool {
        self.is_real()
            && self.e.norm() < DET_TOL
            && self.f.norm() < DET_TOL
            && self.h.re.abs() < FRAC_PI_4
    }

    /// Multiples of `e` in the open segment `|c| < 1`.
    pub fn in_lambda(&self) -> bool {
        self.is_real()
            && self.h.norm() < DET_TOL
            && self.f.norm() < DET_TOL
            && self.e.re.abs() < 1.0
    }

    /// Symmetric elements with spectrum inside `(-π/4, π/4)`.
    pub fn in_omega_hat(&self) -> bool {
        self.is_real() && (self.e - self.f).norm() < DET_TOL && self.spectral_radius() < FRAC_PI_4
    }

    /// Largest eigenvalue modulus of the matrix.
    pub fn spectral_radius(&self) -> f64 {
        (self.h * self.h + self.e * self.f).sqrt().norm()
    }

    /// Action of the nontrivial Weyl group element on `a`.
    pub fn weyl(&self) -> Self {
        Self {
            h: -self.h,
            e: self.f,
            f: self.e,
        }
    }
}

/// `exp(scale · v)` in closed form, using `X^2 = -det(X) I` for traceless `X`.
pub fn exp_lie(v: &LieVector, scale: C64) -> GroupElement {
    let x = v.scale(scale);
    let delta = x.h * x.h + x.e * x.f;
    let r = delta.sqrt();
    let (ch, shc) = if r.norm() < 1e-4 {
        let d2 = delta * delta;
        (
            1.0 + delta / 2.0 + d2 / 24.0,
            1.0 + delta / 6.0 + d2 / 120.0,
        )
    } else {
        (r.cosh(), r.sinh() / r)
    };
    GroupElement::from_entries(ch + shc * x.h, shc * x.e, shc * x.f, ch - shc * x.h)
}

/// `g · i = n_x a_t · i`, i.e. `g(i) = x + i t^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HalfPlaneDecomposition {
    pub n_part: f64,
    pub a_part: f64,
}

impl HalfPlaneDecomposition {
    pub fn reassemble(&self) -> GroupElement {
        GroupElement::n(self.n_part) * GroupElement::a(self.a_part)
    }
}

/// Real Iwasawa `NA` component of a real group element.
pub fn iwasawa_na(g: &GroupElement) -> Result<HalfPlaneDecomposition> {
    let [[a, b], [cc, d]] = g
        .as_real()
        .ok_or_else(|| Error::InvalidInput("Iwasawa decomposition needs a real element".into()))?;
    let den = cc * cc + d * d;
    let x = (a * cc + b * d) / den;
    let y = 1.0 / den;
    Ok(HalfPlaneDecomposition {
        n_part: x,
        a_part: y.sqrt(),
    })
}

/// `z = n_w a_ζ · x₀ = (w + iζ², w - iζ²)`, with `ζ` determined up to sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexNADecomposition {
    pub n_part: C64,
    /// Representative of `ζ` with argument in `(-π/2, π/2]`.
    pub a_part: C64,
    /// `ζ²`, which is free of the sign ambiguity.
    pub a_square: C64,
}

impl ComplexNADecomposition {
    pub fn reassemble(&self) -> GroupElement {
        GroupElement::n_complex(self.n_part) * GroupElement::a_complex(self.a_part)
    }

    /// Forward map back to the pair model.
    pub fn point(&self) -> PairPoint {
        PairPoint::new_unchecked(
            ProjPoint::Finite(self.n_part + I * self.a_square),
            ProjPoint::Finite(self.n_part - I * self.a_square),
        )
    }
}

/// Sign representative with argument in `(-π/2, π/2]`.
pub(crate) fn canonical_sign(z: C64) -> C64 {
    let arg = z.arg();
    if arg > std::f64::consts::FRAC_PI_2 || arg <= -std::f64::consts::FRAC_PI_2 {
        -z
    } else {
        z
    }
}

/// Complexified `N_C A_C` decomposition on the affine part of the pair model.
pub fn complex_na_decompose(z: &PairPoint) -> Result<ComplexNADecomposition> {
    let (z1, z2) = match (z.first, z.second) {
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => (a, b),
        _ => return Err(Error::PointAtInfinity),
    };
    let diff = z1 - z2;
    if diff.norm() <= 1e-14 * (1.0 + z1.norm().max(z2.norm())) {
        return Err(Error::DiagonalPoint);
    }
    let w = 0.5 * (z1 + z2);
    let sq = diff / (2.0 * I);
    Ok(ComplexNADecomposition {
        n_part: w,
        a_part: canonical_sign(sq.sqrt()),
        a_square: sq,
    })
}

/// Complex symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymMatrix(pub [[C64; 2]; 2]);

impl SymMatrix {
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (self.0[0][1] - self.0[1][0]).norm() <= tol
    }
}

/// `g ↦ g gᵀ`, identifying `G_C/K_C` with unimodular symmetric matrices.
pub fn sym_model(g: &GroupElement) -> SymMatrix {
    SymMatrix((*g * g.transpose()).entries())
}

/// The left-`K`-invariant function `tr(g gᵀ)`.
pub fn p_invariant(g: &GroupElement) -> C64 {
    sym_model(g).trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn exponential_examples() {
        assert!(exp_lie(&LieVector::ZERO, c(1.0, 0.0)).distance(&GroupElement::identity()) < 1e-15);
        let phi = 0.3;
        let g = exp_lie(&LieVector::H, I * phi);
        let e = g.entries();
        assert!(close(e[0][0], C64::from_polar(1.0, phi), 1e-15));
        assert!(close(e[1][1], C64::from_polar(1.0, -phi), 1e-15));
        let n = exp_lie(&LieVector::E, I);
        assert!(n.distance(&GroupElement::n_complex(I)) < 1e-15);
        let k = exp_lie(&LieVector::U, c(0.7, 0.0));
        assert!(k.distance(&GroupElement::k(0.7)) < 1e-14);
    }

    #[test]
    fn iwasawa_examples() {
        let d = iwasawa_na(&GroupElement::identity()).unwrap();
        assert_eq!((d.n_part, d.a_part), (0.0, 1.0));
        let d = iwasawa_na(&GroupElement::a(2.0)).unwrap();
        assert!((d.n_part).abs() < 1e-15 && (d.a_part - 2.0).abs() < 1e-15);
        assert!(iwasawa_na(&GroupElement::a_eps(0.1)).is_err());
    }

    #[test]
    fn na_decomposition_examples() {
        let x0 = PairPoint::base();
        let d = complex_na_decompose(&x0).unwrap();
        assert!(close(d.a_part, c(1.0, 0.0), 1e-15) && close(d.n_part, c(0.0, 0.0), 1e-15));
        let p = PairPoint::finite(c(3.0, 1.0), c(3.0, -1.0)).unwrap();
        let d = complex_na_decompose(&p).unwrap();
        assert!(close(d.n_part, c(3.0, 0.0), 1e-15) && close(d.a_square, c(1.0, 0.0), 1e-15));
        let inf = PairPoint::new(ProjPoint::Infinity, ProjPoint::Finite(c(0.0, -1.0))).unwrap();
        assert_eq!(complex_na_decompose(&inf), Err(Error::PointAtInfinity));
    }

    #[test]
    fn symmetric_model_examples() {
        let s = sym_model(&GroupElement::identity());
        assert!(close(s.trace(), c(2.0, 0.0), 1e-15));
        let phi = 0.4;
        let s = sym_model(&exp_lie(&LieVector::H, I * phi));
        assert!(close(s.0[0][0], C64::from_polar(1.0, 2.0 * phi), 1e-15));
        assert!(close(s.trace(), c(2.0 * (2.0 * phi).cos(), 0.0), 1e-15));
        let (a, b) = (1.3, 0.4);
        let g =
            GroupElement::from_real(a, b, 0.0, 1.0 / a).unwrap() * exp_lie(&LieVector::H, I * phi);
        let expect = c(
            (2.0 * phi).cos() * (a * a + 1.0 / (a * a) + b * b),
            (2.0 * phi).sin() * (a * a - 1.0 / (a * a) - b * b),
        );
        assert!(close(p_invariant(&g), expect, 1e-13));
    }

    #[test]
    fn checked_constructor_rejects_bad_determinant() {
        assert!(GroupElement::from_real(1.0, 1.0, 1.0, 1.0).is_err());
    }

    fn real_element() -> impl Strategy<Value = GroupElement> {
        (-3.0f64..3.0, -1.0f64..1.0, 0.0f64..6.3).prop_map(|(x, s, th)| {
            GroupElement::n(x) * GroupElement::a(s.exp()) * GroupElement::k(th)
        })
    }

    proptest! {
        #[test]
        fn one_parameter_groups(h in -1.0f64..1.0, e in -1.0f64..1.0, f in -1.0f64..1.0,
                                s in -1.0f64..1.0, t in -1.0f64..1.0, si in -1.0f64..1.0) {
            let v = LieVector::real(h, e, f);
            let (s, t) = (c(s, si), c(t, 0.3));
            let lhs = exp_lie(&v, s) * exp_lie(&v, t);
            let rhs = exp_lie(&v, s + t);
            prop_assert!(lhs.distance(&rhs) < 1e-12 * (1.0 + rhs.max_entry()));
            prop_assert!(close(rhs.det(), c(1.0, 0.0), 1e-12 * (1.0 + rhs.max_entry().powi(2))));
        }

        #[test]
        fn na_roundtrip(w in -5.0f64..5.0, wi in -5.0f64..5.0, zr in 0.1f64..4.0, za in -3.1f64..3.1) {
            let d = ComplexNADecomposition {
                n_part: c(w, wi),
                a_part: canonical_sign(C64::from_polar(zr, za)),
                a_square: C64::from_polar(zr, za).powu(2),
            };
            let back = complex_na_decompose(&d.point()).unwrap();
            prop_assert!(back.reassemble().distance_mod_sign(&d.reassemble()) < 1e-12 * (1.0 + zr + 1.0 / zr) * (1.0 + w.abs() + wi.abs()));
        }

        #[test]
        fn iwasawa_reassembles(g in real_element()) {
            let d = iwasawa_na(&g).unwrap();
            let lhs = d.reassemble().act_c(I).finite().unwrap();
            let rhs = g.act_c(I).finite().unwrap();
            prop_assert!(close(lhs, rhs, 1e-12 * (1.0 + rhs.norm())));
        }

        #[test]
        fn p_is_bi_invariant(g in real_element(), th in 0.0f64..6.3, kr in -1.0f64..1.0, ki in -0.5f64..0.5) {
            let k = GroupElement::k(th);
            let kc = GroupElement::k_complex(c(kr, ki));
            let gc = g * exp_lie(&LieVector::H, I * 0.3);
            let lhs = p_invariant(&(k * gc));
            let rhs = p_invariant(&(gc * kc));
            prop_assert!(close(lhs, rhs, 1e-12 * (1.0 + lhs.norm())));
        }
    }
}
