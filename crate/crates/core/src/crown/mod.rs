//! The crown `Ξ = X × X̄` of the upper half plane in the pair model
//! `P¹(C) × P¹(C) ∖ diag`, with `x₀ = (i, -i)`.

mod quadric;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;
use serde::Serialize;

pub use quadric::{
    from_quadric, mat3_apply, mat3_distance, pair_to_sym, quadratic_form, quadratic_form_real,
    quadric_action, quadric_boost, quadric_rotation, sym_to_pair, sym_to_quadric, to_quadric,
    Matrix3, QuadricPoint,
};

use crate::error::{Error, Result};
use crate::lie::{exp_lie, GroupElement, LieVector, ProjPoint};
use crate::{c, C64, I};

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairPoint {
    pub first: ProjPoint,
    pub second: ProjPoint,
}

impl PairPoint {
    pub fn new(first: ProjPoint, second: ProjPoint) -> Result<Self> {
        if first.chordal(&second) < 1e-14 {
            return Err(Error::DiagonalPoint);
        }
        Ok(Self { first, second })
    }

    pub(crate) fn new_unchecked(first: ProjPoint, second: ProjPoint) -> Self {
        Self { first, second }
    }

    pub fn finite(z1: C64, z2: C64) -> Result<Self> {
        Self::new(ProjPoint::Finite(z1), ProjPoint::Finite(z2))
    }

    /// The base point `(i, -i)`.
    pub fn base() -> Self {
        Self::new_unchecked(ProjPoint::Finite(I), ProjPoint::Finite(-I))
    }

    /// The distinguished boundary point `(1, -1)`.
    pub fn boundary_base() -> Self {
        Self::new_unchecked(
            ProjPoint::Finite(c(1.0, 0.0)),
            ProjPoint::Finite(c(-1.0, 0.0)),
        )
    }

    /// Largest chordal distance between corresponding coordinates.
    pub fn distance(&self, other: &Self) -> f64 {
        self.first
            .chordal(&other.first)
            .max(self.second.chordal(&other.second))
    }

    /// The same point with both coordinates swapped and conjugated, which
    /// stays in the crown.
    pub fn flip(&self) -> Self {
        let conj = |p: ProjPoint| match p {
            ProjPoint::Finite(z) => ProjPoint::Finite(z.conj()),
            ProjPoint::Infinity => ProjPoint::Infinity,
        };
        Self::new_unchecked(conj(self.second), conj(self.first))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// `Im first > 0` and `Im second < 0`.
pub fn crown_contains(z: &PairPoint) -> bool {
    matches!((z.first.im(), z.second.im()), (Some(a), Some(b)) if a > 0.0 && b < 0.0)
}

/// `Ξ⁺` constrains only the first coordinate and `Ξ⁻` only the second.
pub fn xi_pm_contains(z: &PairPoint, sign: Sign) -> bool {
    match sign {
        Sign::Plus => z.first.im().is_some_and(|a| a > 0.0),
        Sign::Minus => z.second.im().is_some_and(|b| b < 0.0),
    }
}

fn check_elliptic(phi: f64) -> Result<()> {
    if phi.abs() < FRAC_PI_4 {
        Ok(())
    } else {
        Err(Error::DomainError(format!(
            "|phi| = {} must be below pi/4",
            phi.abs()
        )))
    }
}

/// `g · exp(iφh) · x₀ = (g(e^{2iφ} i), g(-e^{2iφ} i))`.
pub fn elliptic_point(g: &GroupElement, phi: f64) -> Result<PairPoint> {
    check_elliptic(phi)?;
    let w = I * C64::from_polar(1.0, 2.0 * phi);
    Ok(g.act_pair(&PairPoint::new_unchecked(
        ProjPoint::Finite(w),
        ProjPoint::Finite(-w),
    )))
}

/// `g · exp(ixe) · x₀ = (g(i + ix), g(-i + ix))`.
pub fn unipotent_point(g: &GroupElement, x: f64) -> Result<PairPoint> {
    if x.abs() >= 1.0 {
        return Err(Error::DomainError(format!(
            "|x| = {} must be below 1",
            x.abs()
        )));
    }
    let p = PairPoint::new_unchecked(ProjPoint::Finite(I + I * x), ProjPoint::Finite(-I + I * x));
    Ok(g.act_pair(&p))
}

/// Outcome of matching the elliptic and unipotent orbits at angle `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitMatch {
    /// Real element with `g · n_{i sin 2φ} · x₀ = exp(iφh) · x₀`.
    pub g: GroupElement,
    /// Boost parameter in the quadric picture.
    pub r: f64,
    pub residual: f64,
    /// Set when `r` overflowed and was clamped.
    pub capped: bool,
}

const BOOST_CAP: f64 = 40.0;

/// Builds `g = k · b` from a quarter rotation and a boost in the quadric,
/// lifted back to `SL(2,R)`.
pub fn match_orbits(phi: f64) -> Result<OrbitMatch> {
    check_elliptic(phi)?;
    // exp(iφh)·x₀ sits at (cos t, 0, -i sin t) with t = -2φ
    let t = -2.0 * phi;
    let y = t.sin();
    let half_y2 = 0.5 * y * y;
    let ratio = half_y2 / (1.0 - half_y2);
    let mut r = ratio.atanh();
    let capped = !r.is_finite() || r > BOOST_CAP;
    if capped {
        r = BOOST_CAP;
    }
    let boost = exp_lie(&LieVector::H, c(0.5 * r, 0.0));
    let target = quadric_rotation(FRAC_PI_2);
    let k = [GroupElement::k(FRAC_PI_4), GroupElement::k(-FRAC_PI_4)]
        .into_iter()
        .min_by(|a, b| {
            mat3_distance(&quadric_action(a), &target)
                .total_cmp(&mat3_distance(&quadric_action(b), &target))
        })
        .expect("two candidates");
    let g = k * boost;
    let residual = orbit_residual(&g, phi);
    Ok(OrbitMatch {
        g,
        r,
        residual,
        capped,
    })
}

/// Distance between `g · n_{i sin 2φ} · x₀` and `exp(iφh) · x₀`.
pub fn orbit_residual(g: &GroupElement, phi: f64) -> f64 {
    let lhs = g.act_pair(&unipotent_base((2.0 * phi).sin()));
    let rhs = elliptic_point(&GroupElement::identity(), phi).expect("checked by caller");
    lhs.distance(&rhs)
}

fn unipotent_base(y: f64) -> PairPoint {
    PairPoint::new_unchecked(
        ProjPoint::Finite(I * (1.0 + y)),
        ProjPoint::Finite(I * (y - 1.0)),
    )
}

/// A point `[g, Y]` of `G ×_K Ω̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangentBundleCoords {
    pub g: GroupElement,
    pub y: LieVector,
}

impl TangentBundleCoords {
    pub fn new(g: GroupElement, y: LieVector) -> Result<Self> {
        if !g.is_real() {
            return Err(Error::InvalidInput(
                "tangent bundle base must be real".into(),
            ));
        }
        if !y.in_omega_hat() {
            return Err(Error::DomainError(
                "fibre element must be symmetric with spectrum in (-pi/4, pi/4)".into(),
            ));
        }
        Ok(Self { g, y })
    }
}

pub fn tangent_to_point(coords: &TangentBundleCoords) -> PairPoint {
    let e = exp_lie(&coords.y, I);
    (coords.g * e).act_pair(&PairPoint::base())
}

/// Hyperbolic distance in the upper half plane.
pub fn hyperbolic_distance(p: C64, q: C64) -> f64 {
    let arg = 1.0 + (p - q).norm_sqr() / (2.0 * p.im * q.im);
    arg.max(1.0).acosh()
}

/// Real element taking `i` to `p` and `i e^d` to `q`, where `d` is their distance.
fn frame(p: C64, q: C64) -> GroupElement {
    let h = GroupElement::n(p.re) * GroupElement::a(p.im.sqrt());
    let qq = h
        .inverse()
        .act_c(q)
        .finite()
        .expect("real maps keep the half plane");
    let cayley = (qq - I) / (qq + I);
    let theta = if cayley.norm() < 1e-300 {
        0.0
    } else {
        0.5 * cayley.arg()
    };
    h * GroupElement::k(theta)
}

/// Inverse of [`tangent_to_point`], normalised so that `Y = φh` with `φ ≥ 0`.
///
/// The angle comes from the distance between `first` and the conjugate of
/// `second`, two points of the upper half plane.
pub fn point_to_tangent(z: &PairPoint) -> Result<TangentBundleCoords> {
    if !crown_contains(z) {
        return Err(Error::NotInCrown);
    }
    let p = z.first.finite().expect("crown points are finite");
    let q = z.second.finite().expect("crown points are finite").conj();
    let d = hyperbolic_distance(p, q);
    let phi = 0.5 * ((d.cosh() - 1.0) / 2.0).sqrt().atan();
    let model_p = I * C64::from_polar(1.0, 2.0 * phi);
    let model_q = I * C64::from_polar(1.0, -2.0 * phi);
    let g = frame(p, q) * frame(model_p, model_q).inverse();
    Ok(TangentBundleCoords {
        g,
        y: LieVector::real(phi, 0.0, 0.0),
    })
}

/// Strata of the crown boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Distinguished,
    UnipotentPlus,
    UnipotentMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryClass {
    pub stratum: Stratum,
    /// For the distinguished stratum, `g` with `g · (1, -1) = z` and the zero
    /// element of the boundary cone.
    pub cone_data: Option<(GroupElement, LieVector)>,
}

fn im_or_zero(p: ProjPoint) -> f64 {
    p.im().unwrap_or(0.0)
}

pub fn boundary_classify(z: &PairPoint, tol: f64) -> Result<BoundaryClass> {
    let m1 = im_or_zero(z.first);
    let m2 = -im_or_zero(z.second);
    let lo = m1.min(m2);
    if !(lo.abs() <= tol && m1.max(m2) >= -tol) {
        return Err(Error::NotOnBoundary);
    }
    let first_real = m1.abs() <= tol;
    let second_real = m2.abs() <= tol;
    let stratum = match (first_real, second_real) {
        (true, true) => Stratum::Distinguished,
        (false, true) => Stratum::UnipotentPlus,
        (true, false) => Stratum::UnipotentMinus,
        (false, false) => return Err(Error::NotOnBoundary),
    };
    if stratum != Stratum::Distinguished {
        return Ok(BoundaryClass {
            stratum,
            cone_data: None,
        });
    }
    let q = to_quadric(z)?;
    let re = q.real_part();
    let im = q.imag_part();
    let real_size = re.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if real_size > 1e-6 || (quadratic_form_real(&im) + 1.0).abs() > 1e-6 {
        return Err(Error::NotOnBoundary);
    }
    let a = z.first.finite().map(|v| v.re);
    let b = z.second.finite().map(|v| v.re);
    Ok(BoundaryClass {
        stratum,
        cone_data: Some((boundary_frame(a, b)?, LieVector::ZERO)),
    })
}

/// Real element taking `(1, -1)` to `(a, b)` for distinct points of `P¹(R)`,
/// with `None` standing for infinity.
fn boundary_frame(a: Option<f64>, b: Option<f64>) -> Result<GroupElement> {
    let (m, scale) = match (a, b) {
        (Some(a), Some(b)) => {
            let (mid, half) = (0.5 * (a + b), 0.5 * (a - b));
            if half > 0.0 {
                ((half, mid, 0.0, 1.0), half)
            } else {
                ((mid, half, 1.0, 0.0), -half)
            }
        }
        (None, Some(b)) => ((1.0 - b, b + 1.0, -1.0, 1.0), 2.0),
        (Some(a), None) => ((a + 1.0, a - 1.0, 1.0, 1.0), 2.0),
        (None, None) => return Err(Error::DiagonalPoint),
    };
    let s = scale.sqrt();
    GroupElement::from_real(m.0 / s, m.1 / s, m.2 / s, m.3 / s)
}

/// Random real element `n_x a_t k_θ` with `|x| ≤ spread`, `|log t| ≤ spread`.
pub fn random_real_element<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> GroupElement {
    let x = rng.random_range(-spread..=spread);
    let s = rng.random_range(-spread..=spread);
    let th = rng.random_range(0.0..std::f64::consts::TAU);
    GroupElement::n(x) * GroupElement::a(s.exp()) * GroupElement::k(th)
}

/// Random crown point `g · exp(iφh) · x₀` with `|φ| ≤ phi_max`.
pub fn random_crown_point<R: Rng + ?Sized>(rng: &mut R, spread: f64, phi_max: f64) -> PairPoint {
    let g = random_real_element(rng, spread);
    let phi = rng.random_range(-phi_max..=phi_max);
    elliptic_point(&g, phi.clamp(-FRAC_PI_4 + 1e-12, FRAC_PI_4 - 1e-12)).expect("clamped")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pp(z1: C64, z2: C64) -> PairPoint {
        PairPoint::finite(z1, z2).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(crown_contains(&PairPoint::base()));
        assert!(!crown_contains(&pp(c(0.0, 2.0), c(0.0, 3.0))));
        let phi = 0.5;
        let w = I * C64::from_polar(1.0, 2.0 * phi);
        assert!(crown_contains(&pp(w, -w)));
        let z = pp(I, c(5.0, 0.0));
        assert!(xi_pm_contains(&z, Sign::Plus) && !xi_pm_contains(&z, Sign::Minus));
        assert!(xi_pm_contains(&PairPoint::base(), Sign::Plus));
        assert!(xi_pm_contains(&PairPoint::base(), Sign::Minus));
        assert!(!xi_pm_contains(&pp(-I, c(1.0, -1.0)), Sign::Plus));
        assert_eq!(PairPoint::finite(I, I), Err(Error::DiagonalPoint));
    }

    #[test]
    fn parametrisation_examples() {
        let id = GroupElement::identity();
        assert!(
            elliptic_point(&id, 0.0)
                .unwrap()
                .distance(&PairPoint::base())
                < 1e-15
        );
        let e = elliptic_point(&id, std::f64::consts::PI / 8.0).unwrap();
        let w = I * C64::from_polar(1.0, FRAC_PI_4);
        assert!(e.distance(&pp(w, -w)) < 1e-15);
        let u = unipotent_point(&id, 0.5).unwrap();
        assert!(u.distance(&pp(c(0.0, 1.5), c(0.0, -0.5))) < 1e-15);
        assert!(elliptic_point(&id, 1.0).is_err());
        assert!(unipotent_point(&id, 1.0).is_err());
    }

    #[test]
    fn orbit_matching_on_grid() {
        let m = match_orbits(0.0).unwrap();
        assert_eq!(m.r, 0.0);
        assert!(m.residual < 1e-15);
        for j in 1..50 {
            let phi = -FRAC_PI_4 + j as f64 * FRAC_PI_2 / 50.0;
            let m = match_orbits(phi).unwrap();
            assert!(m.residual < 1e-9, "phi={phi} residual={}", m.residual);
            assert!(m.g.is_real());
        }
        let edge = match_orbits(FRAC_PI_4 - 1e-12).unwrap();
        assert!(edge.r > 10.0);
    }

    #[test]
    fn tangent_examples() {
        let id = GroupElement::identity();
        let c0 = TangentBundleCoords::new(id, LieVector::ZERO).unwrap();
        assert!(tangent_to_point(&c0).distance(&PairPoint::base()) < 1e-15);
        let back = point_to_tangent(&PairPoint::base()).unwrap();
        assert!(back.y.h.norm() < 1e-12);
        let phi = 0.3;
        let c1 = TangentBundleCoords::new(id, LieVector::real(phi, 0.0, 0.0)).unwrap();
        assert!(tangent_to_point(&c1).distance(&elliptic_point(&id, phi).unwrap()) < 1e-14);
        let back = point_to_tangent(&elliptic_point(&id, phi).unwrap()).unwrap();
        assert!((back.y.h.re - phi).abs() < 1e-12);
        assert_eq!(
            point_to_tangent(&pp(c(0.0, 2.0), c(0.0, 3.0))),
            Err(Error::NotInCrown)
        );
    }

    #[test]
    fn tangent_roundtrip_many() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let z = random_crown_point(&mut rng, 2.0, 0.78);
            let t = point_to_tangent(&z).unwrap();
            assert!(t.y.in_omega_hat());
            let back = tangent_to_point(&t);
            assert!(back.distance(&z) < 1e-9, "{z:?} -> {back:?}");
        }
    }

    #[test]
    fn boundary_examples() {
        let b = boundary_classify(&PairPoint::boundary_base(), DEFAULT_BOUNDARY_TOL).unwrap();
        assert_eq!(b.stratum, Stratum::Distinguished);
        let (g, _) = b.cone_data.unwrap();
        assert!(
            g.act_pair(&PairPoint::boundary_base())
                .distance(&PairPoint::boundary_base())
                < 1e-14
        );
        let n = GroupElement::n_complex(I).act_pair(&PairPoint::base());
        assert!(n.distance(&pp(c(0.0, 2.0), c(0.0, 0.0))) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_real_element(&mut rng, 1.5);
            let z = g.act_pair(&n);
            let cls = boundary_classify(&z, DEFAULT_BOUNDARY_TOL).unwrap();
            assert_eq!(cls.stratum, Stratum::UnipotentPlus);
            let cls = boundary_classify(&z.flip(), DEFAULT_BOUNDARY_TOL).unwrap();
            assert_eq!(cls.stratum, Stratum::UnipotentMinus);
            let d = g.act_pair(&PairPoint::boundary_base());
            let cls = boundary_classify(&d, DEFAULT_BOUNDARY_TOL).unwrap();
            assert_eq!(cls.stratum, Stratum::Distinguished);
            let (h, _) = cls.cone_data.unwrap();
            assert!(h.act_pair(&PairPoint::boundary_base()).distance(&d) < 1e-9);
            let q = to_quadric(&d).unwrap();
            assert!(q.real_part().iter().all(|v| v.abs() < 1e-8));
            assert!((quadratic_form_real(&q.imag_part()) + 1.0).abs() < 1e-8);
        }
        assert_eq!(
            boundary_classify(&PairPoint::base(), DEFAULT_BOUNDARY_TOL),
            Err(Error::NotOnBoundary)
        );
    }

    #[test]
    fn gindikin_model_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let z1 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let z2 = c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let z = pp(z1, z2);
            let q = to_quadric(&z).unwrap();
            assert_eq!(q.in_crown(), crown_contains(&z), "{z:?}");
        }
    }

    proptest! {
        #[test]
        fn crown_is_g_invariant(x in -3.0f64..3.0, s in -2.0f64..2.0, th in 0.0f64..6.3,
                                z1r in -2.0f64..2.0, z1i in -2.0f64..2.0, z2r in -2.0f64..2.0, z2i in -2.0f64..2.0) {
            prop_assume!((z1r - z2r).abs() + (z1i - z2i).abs() > 1e-3);
            prop_assume!(z1i.abs() > 1e-6 && z2i.abs() > 1e-6);
            let g = GroupElement::n(x) * GroupElement::a(s.exp()) * GroupElement::k(th);
            let z = pp(c(z1r, z1i), c(z2r, z2i));
            let gz = g.act_pair(&z);
            prop_assert_eq!(crown_contains(&gz), crown_contains(&z));
        }

        #[test]
        fn quadric_roundtrip(z1r in -3.0f64..3.0, z1i in 0.05f64..3.0, z2r in -3.0f64..3.0, z2i in -3.0f64..-0.05) {
            let z = pp(c(z1r, z1i), c(z2r, z2i));
            let q = to_quadric(&z).unwrap();
            prop_assert!((q.q() - 1.0).norm() < 1e-10);
            prop_assert!(from_quadric(&q).unwrap().distance(&z) < 1e-10);
        }
    }
}
