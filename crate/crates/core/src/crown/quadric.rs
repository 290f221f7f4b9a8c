//! The crown inside the complex quadric `z0² - z1² - z2² = 1`.

use serde::Serialize;

use super::PairPoint;
use crate::error::{Error, Result};
use crate::lie::{GroupElement, ProjPoint, SymMatrix};
use crate::{C64, I};

const DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadricPoint(pub [C64; 3]);

pub fn quadratic_form(z: &[C64; 3]) -> C64 {
    z[0] * z[0] - z[1] * z[1] - z[2] * z[2]
}

pub fn quadratic_form_real(x: &[f64; 3]) -> f64 {
    x[0] * x[0] - x[1] * x[1] - x[2] * x[2]
}

impl QuadricPoint {
    pub fn base() -> Self {
        QuadricPoint([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)])
    }

    pub fn q(&self) -> C64 {
        quadratic_form(&self.0)
    }

    pub fn real_part(&self) -> [f64; 3] {
        [self.0[0].re, self.0[1].re, self.0[2].re]
    }

    pub fn imag_part(&self) -> [f64; 3] {
        [self.0[0].im, self.0[1].im, self.0[2].im]
    }

    /// Membership in the crown: `Re z0 > 0` and `Q(Re z) > 0`.
    pub fn in_crown(&self) -> bool {
        let x = self.real_part();
        x[0] > 0.0 && quadratic_form_real(&x) > 0.0
    }

    fn check(self) -> Result<Self> {
        let drift = (self.q() - 1.0).norm();
        if drift > DRIFT_TOL * (1.0 + self.0.iter().map(|v| v.norm_sqr()).sum::<f64>()) {
            return Err(Error::NumericalDrift { drift });
        }
        Ok(self)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Linear identification of unimodular symmetric matrices with the quadric.
/// The base matrix `1` goes to `(1, 0, 0)` and the determinant becomes `Q`.
pub fn sym_to_quadric(s: &SymMatrix) -> QuadricPoint {
    let m = s.0;
    QuadricPoint([
        0.5 * (m[0][0] + m[1][1]),
        -m[0][1],
        0.5 * (m[0][0] - m[1][1]),
    ])
}

pub fn quadric_to_sym(q: &QuadricPoint) -> SymMatrix {
    let [z0, z1, z2] = q.0;
    SymMatrix([[z0 + z2, -z1], [-z1, z0 - z2]])
}

/// The symmetric matrix `g gᵀ` of any `g` with `g · x₀ = z`.
pub fn pair_to_sym(z: &PairPoint) -> Result<SymMatrix> {
    let zero = C64::new(0.0, 0.0);
    match (z.first, z.second) {
        (ProjPoint::Finite(z1), ProjPoint::Finite(z2)) => {
            let d = z1 - z2;
            if d.norm() == 0.0 {
                return Err(Error::DiagonalPoint);
            }
            let inv_sq = 2.0 * I / d;
            let w = 0.5 * (z1 + z2);
            Ok(SymMatrix([
                [z1 * z2 * inv_sq, w * inv_sq],
                [w * inv_sq, inv_sq],
            ]))
        }
        (ProjPoint::Infinity, ProjPoint::Finite(z2)) => {
            Ok(SymMatrix([[2.0 * I * z2, I], [I, zero]]))
        }
        (ProjPoint::Finite(z1), ProjPoint::Infinity) => {
            Ok(SymMatrix([[-2.0 * I * z1, -I], [-I, zero]]))
        }
        (ProjPoint::Infinity, ProjPoint::Infinity) => Err(Error::DiagonalPoint),
    }
}

pub fn sym_to_pair(s: &SymMatrix) -> Result<PairPoint> {
    let m = s.0;
    let scale = 1.0 + m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if m[1][1].norm() <= 1e-13 * scale {
        if (m[0][1] - I).norm() <= 1e-8 * scale {
            return PairPoint::new(ProjPoint::Infinity, ProjPoint::Finite(m[0][0] / (2.0 * I)));
        }
        if (m[0][1] + I).norm() <= 1e-8 * scale {
            return PairPoint::new(ProjPoint::Finite(m[0][0] / (-2.0 * I)), ProjPoint::Infinity);
        }
        return Err(Error::NumericalDrift {
            drift: (s.det() - 1.0).norm(),
        });
    }
    let w = m[0][1] / m[1][1];
    let r = I / m[1][1];
    PairPoint::new(ProjPoint::Finite(w + r), ProjPoint::Finite(w - r))
}

pub fn to_quadric(z: &PairPoint) -> Result<QuadricPoint> {
    sym_to_quadric(&pair_to_sym(z)?).check()
}

pub fn from_quadric(q: &QuadricPoint) -> Result<PairPoint> {
    sym_to_pair(&quadric_to_sym(&q.check()?))
}

pub type Matrix3 = [[C64; 3]; 3];

/// The 3×3 matrix by which `g` acts on the quadric, `S ↦ g S gᵀ`.
pub fn quadric_action(g: &GroupElement) -> Matrix3 {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let basis = [[one, zero, zero], [zero, one, zero], [zero, zero, one]];
    let mut out = [[zero; 3]; 3];
    for (j, e) in basis.iter().enumerate() {
        let s = quadric_to_sym(&QuadricPoint(*e)).0;
        let gm = g.entries();
        let gs = mat2_mul(&gm, &s);
        let gt = [[gm[0][0], gm[1][0]], [gm[0][1], gm[1][1]]];
        let img = sym_to_quadric(&SymMatrix(mat2_mul(&gs, &gt)));
        for (i, row) in out.iter_mut().enumerate() {
            row[j] = img.0[i];
        }
    }
    out
}

fn mat2_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn mat3_apply(m: &Matrix3, v: &[C64; 3]) -> [C64; 3] {
    let mut r = [C64::new(0.0, 0.0); 3];
    for i in 0..3 {
        r[i] = (0..3).map(|j| m[i][j] * v[j]).sum();
    }
    r
}

pub fn mat3_distance(a: &Matrix3, b: &Matrix3) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Rotation of the last two coordinates.
pub fn quadric_rotation(theta: f64) -> Matrix3 {
    let (s, c) = theta.sin_cos();
    let r = |v: f64| C64::new(v, 0.0);
    [
        [r(1.0), r(0.0), r(0.0)],
        [r(0.0), r(c), r(s)],
        [r(0.0), r(-s), r(c)],
    ]
}

/// Hyperbolic boost mixing the first and last coordinates.
pub fn quadric_boost(r: f64) -> Matrix3 {
    let (ch, sh) = (r.cosh(), r.sinh());
    let z = C64::new(0.0, 0.0);
    [
        [C64::new(ch, 0.0), z, C64::new(sh, 0.0)],
        [z, C64::new(1.0, 0.0), z],
        [C64::new(sh, 0.0), z, C64::new(ch, 0.0)],
    ]
}
