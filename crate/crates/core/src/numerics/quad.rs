use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Interior points where the integrand may be singular or sharply peaked.
    /// They become breakpoints and are never sampled.
    pub singularity_hints: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::geometry()
    }
}

impl QuadratureConfig {
    pub fn geometry() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            singularity_hints: Vec::new(),
        }
    }

    /// Looser defaults for oscillatory integrals over the line.
    pub fn representation() -> Self {
        Self {
            abs_tol: 1e-7,
            rel_tol: 1e-9,
            max_subdivisions: 4000,
            singularity_hints: Vec::new(),
        }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_hints(mut self, hints: impl IntoIterator<Item = f64>) -> Self {
        self.singularity_hints.extend(hints);
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

impl Estimate {
    pub fn re(&self) -> f64 {
        self.value.re
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Maps the unit-free parameter of a piece to the real line.
#[derive(Debug, Clone, Copy)]
enum Piece {
    /// x = start + len t
    Finite(f64, f64),
    /// x = lo + t/(1-t) on t in [0,1)
    Upper(f64),
    /// x = hi - (1-t)/t on t in (0,1]
    Lower(f64),
}

impl Piece {
    /// Composes the piece map with `t = u^2 (3 - 2u)`, whose vanishing
    /// derivative at both ends tames algebraic endpoint singularities.
    #[inline]
    fn map(self, u: f64) -> (f64, f64) {
        let (x, jac) = self.map_raw(u * u * (3.0 - 2.0 * u));
        (x, jac * 6.0 * u * (1.0 - u))
    }

    #[inline]
    fn map_raw(self, t: f64) -> (f64, f64) {
        match self {
            Piece::Finite(start, len) => (start + len * t, len),
            Piece::Upper(lo) => {
                let s = 1.0 - t;
                (lo + t / s, 1.0 / (s * s))
            }
            Piece::Lower(hi) => (hi - (1.0 - t) / t, 1.0 / (t * t)),
        }
    }
}

struct Segment {
    piece: Piece,
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> C64>(f: &F, piece: Piece, a: f64, b: f64) -> Result<(C64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<C64> {
        let (x, jac) = piece.map(t);
        let v = f(x) * jac;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidIntegrand { at: x })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = C64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [C64::new(0.0, 0.0); 10];
    let mut fv2 = [C64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            res_g += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let err = ((res_k - res_g) * half).norm();
    let ah = half.abs();
    Ok((res_k * half, rescale_error(err, res_abs * ah, res_asc * ah)))
}

/// `[a, breaks…, b]` sorted, with breakpoints closer than a relative `1e-9`
/// to a neighbour dropped so that no segment is narrower than the rule
/// can resolve.
fn merge_breakpoints(a: f64, b: f64, mut breaks: Vec<f64>) -> Vec<f64> {
    breaks.sort_by(f64::total_cmp);
    let close = |x: f64, y: f64| {
        x.is_finite() && y.is_finite() && (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
    };
    let mut points = vec![a];
    for x in breaks {
        if !close(*points.last().unwrap(), x) {
            points.push(x);
        }
    }
    while points.len() > 1 && close(*points.last().unwrap(), b) {
        points.pop();
    }
    points.push(b);
    points
}

/// Adaptive 21-point Gauss–Kronrod quadrature of a complex integrand over
/// `[a, b]`; either bound may be infinite.
///
/// Hints inside `(a, b)` split the range. Infinite pieces are mapped onto
/// the unit interval, so integrands only need to be integrable, not
/// compactly supported.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> C64,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidInput("NaN integration bound".into()));
    }
    if a == b {
        return Ok(Estimate {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
            subdivisions: 0,
        });
    }
    if a > b {
        let mut e = integrate(f, b, a, cfg)?;
        e.value = -e.value;
        return Ok(e);
    }

    let mut breaks: Vec<f64> = cfg
        .singularity_hints
        .iter()
        .copied()
        .filter(|h| h.is_finite() && *h > a && *h < b)
        .collect();
    if a.is_infinite() && b.is_infinite() && breaks.is_empty() {
        breaks.push(0.0);
    }
    let points = merge_breakpoints(a, b, breaks);

    let mut heap = BinaryHeap::new();
    let mut settled: Vec<Segment> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let piece = if lo.is_finite() && hi.is_finite() {
            Piece::Finite(lo, hi - lo)
        } else if lo.is_finite() {
            Piece::Upper(lo)
        } else {
            Piece::Lower(hi)
        };
        let (ta, tb) = (0.0, 1.0);
        let (value, error) = gk21(&f, piece, ta, tb)?;
        evaluations += 21;
        heap.push(Segment {
            piece,
            a: ta,
            b: tb,
            value,
            error,
        });
    }

    let mut subdivisions = 0usize;
    loop {
        let total: C64 = heap.iter().chain(settled.iter()).map(|s| s.value).sum();
        let err: f64 = heap.iter().chain(settled.iter()).map(|s| s.error).sum();
        let target = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                evaluations,
                subdivisions,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Err(Error::NonConvergence {
                    estimate: total.re,
                    error: err,
                    subdivisions,
                })
            }
        };
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: total.re,
                error: err,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
            || mid <= worst.a
            || mid >= worst.b
        {
            settled.push(worst);
            continue;
        }
        let (v1, e1) = gk21(&f, worst.piece, worst.a, mid)?;
        let (v2, e2) = gk21(&f, worst.piece, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        heap.push(Segment {
            piece: worst.piece,
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            piece: worst.piece,
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let e = integrate(|x| C64::new(f(x), 0.0), a, b, cfg)?;
    Ok((e.value.re, e.error))
}

/// Tanh–sinh quadrature on a finite interval. Tolerates integrable endpoint
/// singularities; the error estimate is the difference between the last two
/// step halvings.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64, max_level: usize) -> Result<Estimate>
where
    F: Fn(f64) -> C64,
{
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::InvalidInput(
            "tanh_sinh needs a finite, non-empty interval".into(),
        ));
    }
    let half = 0.5 * (b - a);
    let hpi = std::f64::consts::FRAC_PI_2;
    let t_max = 4.0;
    let mut evaluations = 0usize;

    // node at parameter t > 0: distance from each endpoint and weight
    let node = |t: f64| -> (f64, f64) {
        let u = hpi * t.sinh();
        let e = (-2.0 * u).exp();
        let delta = half * 2.0 * e / (1.0 + e);
        let ch = u.cosh();
        let w = half * hpi * t.cosh() / (ch * ch);
        (delta, w)
    };
    let check = |v: C64, x: f64| -> Result<C64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidIntegrand { at: x })
        }
    };

    let side = |xl: f64, xr: f64, w: f64, evals: &mut usize| -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        if xl > a {
            s += check(f(xl), xl)? * w;
            *evals += 1;
        }
        if xr < b {
            s += check(f(xr), xr)? * w;
            *evals += 1;
        }
        Ok(s)
    };

    let mid = 0.5 * (a + b);
    let mut sum = check(f(mid), mid)? * (half * hpi);
    evaluations += 1;
    let mut h = 1.0;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        let (delta, w) = node(t);
        if delta > 0.0 && w > 0.0 {
            sum += side(a + delta, b - delta, w, &mut evaluations)?;
        }
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 1..=max_level {
        h *= 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            let (delta, w) = node(t);
            if delta > 0.0 && w > 0.0 {
                sum += side(a + delta, b - delta, w, &mut evaluations)?;
            }
            k += 2;
        }
        let cur = sum * h;
        let diff = (cur - prev).norm();
        if diff <= tol.max(1e-15 * cur.norm()) {
            return Ok(Estimate {
                value: cur,
                error: diff,
                evaluations,
                subdivisions: 0,
            });
        }
        prev = cur;
    }
    Err(Error::NonConvergence {
        estimate: prev.re,
        error: f64::NAN,
        subdivisions: max_level,
    })
}

/// Tanh–sinh quadrature over `[a, b]` split at `breakpoints`, with infinite
/// pieces folded onto `(0, 1]` by `x = lo + (1 - y)/y`.
///
/// Suited to integrable endpoint singularities that oscillate, such as
/// `|x - 1|^{-1/2 + iμ}`, where polynomial rules stall.
pub fn integrate_singular<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<Estimate>
where
    F: Fn(f64) -> C64,
{
    if !(a < b) {
        return Err(Error::InvalidInput("integrate_singular needs a < b".into()));
    }
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > a && *p < b)
        .collect();
    if a.is_infinite() && b.is_infinite() && pts.is_empty() {
        pts.push(0.0);
    }
    let edges = merge_breakpoints(a, b, pts);
    let pieces = (edges.len() - 1) as f64;
    let level = 12;
    let mut total = Estimate {
        value: C64::new(0.0, 0.0),
        error: 0.0,
        evaluations: 0,
        subdivisions: 0,
    };
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let e = if lo.is_finite() && hi.is_finite() {
            tanh_sinh(&f, lo, hi, tol / pieces, level)?
        } else if lo.is_finite() {
            tanh_sinh(
                |y| f(lo + (1.0 - y) / y) / (y * y),
                0.0,
                1.0,
                tol / pieces,
                level,
            )?
        } else {
            tanh_sinh(
                |y| f(hi - (1.0 - y) / y) / (y * y),
                0.0,
                1.0,
                tol / pieces,
                level,
            )?
        };
        total.value += e.value;
        total.error += e.error;
        total.evaluations += e.evaluations;
    }
    Ok(total)
}

/// Trapezoid rule on `n` equispaced points over one period starting at `start`.
pub fn trapezoid_periodic<F>(f: F, start: f64, period: f64, n: usize) -> C64
where
    F: Fn(f64) -> C64,
{
    let h = period / n as f64;
    (0..n).map(|j| f(start + j as f64 * h)).sum::<C64>() * h
}
