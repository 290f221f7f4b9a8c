use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule over a list of panel breakpoints.
#[derive(Debug, Clone)]
pub struct GaussPanels {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl GaussPanels {
    pub fn new(breaks: &[f64], order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for p in breaks.windows(2) {
            let (c, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * w);
            }
        }
        let lo = breaks.first().copied().unwrap_or(0.0);
        let hi = breaks.last().copied().unwrap_or(0.0);
        Self {
            nodes,
            weights,
            lo,
            hi,
        }
    }

    /// Panels on `[lo, hi]` refined geometrically towards `lo` by `levels`
    /// halvings, then uniform with `uniform` panels.
    pub fn graded(lo: f64, hi: f64, levels: usize, uniform: usize, order: usize) -> Self {
        let len = hi - lo;
        let first = len / uniform as f64;
        let mut breaks = vec![lo];
        for k in (0..levels).rev() {
            breaks.push(lo + first * 0.5f64.powi(k as i32 + 1));
        }
        for j in 1..=uniform {
            breaks.push(lo + first * j as f64);
        }
        Self::new(&breaks, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 2;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn graded_panels_cover_interval() {
        let g = GaussPanels::graded(0.0, 3.0, 6, 5, 8);
        assert!((g.sum(|_| 1.0) - 3.0).abs() < 1e-13);
        assert!((g.sum(|x| x.sqrt()) - 2.0 * 3f64.powf(1.5) / 3.0).abs() < 1e-6);
    }
}
