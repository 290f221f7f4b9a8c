use serde::Serialize;

use super::gauss::GaussPanels;
use crate::error::{Error, Result};
use crate::C64;

/// Power-law model `|f(x)| ~ A |x|^-exponent` beyond the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailModel {
    pub exponent: f64,
}

impl TailModel {
    /// `∫_L^∞ (A L^p x^-p)^2 dx` for the amplitude `A` observed at `L`.
    fn mass_beyond(&self, amplitude: f64, edge: f64) -> Result<f64> {
        let p = self.exponent;
        if p <= 0.5 {
            return Err(Error::NonIntegrableTail { exponent: p });
        }
        Ok(amplitude * amplitude * edge.abs() / (2.0 * p - 1.0))
    }
}

/// Samples of a function on the line with quadrature weights and a tail model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<C64>,
    span: (f64, f64),
    tail: TailModel,
}

impl GridFunction {
    /// Arbitrary increasing nodes; trapezoid weights.
    pub fn new(nodes: Vec<f64>, values: Vec<C64>, tail: TailModel) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::InvalidInput(
                "grid needs matching nodes and values".into(),
            ));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        let n = nodes.len();
        let weights = (0..n)
            .map(|i| {
                let lo = nodes[i.saturating_sub(1)];
                let hi = nodes[(i + 1).min(n - 1)];
                0.5 * (hi - lo)
            })
            .collect();
        let span = (nodes[0], nodes[n - 1]);
        Ok(Self {
            nodes,
            weights,
            values,
            span,
            tail,
        })
    }

    pub fn sample<F: Fn(f64) -> C64>(f: F, panels: &GaussPanels, tail: TailModel) -> Result<Self> {
        let values: Vec<C64> = panels.nodes.iter().map(|&x| f(x)).collect();
        if let Some((i, _)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidIntegrand {
                at: panels.nodes[i],
            });
        }
        Ok(Self {
            nodes: panels.nodes.clone(),
            weights: panels.weights.clone(),
            values,
            span: (panels.lo, panels.hi),
            tail,
        })
    }

    /// Symmetric composite Gauss rule on `[-edge, edge]`, fine near the
    /// origin and geometric outwards.
    pub fn line_panels(edge: f64, order: usize) -> GaussPanels {
        let mut right = Vec::new();
        let mut x = 0.0;
        while x < 4.0 - 1e-12 {
            right.push(x);
            x += 0.25;
        }
        x = 4.0;
        while x < edge {
            right.push(x);
            x *= 1.5;
        }
        right.push(edge);
        let mut breaks: Vec<f64> = right.iter().skip(1).rev().map(|v| -v).collect();
        breaks.extend(right);
        GaussPanels::new(&breaks, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    /// L² norm: weighted sum over the samples plus closed-form tails.
    pub fn l2_norm(&self) -> Result<f64> {
        let body: f64 = self
            .values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * v.norm_sqr())
            .sum();
        let n = self.nodes.len();
        let p = self.tail.exponent;
        let (lo, hi) = self.span;
        let left_amp = self.values[0].norm() * (self.nodes[0] / lo).abs().powf(p);
        let right_amp = self.values[n - 1].norm() * (self.nodes[n - 1] / hi).abs().powf(p);
        let left = self.tail.mass_beyond(left_amp, lo)?;
        let right = self.tail.mass_beyond(right_amp, hi)?;
        Ok((body + left + right).sqrt())
    }

    /// Pairing `∫ f conj(g)` over the shared grid, without tails.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.nodes != other.nodes {
            return Err(Error::InvalidInput("grids differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum())
    }

    /// Four-point Lagrange interpolation inside the sampled range.
    pub fn value_at(&self, x: f64) -> Result<C64> {
        let n = self.nodes.len();
        if !(x >= self.nodes[0] && x <= self.nodes[n - 1]) {
            return Err(Error::SampleUnderflow { at: x });
        }
        let k = self.nodes.partition_point(|&v| v < x);
        let start = k.saturating_sub(2).min(n.saturating_sub(4));
        let end = (start + 4).min(n);
        let mut acc = C64::new(0.0, 0.0);
        for i in start..end {
            let mut l = 1.0;
            for j in start..end {
                if j != i {
                    l *= (x - self.nodes[j]) / (self.nodes[i] - self.nodes[j]);
                }
            }
            acc += self.values[i] * l;
        }
        Ok(acc)
    }

    /// First derivative at every node from local interpolants.
    pub fn derivative(&self) -> Vec<C64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let start = i.saturating_sub(2).min(n.saturating_sub(5));
                let end = (start + 5).min(n);
                let x = self.nodes[i];
                let mut acc = C64::new(0.0, 0.0);
                for a in start..end {
                    let mut dl = 0.0;
                    for b in start..end {
                        if b == a {
                            continue;
                        }
                        let mut term = 1.0 / (self.nodes[a] - self.nodes[b]);
                        for c in start..end {
                            if c != a && c != b {
                                term *= (x - self.nodes[c]) / (self.nodes[a] - self.nodes[c]);
                            }
                        }
                        dl += term;
                    }
                    acc += self.values[a] * dl;
                }
                acc
            })
            .collect()
    }

    /// Replace the samples while keeping nodes, weights and tail.
    pub fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(Error::InvalidInput(
                "value count does not match grid".into(),
            ));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spherical_density(x: f64) -> C64 {
        C64::new((PI * (1.0 + x * x)).powf(-0.5), 0.0)
    }

    #[test]
    fn sampled_spherical_vector_has_unit_norm() {
        let panels = GridFunction::line_panels(1e4, 16);
        let g =
            GridFunction::sample(spherical_density, &panels, TailModel { exponent: 1.0 }).unwrap();
        let n = g.l2_norm().unwrap();
        assert!((n - 1.0).abs() < 1e-10, "{n}");
    }

    #[test]
    fn slow_tail_is_rejected() {
        let panels = GridFunction::line_panels(10.0, 8);
        let g =
            GridFunction::sample(spherical_density, &panels, TailModel { exponent: 0.5 }).unwrap();
        assert!(matches!(g.l2_norm(), Err(Error::NonIntegrableTail { .. })));
    }

    #[test]
    fn interpolation_and_derivative() {
        let panels = GridFunction::line_panels(20.0, 12);
        let g = GridFunction::sample(
            |x| C64::new(x.sin(), 0.0),
            &panels,
            TailModel { exponent: 1.0 },
        )
        .unwrap();
        assert!((g.value_at(0.4).unwrap().re - 0.4f64.sin()).abs() < 1e-6);
        assert!(matches!(
            g.value_at(25.0),
            Err(Error::SampleUnderflow { .. })
        ));
        let d = g.derivative();
        let i = g.nodes().len() / 2;
        assert!((d[i].re - g.nodes()[i].cos()).abs() < 1e-5);
    }
}
