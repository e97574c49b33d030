//! Composite Gauss–Legendre rules.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).unwrap();
        let gl = GaussLegendre::new(n);
        let (nodes, weights) = gl.as_node_weight_pairs().iter().copied().unzip();
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub xi_max: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { xi_max: 0.0, panels: 40, nodes_per_panel: 16 }
    }
}

impl QuadSpec {
    pub fn doubled(self) -> Self {
        QuadSpec { nodes_per_panel: self.nodes_per_panel * 2, ..self }
    }
}

/// Composite rule over the given panel edges, summed in panel order.
pub fn composite(rule: &Rule, edges: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    edges.windows(2).map(|w| rule.integrate(w[0], w[1], &mut f)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_for_polynomials() {
        let r = Rule::new(4);
        assert_relative_eq!(r.integrate(0.0, 2.0, |x| x.powi(7)), 32.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let r = Rule::new(16);
        let edges = crate::grid::linspace(0.0, 8.0, 41);
        let v = composite(&r, &edges, |x| (-2.0 * x * x).exp());
        assert_relative_eq!(v, 0.5 * (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-14);
    }
}
