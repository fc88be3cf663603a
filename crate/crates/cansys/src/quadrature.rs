//! Gauss-Legendre quadrature on [-1, 1], applied cell by cell.
//!
//! Nodes and weights come from Newton iteration on the Legendre
//! three-term recurrence. The rule is exact for polynomials of degree
//! 2n - 1, which makes it exact on each cell for the constant-coefficient
//! integrands that dominate this crate.

use crate::defaults;
use crate::error::{Error, Result};

/// Validated quadrature order. Defaults to [`defaults::QUAD_ORDER`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureRule {
    order: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            order: defaults::QUAD_ORDER,
        }
    }
}

impl QuadratureRule {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::BadQuadratureOrder);
        }
        Ok(QuadratureRule { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> GaussLegendre {
        GaussLegendre::new(self.order)
    }
}

/// Nodes and weights of the n-point rule on the reference interval.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the n-point rule. Nodes are exactly symmetric about zero:
    /// the positive half is solved by Newton iteration and mirrored.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
            if n % 2 == 1 && i == n / 2 {
                nodes[i] = 0.0;
            }
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node/weight pairs mapped to the interval [a, b].
    pub fn map_to(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integrates f over [a, b] with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.map_to(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let gl = GaussLegendre::new(1);
        assert_eq!(gl.nodes, vec![0.0]);
        assert!((gl.weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_nodes() {
        let gl = GaussLegendre::new(2);
        let expect = 1.0 / 3.0_f64.sqrt();
        assert!((gl.nodes[0] + expect).abs() < 1e-15);
        assert!((gl.nodes[1] - expect).abs() < 1e-15);
        assert!((gl.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [1, 2, 3, 5, 8, 16, 64] {
            let gl = GaussLegendre::new(order);
            let total: f64 = gl.weights.iter().sum();
            assert!(
                (total - 2.0).abs() < 1e-13,
                "order {order}: weight sum {total}"
            );
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for order in [2usize, 4, 8] {
            let gl = GaussLegendre::new(order);
            for deg in 0..(2 * order) {
                let value = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (value - exact).abs() < 1e-13,
                    "order {order} degree {deg}: {value} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn mapped_rule_integrates_on_shifted_interval() {
        let gl = GaussLegendre::new(8);
        let value = gl.integrate(0.0, 2.0, |x| x * x * x);
        assert!((value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn order_zero_rejected() {
        assert!(QuadratureRule::new(0).is_err());
        assert_eq!(QuadratureRule::default().order(), 8);
    }

    #[test]
    fn high_order_nodes_stay_sorted_and_inside() {
        let gl = GaussLegendre::new(64);
        for pair in gl.nodes.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(gl.nodes.iter().all(|x| x.abs() < 1.0));
        assert!(gl.weights.iter().all(|w| *w > 0.0));
    }
}
