//! One-dimensional Gauss-Lobatto-Legendre rules and nodal Lagrange bases.
//!
//! Every spectral element in the crate is a tensor product of two of these
//! rules. Because quadrature points coincide with interpolation nodes, mass
//! matrices come out diagonal.

use crate::error::{Error, Result};

/// Highest polynomial order accepted by [`gll_rule`].
pub const MAX_ORDER: usize = 16;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// GLL quadrature rule of polynomial order `P` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `order + 1` nodes, strictly increasing, with `nodes[0] = -1` and
    /// `nodes[order] = 1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Values of all nodal Lagrange polynomials at `xi`.
    pub fn lagrange_at(&self, xi: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let xj = self.nodes[j];
            let mut l = 1.0;
            for (m, &xm) in self.nodes.iter().enumerate() {
                if m != j {
                    l *= (xi - xm) / (xj - xm);
                }
            }
            *o = l;
        }
        out
    }
}

/// Differentiation matrix of the nodal Lagrange basis:
/// `entries[i][j] = ℓ_j'(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DiffMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Differentiates nodal values.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(values).map(|(d, v)| d * v).sum())
            .collect()
    }
}

/// Legendre polynomial `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Builds the GLL rule of the given polynomial order.
///
/// Interior nodes are roots of `(1 - x²) P'_order(x)`, found by Newton
/// iteration started from Chebyshev-Gauss-Lobatto points.
pub fn gll_rule(order: usize) -> Result<QuadratureRule1D> {
    if !(1..=MAX_ORDER).contains(&order) {
        return Err(Error::Config(format!(
            "polynomial order {order} outside supported range 1..={MAX_ORDER}"
        )));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(n).skip(1) {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            // f = (1-x²)P'_n = n (P_{n-1} - x P_n), f' = -n(n+1) P_n
            let (p, p_prev) = legendre(n, x);
            let dx = (p_prev - x * p) / ((nf + 1.0) * p);
            x += dx;
            if dx.abs() < NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "GLL Newton iteration did not converge for order {order}, node {i}"
            )));
        }
        *node = x;
    }
    // symmetrize against round-off
    for i in 0..=n / 2 {
        let avg = 0.5 * (nodes[n - i] - nodes[i]);
        nodes[i] = -avg;
        nodes[n - i] = avg;
    }
    if n.is_multiple_of(2) {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok(QuadratureRule1D {
        order,
        nodes,
        weights,
    })
}

/// Exact differentiation matrix of the nodal basis of `rule`.
pub fn diff_matrix(rule: &QuadratureRule1D) -> DiffMatrix {
    let n = rule.len();
    let x = rule.nodes();
    // barycentric weights
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&m| m != j)
                .map(|m| x[j] - x[m])
                .product::<f64>()
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let d = bary[j] / (bary[i] * (x[i] - x[j]));
                entries[i * n + j] = d;
                diag -= d;
            }
        }
        entries[i * n + i] = diag;
    }
    DiffMatrix { n, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn order_one_is_trapezoid() {
        let r = gll_rule(1).unwrap();
        assert_eq!(r.nodes(), &[-1.0, 1.0]);
        assert_abs_diff_eq!(r.weights()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights()[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_two_matches_simpson() {
        // (1-x²)P'_2 = (1-x²)·3x, roots -1, 0, 1; bisection confirms the interior root.
        let f = |x: f64| (1.0 - x * x) * 3.0 * x;
        let (mut lo, mut hi) = (-0.5, 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let r = gll_rule(2).unwrap();
        assert_abs_diff_eq!(r.nodes()[1], 0.5 * (lo + hi), epsilon = 1e-14);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in r.weights().iter().zip(expected) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn weights_sum_to_two_and_nodes_increase() {
        for p in 1..=MAX_ORDER {
            let r = gll_rule(p).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-13);
            assert_eq!(r.nodes()[0], -1.0);
            assert_eq!(r.nodes()[p], 1.0);
            assert!(r.nodes().windows(2).all(|w| w[1] > w[0]));
            assert!(r.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn exact_up_to_degree_2p_minus_1() {
        for p in 1..=MAX_ORDER {
            let r = gll_rule(p).unwrap();
            for k in 0..=(2 * p - 1) {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                let got = r.integrate(|x| x.powi(k as i32));
                assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(matches!(gll_rule(0), Err(Error::Config(_))));
        assert!(matches!(gll_rule(17), Err(Error::Config(_))));
    }

    #[test]
    fn linear_diff_matrix() {
        let d = diff_matrix(&gll_rule(1).unwrap());
        for i in 0..2 {
            assert_abs_diff_eq!(d.get(i, 0), -0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(d.get(i, 1), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn diff_matrix_is_exact_on_monomials() {
        for p in 1..=MAX_ORDER {
            let r = gll_rule(p).unwrap();
            let d = diff_matrix(&r);
            for i in 0..=p {
                let s: f64 = d.row(i).iter().sum();
                assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
            }
            for k in 1..=p {
                let v: Vec<f64> = r.nodes().iter().map(|x| x.powi(k as i32)).collect();
                let dv = d.apply(&v);
                for (x, got) in r.nodes().iter().zip(dv) {
                    let exact = k as f64 * x.powi(k as i32 - 1);
                    assert_abs_diff_eq!(got, exact, epsilon = 1e-11 * (1.0 + exact.abs()).max(p as f64));
                }
            }
        }
    }

    #[test]
    fn second_derivative_of_square_is_two() {
        for p in 2..=8 {
            let r = gll_rule(p).unwrap();
            let d = diff_matrix(&r);
            let v: Vec<f64> = r.nodes().iter().map(|x| x * x).collect();
            let dd = d.apply(&d.apply(&v));
            for val in &dd[1..p] {
                assert_abs_diff_eq!(*val, 2.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn lagrange_basis_is_cardinal() {
        let r = gll_rule(5).unwrap();
        for (i, &x) in r.nodes().iter().enumerate() {
            let l = r.lagrange_at(x);
            for (j, v) in l.iter().enumerate() {
                assert_abs_diff_eq!(*v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }
}
