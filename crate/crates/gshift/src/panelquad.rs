//! Panelized tanh-sinh quadrature on (-1, 1).
//!
//! Norm and coefficient integrals split the interval at the integrand's
//! known interior singular points; each panel then gets a truncated
//! tanh-sinh rule, whose endpoint clustering absorbs both the panel-edge
//! singularities and the weight's behaviour at +-1.

use crate::real::Real;

/// Nodes/weights for an integral over (-1, 1), ascending node order.
#[derive(Debug, Clone)]
pub(crate) struct PanelRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

const TAU_MAX: f64 = 3.0;

/// Build a rule with roughly `total_nodes` points, split at
/// `interior_breaks` (clamped and deduplicated). Nodes closer than
/// `margin` to +-1 are dropped.
pub(crate) fn tanh_sinh_panels<T: Real>(
    interior_breaks: &[T],
    total_nodes: usize,
    margin: T,
) -> PanelRule<T> {
    let mut edges: Vec<T> = vec![-T::one()];
    let mut breaks: Vec<T> = interior_breaks
        .iter()
        .copied()
        .filter(|s| s.abs() < T::of(1.0 - 1e-9))
        .collect();
    breaks.sort_by(|p, q| p.partial_cmp(q).expect("finite break"));
    for s in breaks {
        if (s - *edges.last().unwrap()).abs() > T::of(1e-9) {
            edges.push(s);
        }
    }
    edges.push(T::one());

    let total_nodes = total_nodes.max(32 * (edges.len() - 1));
    let mut nodes = Vec::with_capacity(total_nodes + edges.len() * 2);
    let mut weights = Vec::with_capacity(total_nodes + edges.len() * 2);
    let half_pi = T::PI() / T::of(2.0);
    let full = T::of(2.0);

    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let len = hi - lo;
        let share = (len / full).to_f64().unwrap_or(0.5);
        let n = ((total_nodes as f64 * share).round() as usize).max(33) | 1;
        let center = (lo + hi) / T::of(2.0);
        let radius = len / T::of(2.0);
        let h = T::of(2.0 * TAU_MAX) / T::of_usize(n - 1);
        for j in 0..n {
            let tau = -T::of(TAU_MAX) + h * T::of_usize(j);
            let sh = half_pi * tau.sinh();
            let u = sh.tanh();
            let x = center + radius * u;
            if x.abs() > T::one() - margin.max(T::of(1e-14)) {
                continue;
            }
            let ch = sh.cosh();
            let w = h * radius * half_pi * tau.cosh() / (ch * ch);
            if w > T::zero() && w.is_finite() {
                nodes.push(x);
                weights.push(w);
            }
        }
    }
    PanelRule { nodes, weights }
}

impl<T: Real> PanelRule<T> {
    /// Compensated weighted sum of `g` over the rule.
    pub fn sum<F: FnMut(T) -> T>(&self, mut g: F) -> T {
        let mut sum = T::zero();
        let mut comp = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let term = w * g(x);
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        sum + comp
    }
}
