//! Jacobi polynomials normalized to 1 at the right endpoint, and the Gauss
//! quadrature rules the rest of the crate integrates with.
//!
//! `eval_jacobi` runs the standard three-term recurrence and divides by the
//! value at 1 computed by the same recurrence, so the normalization
//! `P(1) = 1` holds exactly. Gauss-Jacobi nodes come from bracketed
//! Newton iteration on the recurrence; weights from the Christoffel
//! function of the orthonormalized basis.

use crate::error::{Error, Result};
use crate::real::Real;

/// Exponent pair `(a, b)` of the Jacobi weight `(1-x)^a (1+x)^b`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct JacobiIndex<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> JacobiIndex<T> {
    /// Both exponents must exceed -1 for the weight to be integrable.
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > -T::one()) || !(b > -T::one()) {
            return Err(Error::InvalidParameter(format!(
                "jacobi index requires a > -1 and b > -1, got ({}, {})",
                a, b
            )));
        }
        Ok(Self { a, b })
    }

    pub fn legendre() -> Self {
        Self {
            a: T::zero(),
            b: T::zero(),
        }
    }
}

/// Which classical weight a quadrature rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadKind<T> {
    /// `1/sqrt(1-x^2)`; closed-form nodes and equal weights `pi/m`.
    ChebyshevFirstKind,
    /// Unit weight.
    Legendre,
    /// `(1-x)^a (1+x)^b`.
    Jacobi(JacobiIndex<T>),
}

/// Nodes and positive weights of an m-point Gauss rule on (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub kind: QuadKind<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks the structural invariants: equal lengths, strictly increasing
    /// nodes inside (-1, 1), strictly positive weights.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::InvalidParameter(
                "node and weight counts differ".into(),
            ));
        }
        for pair in self.nodes.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidParameter(
                    "nodes are not strictly increasing".into(),
                ));
            }
        }
        if self
            .nodes
            .iter()
            .any(|&x| !(x > -T::one() && x < T::one()))
        {
            return Err(Error::InvalidParameter("node outside (-1, 1)".into()));
        }
        if self.weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidParameter("non-positive weight".into()));
        }
        Ok(())
    }
}

/// Unnormalized Jacobi value by the three-term recurrence.
fn jacobi_raw<T: Real>(idx: JacobiIndex<T>, nu: usize, x: T) -> T {
    let (a, b) = (idx.a, idx.b);
    let two = T::of(2.0);
    if nu == 0 {
        return T::one();
    }
    let mut pm1 = T::one();
    let mut p = (a + b + two) * x / two + (a - b) / two;
    for n in 2..=nu {
        let nf = T::of_usize(n);
        let s = two * nf + a + b;
        let c1 = two * nf * (nf + a + b) * (s - two);
        let c2 = (s - T::one()) * (a * a - b * b);
        let c3 = (s - two) * (s - T::one()) * s;
        let c4 = two * (nf + a - T::one()) * (nf + b - T::one()) * s;
        let next = ((c2 + c3 * x) * p - c4 * pm1) / c1;
        pm1 = p;
        p = next;
    }
    p
}

/// Unnormalized Jacobi value and derivative, for Newton iteration.
fn jacobi_raw_with_deriv<T: Real>(idx: JacobiIndex<T>, nu: usize, x: T) -> (T, T) {
    let (a, b) = (idx.a, idx.b);
    let two = T::of(2.0);
    if nu == 0 {
        return (T::one(), T::zero());
    }
    let mut pm1 = T::one();
    let mut dm1 = T::zero();
    let mut p = (a + b + two) * x / two + (a - b) / two;
    let mut d = (a + b + two) / two;
    for n in 2..=nu {
        let nf = T::of_usize(n);
        let s = two * nf + a + b;
        let c1 = two * nf * (nf + a + b) * (s - two);
        let c2 = (s - T::one()) * (a * a - b * b);
        let c3 = (s - two) * (s - T::one()) * s;
        let c4 = two * (nf + a - T::one()) * (nf + b - T::one()) * s;
        let next = ((c2 + c3 * x) * p - c4 * pm1) / c1;
        let dnext = ((c2 + c3 * x) * d + c3 * p - c4 * dm1) / c1;
        pm1 = p;
        p = next;
        dm1 = d;
        d = dnext;
    }
    (p, d)
}

/// Degree-`nu` Jacobi polynomial normalized so its value at 1 is exactly 1.
pub fn eval_jacobi<T: Real>(idx: JacobiIndex<T>, nu: usize, x: T) -> Result<T> {
    if x.abs() > T::one() {
        return Err(Error::Domain(format!("eval_jacobi needs |x| <= 1, got {}", x)));
    }
    if nu == 0 {
        return Ok(T::one());
    }
    let at_one = jacobi_raw(idx, nu, T::one());
    Ok(jacobi_raw(idx, nu, x) / at_one)
}

/// All normalized Jacobi values of degree 0..=max_nu at one point, from a
/// single pass of the recurrence.
pub fn eval_jacobi_sequence<T: Real>(idx: JacobiIndex<T>, max_nu: usize, x: T) -> Result<Vec<T>> {
    if x.abs() > T::one() {
        return Err(Error::Domain(format!("eval_jacobi needs |x| <= 1, got {}", x)));
    }
    let raw_sequence = |x: T| -> Vec<T> {
        let (a, b) = (idx.a, idx.b);
        let two = T::of(2.0);
        let mut out = Vec::with_capacity(max_nu + 1);
        out.push(T::one());
        if max_nu == 0 {
            return out;
        }
        out.push((a + b + two) * x / two + (a - b) / two);
        for n in 2..=max_nu {
            let nf = T::of_usize(n);
            let s = two * nf + a + b;
            let c1 = two * nf * (nf + a + b) * (s - two);
            let c2 = (s - T::one()) * (a * a - b * b);
            let c3 = (s - two) * (s - T::one()) * s;
            let c4 = two * (nf + a - T::one()) * (nf + b - T::one()) * s;
            let next = ((c2 + c3 * x) * out[n - 1] - c4 * out[n - 2]) / c1;
            out.push(next);
        }
        out
    };
    let at_x = raw_sequence(x);
    let at_one = raw_sequence(T::one());
    Ok(at_x
        .into_iter()
        .zip(at_one)
        .map(|(v, s)| v / s)
        .collect())
}

/// Monic-recurrence coefficients of the Jacobi weight (Gautschi's alpha_k, beta_k).
fn jacobi_recurrence_coeffs<T: Real>(idx: JacobiIndex<T>, k: usize) -> (T, T) {
    let (a, b) = (idx.a, idx.b);
    let one = T::one();
    let two = T::of(2.0);
    let four = T::of(4.0);
    if k == 0 {
        let alpha = (b - a) / (a + b + two);
        // beta_0 = integral of the weight = 2^(a+b+1) B(a+1, b+1)
        let beta = ((a + b + one) * two.ln() + (a + one).ln_gamma() + (b + one).ln_gamma()
            - (a + b + two).ln_gamma())
        .exp();
        return (alpha, beta);
    }
    let kf = T::of_usize(k);
    let s = two * kf + a + b;
    let alpha = (b * b - a * a) / (s * (s + two));
    let beta = if k == 1 {
        four * (a + one) * (b + one) / ((a + b + two) * (a + b + two) * (a + b + T::of(3.0)))
    } else {
        four * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + one) * (s - one))
    };
    (alpha, beta)
}

/// Gauss weight at node `x` via the Christoffel function of the first `m`
/// orthonormal polynomials.
fn christoffel_weight<T: Real>(idx: JacobiIndex<T>, m: usize, x: T) -> T {
    let (_, beta0) = jacobi_recurrence_coeffs(idx, 0);
    let mut sum = T::zero();
    let mut prev = T::zero();
    let mut cur = T::one() / beta0.sqrt();
    sum += cur * cur;
    for k in 0..m.saturating_sub(1) {
        let (alpha_k, _) = jacobi_recurrence_coeffs(idx, k);
        let (_, beta_next) = jacobi_recurrence_coeffs(idx, k + 1);
        let (_, beta_k) = jacobi_recurrence_coeffs(idx, k);
        let beta_k_sqrt = if k == 0 { T::zero() } else { beta_k.sqrt() };
        let next = ((x - alpha_k) * cur - beta_k_sqrt * prev) / beta_next.sqrt();
        prev = cur;
        cur = next;
        sum += cur * cur;
    }
    T::one() / sum
}

/// Locate the `m` roots of the degree-`m` Jacobi polynomial by sign-change
/// bracketing on a theta grid followed by safeguarded Newton.
fn jacobi_roots<T: Real>(idx: JacobiIndex<T>, m: usize) -> Result<Vec<T>> {
    if m == 1 {
        let (alpha0, _) = jacobi_recurrence_coeffs(idx, 0);
        return Ok(vec![alpha0]);
    }
    let mut scan = 8 * m + 31;
    for _attempt in 0..4 {
        let mut brackets: Vec<(T, T)> = Vec::with_capacity(m);
        let mut theta_prev = T::of(1e-3) / T::of_usize(m);
        let mut f_prev = jacobi_raw(idx, m, theta_prev.cos());
        for i in 1..=scan {
            let theta = (T::PI() - T::of(2e-3) / T::of_usize(m)) * T::of_usize(i)
                / T::of_usize(scan)
                + T::of(1e-3) / T::of_usize(m);
            let f = jacobi_raw(idx, m, theta.cos());
            if f_prev * f < T::zero() {
                // ascending in x: cos(theta) decreases with theta
                brackets.push((theta.cos(), theta_prev.cos()));
            }
            theta_prev = theta;
            f_prev = f;
        }
        if brackets.len() == m {
            brackets.reverse();
            let tol = T::of(1e-14);
            let mut roots = Vec::with_capacity(m);
            for (mut lo, mut hi) in brackets {
                let mut flo = jacobi_raw(idx, m, lo);
                for _ in 0..10 {
                    let mid = (lo + hi) / T::of(2.0);
                    let fm = jacobi_raw(idx, m, mid);
                    if flo * fm <= T::zero() {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                let mut x = (lo + hi) / T::of(2.0);
                for _ in 0..100 {
                    let (p, dp) = jacobi_raw_with_deriv(idx, m, x);
                    if dp == T::zero() {
                        break;
                    }
                    let step = p / dp;
                    // convergence is judged before moving so a sub-ulp step
                    // cannot trip the bisection fallback
                    if step.abs() <= tol * T::one().max(x.abs()) {
                        break;
                    }
                    let next = x - step;
                    x = if next > lo && next < hi {
                        next
                    } else {
                        (lo + hi) / T::of(2.0)
                    };
                    let (fx, _) = jacobi_raw_with_deriv(idx, m, x);
                    if flo * fx <= T::zero() {
                        hi = x;
                    } else {
                        lo = x;
                        flo = fx;
                    }
                }
                roots.push(x);
            }
            return Ok(roots);
        }
        scan *= 2;
    }
    Err(Error::NonConvergence(format!(
        "failed to bracket all {} Gauss-Jacobi nodes",
        m
    )))
}

/// Construct an m-point Gauss rule of the requested kind, exact for
/// polynomials of degree <= 2m-1 against the corresponding weight.
pub fn gauss_rule<T: Real>(kind: QuadKind<T>, m: usize) -> Result<QuadratureRule<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("node count must be >= 1".into()));
    }
    match kind {
        QuadKind::ChebyshevFirstKind => {
            let mf = T::of_usize(m);
            let w = T::PI() / mf;
            let mut nodes: Vec<T> = (1..=m)
                .map(|k| (T::PI() * (T::of_usize(2 * k) - T::one()) / (T::of(2.0) * mf)).cos())
                .collect();
            nodes.reverse();
            Ok(QuadratureRule {
                weights: vec![w; m],
                nodes,
                kind,
            })
        }
        QuadKind::Legendre => {
            let rule = gauss_rule(QuadKind::Jacobi(JacobiIndex::legendre()), m)?;
            Ok(QuadratureRule {
                nodes: rule.nodes,
                weights: rule.weights,
                kind,
            })
        }
        QuadKind::Jacobi(idx) => {
            JacobiIndex::new(idx.a, idx.b)?;
            let nodes = jacobi_roots(idx, m)?;
            let weights: Vec<T> = nodes
                .iter()
                .map(|&x| christoffel_weight(idx, m, x))
                .collect();
            let rule = QuadratureRule {
                nodes,
                weights,
                kind,
            };
            rule.validate()?;
            // the weights must add up to the weight function's total mass
            let (_, beta0) = jacobi_recurrence_coeffs(idx, 0);
            let total: T = rule.weights.iter().copied().sum();
            if ((total - beta0) / beta0).abs() > T::of(1e-8) {
                return Err(Error::NonConvergence(format!(
                    "Gauss-Jacobi weights sum to {} instead of {}",
                    total, beta0
                )));
            }
            Ok(rule)
        }
    }
}

/// Weighted dot product of `g` at the nodes, accumulated with compensated
/// summation in node order.
pub fn integrate<T: Real, F: Fn(T) -> T>(rule: &QuadratureRule<T>, g: F) -> Result<T> {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand at node {}", x)));
        }
        let term = w * v;
        let t = sum + term;
        // Neumaier correction
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    Ok(sum + comp)
}
