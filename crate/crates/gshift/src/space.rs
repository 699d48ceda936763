//! Weighted L_{p,alpha} norms on [-1, 1], the admissibility regions of the
//! approximation theorems, and the fixed corpus of test functions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::optim::golden_max;
use crate::panelquad::tanh_sinh_panels;
use crate::real::Real;
use crate::Resolution;

/// The pair (p, alpha) of the weighted space: `p` in [1, inf] with infinity
/// as a distinguished value, `alpha` the exponent on the weight.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WeightParams<T> {
    pub p: T,
    pub alpha: T,
}

impl<T: Real> WeightParams<T> {
    pub fn new(p: T, alpha: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidParameter(format!("p must be >= 1, got {}", p)));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        Ok(Self { p, alpha })
    }

    pub fn sup(alpha: T) -> Self {
        Self {
            p: T::infinity(),
            alpha,
        }
    }

    pub fn is_sup(&self) -> bool {
        self.p.is_infinite()
    }

    /// Stable textual form used in CSV headers and report labels.
    pub fn label(&self) -> String {
        if self.is_sup() {
            format!("p=inf alpha={}", self.alpha)
        } else {
            format!("p={} alpha={}", self.p, self.alpha)
        }
    }
}

/// Which theorem's hypothesis block to test (p, alpha) against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    Jackson,
    Inverse,
    Direct,
    Coincidence,
}

/// Does (p, alpha) satisfy the hypothesis of the named theorem, exactly as
/// stated: for the direct/inverse/coincidence group,
/// 1 - 1/(2p) < alpha < 3/2 - 1/(2p) for finite p and 1 <= alpha < 3/2 for
/// p = inf; the Jackson bound additionally admits the closed upper end
/// alpha <= 1 at p = 1.
pub fn admissible_for<T: Real>(w: &WeightParams<T>, theorem: Theorem) -> bool {
    let half = T::of(0.5);
    let three_halves = T::of(1.5);
    let (p, alpha) = (w.p, w.alpha);
    if !(p >= T::one()) {
        return false;
    }
    if p.is_infinite() {
        return alpha >= T::one() && alpha < three_halves;
    }
    match theorem {
        Theorem::Jackson => {
            if p == T::one() {
                alpha > half && alpha <= T::one()
            } else {
                let lo = T::one() - half / p;
                alpha > lo && alpha < three_halves - half / p
            }
        }
        Theorem::Inverse | Theorem::Direct | Theorem::Coincidence => {
            let lo = T::one() - half / p;
            alpha > lo && alpha < three_halves - half / p
        }
    }
}

/// The weight-generating function in closed form:
/// `sigma(u) = (1-u)^exp_minus * (1+u)^exp_plus`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SigmaWeight<T> {
    pub exp_minus: T,
    pub exp_plus: T,
}

impl<T: Real> SigmaWeight<T> {
    pub fn new(exp_minus: T, exp_plus: T) -> Result<Self> {
        if !(exp_minus >= T::zero()) || !(exp_plus >= T::zero()) {
            return Err(Error::InvalidParameter(
                "sigma exponents must be >= 0 so sigma stays finite on [-1, 1]".into(),
            ));
        }
        Ok(Self { exp_minus, exp_plus })
    }

    /// The reference weight `1 - u^2`.
    pub fn one_minus_x_squared() -> Self {
        Self {
            exp_minus: T::one(),
            exp_plus: T::one(),
        }
    }

    #[inline]
    pub fn eval(&self, u: T) -> T {
        self.eval_pow(u, T::one())
    }

    /// `sigma(u)^q`, with a fast path for the reference exponents.
    #[inline]
    pub fn eval_pow(&self, u: T, q: T) -> T {
        if q == T::zero() {
            return T::one();
        }
        let em = self.exp_minus * q;
        let ep = self.exp_plus * q;
        let minus = T::one() - u;
        let plus = T::one() + u;
        let left = if em == T::one() { minus } else { minus.powf(em) };
        let right = if ep == T::one() { plus } else { plus.powf(ep) };
        left * right
    }
}

/// An evaluable function on [-1, 1] with a stable label and the metadata the
/// harness needs: the nominal smoothness exponent (None for analytic
/// members), the interior points where the function loses smoothness (so
/// norm quadratures can split there), and how far evaluation must stay from
/// the endpoints (nonzero for shifted functions, whose defining integral
/// degenerates at +-1).
#[derive(Clone)]
pub struct FunctionHandle<T> {
    label: String,
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
    nominal_exponent: Option<T>,
    singular_points: Vec<T>,
    eval_margin: T,
}

impl<T: Real> FunctionHandle<T> {
    pub fn new(label: impl Into<String>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            nominal_exponent: None,
            singular_points: Vec::new(),
            eval_margin: T::zero(),
        }
    }

    pub fn with_exponent(mut self, gamma: T) -> Self {
        self.nominal_exponent = Some(gamma);
        self
    }

    pub fn with_singular_points(mut self, pts: Vec<T>) -> Self {
        self.singular_points = pts;
        self
    }

    pub fn with_margin(mut self, margin: T) -> Self {
        self.eval_margin = margin;
        self
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nominal_exponent(&self) -> Option<T> {
        self.nominal_exponent
    }

    pub fn singular_points(&self) -> &[T] {
        &self.singular_points
    }

    pub fn eval_margin(&self) -> T {
        self.eval_margin
    }

    /// `c * f`, keeping the metadata.
    pub fn scaled(&self, c: T) -> Self {
        let f = self.f.clone();
        Self {
            label: format!("{}*{}", c, self.label),
            f: Arc::new(move |x| c * f(x)),
            nominal_exponent: self.nominal_exponent,
            singular_points: self.singular_points.clone(),
            eval_margin: self.eval_margin,
        }
    }

    /// `f + g`, merging singular points and taking the wider margin.
    pub fn plus(&self, other: &Self) -> Self {
        let f = self.f.clone();
        let g = other.f.clone();
        let mut singular = self.singular_points.clone();
        for &s in &other.singular_points {
            if singular.iter().all(|&t| (t - s).abs() > T::of(1e-12)) {
                singular.push(s);
            }
        }
        singular.sort_by(|p, q| p.partial_cmp(q).expect("finite singular point"));
        Self {
            label: format!("{}+{}", self.label, other.label),
            f: Arc::new(move |x| f(x) + g(x)),
            nominal_exponent: None,
            singular_points: singular,
            eval_margin: self.eval_margin.max(other.eval_margin),
        }
    }
}

impl<T> std::fmt::Debug for FunctionHandle<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("label", &self.label)
            .field("nominal_exponent", &self.nominal_exponent)
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

/// Weighted norm `|| f(x) sigma(x)^alpha ||_p` on [-1, 1].
///
/// Finite p integrates `|f sigma^alpha|^p` with a tanh-sinh rule split at
/// the handle's singular points (nodes stay strictly inside the interval);
/// p = inf takes the maximum over a Chebyshev-distributed sample grid and
/// then refines around the local maxima by golden section.
pub fn weighted_norm<T: Real>(
    f: &FunctionHandle<T>,
    w: &WeightParams<T>,
    sigma: &SigmaWeight<T>,
    res: &Resolution,
) -> Result<T> {
    let margin = f.eval_margin();
    if w.is_sup() {
        let n = res.sup_samples.max(9);
        let cap = T::one() - margin;
        let weighted = |x: T| (f.eval(x)).abs() * sigma.eval_pow(x, w.alpha);
        let xs: Vec<T> = (0..n)
            .map(|j| {
                let theta = T::PI() * T::of_usize(j) / T::of_usize(n - 1);
                (-theta.cos()).max(-cap).min(cap)
            })
            .collect();
        let vals: Vec<T> = xs.iter().map(|&x| weighted(x)).collect();
        for (&x, &v) in xs.iter().zip(&vals) {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("weighted sample at x={}", x)));
            }
        }
        let mut best = T::zero();
        // indices of local maxima, strongest three refined
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| {
                (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == n || vals[i] >= vals[i + 1])
            })
            .collect();
        peaks.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).expect("finite sample"));
        peaks.truncate(3);
        for &v in &vals {
            best = best.max(v);
        }
        for &i in &peaks {
            let lo = if i == 0 { xs[0] } else { xs[i - 1] };
            let hi = if i + 1 == n { xs[n - 1] } else { xs[i + 1] };
            let (_, v) = golden_max(&weighted, lo, hi, T::of(1e-12), 80);
            if !v.is_finite() {
                return Ok(T::infinity());
            }
            best = best.max(v);
        }
        Ok(best)
    } else {
        let p = w.p;
        let half_p = p / T::of(2.0);
        let mut breaks = f.singular_points().to_vec();
        if half_p != half_p.trunc() {
            breaks.extend(sign_change_splits(f, margin, res.norm_nodes + 1));
        }
        let rule = tanh_sinh_panels(&breaks, res.norm_nodes, margin);
        let mut bad: Option<T> = None;
        let total = rule.sum(|x| {
            let v = (f.eval(x)).abs() * sigma.eval_pow(x, w.alpha);
            if !v.is_finite() {
                bad = Some(x);
                return T::zero();
            }
            if p == T::one() {
                v
            } else if p == T::of(2.0) {
                v * v
            } else {
                v.powf(p)
            }
        });
        if let Some(x) = bad {
            return Err(Error::NonFinite(format!("integrand at x={}", x)));
        }
        if total < T::zero() {
            return Ok(T::zero());
        }
        Ok(if p == T::one() {
            total
        } else if p == T::of(2.0) {
            total.sqrt()
        } else {
            total.powf(T::one() / p)
        })
    }
}

/// Interior sign changes of f, located by a Chebyshev-distributed scan and
/// bisection. `|f|^p` loses smoothness at these points for any p that is
/// not an even integer, so the norm quadrature must split there.
fn sign_change_splits<T: Real>(f: &FunctionHandle<T>, margin: T, scan: usize) -> Vec<T> {
    let cap = T::one() - margin.max(T::of(1e-12));
    let scan = scan.max(65);
    let mut roots = Vec::new();
    let mut prev_x = -cap;
    let mut prev_v = f.eval(prev_x);
    for j in 1..scan {
        let theta = T::PI() * T::of_usize(scan - 1 - j) / T::of_usize(scan - 1);
        let x = theta.cos().max(-cap).min(cap);
        let v = f.eval(x);
        if prev_v.is_finite() && v.is_finite() && prev_v * v < T::zero() {
            let (mut lo, mut hi, mut flo) = (prev_x, x, prev_v);
            for _ in 0..60 {
                let mid = (lo + hi) / T::of(2.0);
                let fm = f.eval(mid);
                if flo * fm <= T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo <= T::of(1e-13) {
                    break;
                }
            }
            roots.push((lo + hi) / T::of(2.0));
        }
        prev_x = x;
        prev_v = v;
    }
    roots
}

fn chebyshev_value<T: Real>(coeffs: &[T], x: T) -> T {
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    let two_x = T::of(2.0) * x;
    for &c in coeffs.iter().skip(1).rev() {
        let tmp = two_x * b1 - b2 + c;
        b2 = b1;
        b1 = tmp;
    }
    x * b1 - b2 + coeffs[0]
}

/// The fixed labeled corpus the theorem harness runs on: interior algebraic
/// singularities `|x|^g` and `|x - 1/2|^g` for g in {1/2, 1, 3/2}, truncated
/// powers for g in {1/2, 1}, the exponential, and a degree-7 polynomial.
pub fn corpus<T: Real>() -> Vec<FunctionHandle<T>> {
    let mut out = Vec::with_capacity(10);
    for (gamma, tag) in [(0.5, "0.5"), (1.0, "1"), (1.5, "1.5")] {
        let g = T::of(gamma);
        out.push(
            FunctionHandle::new(format!("abs_x_pow_{}", tag), move |x: T| x.abs().powf(g))
                .with_exponent(g)
                .with_singular_points(vec![T::zero()]),
        );
    }
    for (gamma, tag) in [(0.5, "0.5"), (1.0, "1"), (1.5, "1.5")] {
        let g = T::of(gamma);
        let half = T::of(0.5);
        out.push(
            FunctionHandle::new(format!("abs_x_minus_half_pow_{}", tag), move |x: T| {
                (x - half).abs().powf(g)
            })
            .with_exponent(g)
            .with_singular_points(vec![T::of(0.5)]),
        );
    }
    for (gamma, tag) in [(0.5, "0.5"), (1.0, "1")] {
        let g = T::of(gamma);
        out.push(
            FunctionHandle::new(format!("trunc_pow_{}", tag), move |x: T| {
                if x > T::zero() {
                    x.powf(g)
                } else {
                    T::zero()
                }
            })
            .with_exponent(g)
            .with_singular_points(vec![T::zero()]),
        );
    }
    out.push(FunctionHandle::new("exp_x", |x: T| x.exp()));
    let coeffs: [f64; 8] = [0.1, 0.3, -0.2, 0.5, -0.4, 0.25, -0.15, 0.35];
    out.push(FunctionHandle::new("poly_degree7", move |x: T| {
        let c: Vec<T> = coeffs.iter().map(|&v| T::of(v)).collect();
        chebyshev_value(&c, x)
    }));
    out
}

/// Look up a corpus member by label.
pub fn corpus_member<T: Real>(label: &str) -> Option<FunctionHandle<T>> {
    corpus().into_iter().find(|f| f.label() == label)
}
