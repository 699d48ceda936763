//! The generalized shift operator, its kernel, the self-test gate that
//! certifies a kernel configuration, and the operator-norm probe.
//!
//! The operator acts on a function f as
//!
//! ```text
//! tau_t(f, x) = 1/(pi sigma(x) Co(t)) * Int_0^pi B_y(x, cos phi, R) f(R) dphi
//! R            = x cos t - sqrt(1-x^2) sin t cos phi
//! B_y(x, z, R) = 2 (sqrt(1-x^2) y + x z sqrt(1-y^2) + sqrt(1-x^2)(1-y) sigma(z))^2 - sigma(R)
//! Co(t)        = ((1 + cos t)/2)^2,   y = cos t
//! ```
//!
//! With the reference ingredients (`sigma(u) = 1-u^2`, Jacobi families
//! (2,2) in x and (0,4) in y) the operator fixes constants, reproduces f at
//! t = 0, and multiplies the degree-nu Jacobi component by the degree-nu
//! (0,4) polynomial of cos t. Those identities are exactly what
//! [`selftest`] checks, so a mis-transcribed configuration cannot slip
//! through quietly.

use crate::error::{Error, Result};
use crate::kvfile::KvFile;
use crate::polybasis::{eval_jacobi, JacobiIndex};
use crate::real::Real;
use crate::space::{admissible_for, weighted_norm, FunctionHandle, SigmaWeight, Theorem, WeightParams};
use crate::Resolution;

/// Numerical guard: evaluation points must stay this far from the endpoints,
/// where the prefactor 1/sigma(x) degenerates.
const X_MARGIN: f64 = 1e-9;
/// Excess beyond |R| = 1 attributable to rounding; anything larger means the
/// kernel ingredients are inconsistent.
const CLAMP_TOL: f64 = 1e-15;

/// The configurable ingredients of the shift operator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelSpec<T> {
    /// Weight-generating function sigma.
    pub sigma: SigmaWeight<T>,
    /// Jacobi index pair of the eigenfunction family in x.
    pub idx_x: JacobiIndex<T>,
    /// Jacobi index pair of the multiplier family in y = cos t.
    pub idx_y: JacobiIndex<T>,
    /// Exponent e in Co(t) = ((1+cos t)/2)^e; the two printed forms of the
    /// operator force e = 2.
    pub co_exponent: T,
}

impl<T: Real> KernelSpec<T> {
    /// The certified reference transcription.
    pub fn reference() -> Self {
        Self {
            sigma: SigmaWeight::one_minus_x_squared(),
            idx_x: JacobiIndex {
                a: T::of(2.0),
                b: T::of(2.0),
            },
            idx_y: JacobiIndex {
                a: T::zero(),
                b: T::of(4.0),
            },
            co_exponent: T::of(2.0),
        }
    }

    /// Co(t) = ((1 + cos t)/2)^e. Equals 1 at t = 0 for every exponent.
    #[inline]
    pub fn cos_factor(&self, t: T) -> T {
        let half = (T::one() + t.cos()) / T::of(2.0);
        if self.co_exponent == T::of(2.0) {
            half * half
        } else if self.co_exponent == T::zero() {
            T::one()
        } else {
            half.powf(self.co_exponent)
        }
    }

    /// Parse from the flat key-value format.
    ///
    /// Keys: `sigma` (named form or `power`), `sigma_exp_minus` /
    /// `sigma_exp_plus` (for `power`), `co_exponent`, `idx_x_a`, `idx_x_b`,
    /// `idx_y_a`, `idx_y_b`. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = KvFile::parse(text)?;
        const KNOWN: [&str; 8] = [
            "sigma",
            "sigma_exp_minus",
            "sigma_exp_plus",
            "co_exponent",
            "idx_x_a",
            "idx_x_b",
            "idx_y_a",
            "idx_y_b",
        ];
        for key in kv.keys() {
            if !KNOWN.contains(&key) {
                return Err(Error::Config(format!("unknown kernel spec key {:?}", key)));
            }
        }
        let sigma = match kv.get("sigma").unwrap_or("one-minus-x-squared") {
            "one-minus-x-squared" => SigmaWeight::one_minus_x_squared(),
            "one-minus-x" => SigmaWeight::new(T::one(), T::zero())?,
            "one-plus-x" => SigmaWeight::new(T::zero(), T::one())?,
            "power" => {
                let em = kv
                    .get_f64("sigma_exp_minus")?
                    .ok_or_else(|| Error::Config("sigma = power needs sigma_exp_minus".into()))?;
                let ep = kv
                    .get_f64("sigma_exp_plus")?
                    .ok_or_else(|| Error::Config("sigma = power needs sigma_exp_plus".into()))?;
                SigmaWeight::new(T::of(em), T::of(ep))?
            }
            other => {
                return Err(Error::Config(format!("unknown sigma form {:?}", other)));
            }
        };
        let co_exponent = T::of(kv.get_f64("co_exponent")?.unwrap_or(2.0));
        if !(co_exponent >= T::zero()) {
            return Err(Error::Config("co_exponent must be >= 0".into()));
        }
        let get_idx = |ka: &str, kb: &str, da: f64, db: f64| -> Result<JacobiIndex<T>> {
            let a = T::of(kv.get_f64(ka)?.unwrap_or(da));
            let b = T::of(kv.get_f64(kb)?.unwrap_or(db));
            JacobiIndex::new(a, b)
        };
        Ok(Self {
            sigma,
            idx_x: get_idx("idx_x_a", "idx_x_b", 2.0, 2.0)?,
            idx_y: get_idx("idx_y_a", "idx_y_b", 0.0, 4.0)?,
            co_exponent,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical config-file form of this spec.
    pub fn to_config_string(&self) -> String {
        format!(
            "sigma = power\nsigma_exp_minus = {}\nsigma_exp_plus = {}\nco_exponent = {}\n\
             idx_x_a = {}\nidx_x_b = {}\nidx_y_a = {}\nidx_y_b = {}\n",
            self.sigma.exp_minus,
            self.sigma.exp_plus,
            self.co_exponent,
            self.idx_x.a,
            self.idx_x.b,
            self.idx_y.a,
            self.idx_y.b
        )
    }
}

#[inline]
fn clamp_unit<T: Real>(r: T) -> Result<T> {
    let excess = r.abs() - T::one();
    if excess <= T::zero() {
        Ok(r)
    } else if excess <= T::of(CLAMP_TOL) {
        Ok(r.signum())
    } else {
        Err(Error::Transcription(format!(
            "|R| exceeds 1 by {:e}; kernel ingredients are inconsistent",
            excess
        )))
    }
}

/// The shifted evaluation point `R = x cos t - sqrt(1-x^2) sin t cos phi`,
/// clamped into [-1, 1] when rounding pushes it out by at most 1e-15.
pub fn shifted_point<T: Real>(t: T, x: T, phi: T) -> Result<T> {
    if x.abs() > T::one() {
        return Err(Error::Domain(format!("|x| <= 1 required, got {}", x)));
    }
    let sx = ((T::one() - x) * (T::one() + x)).sqrt();
    clamp_unit(x * t.cos() - sx * t.sin() * phi.cos())
}

/// The kernel `B_y(x, z, R)` exactly as printed, with this spec's sigma.
pub fn kernel_weight<T: Real>(spec: &KernelSpec<T>, y: T, x: T, z: T) -> Result<T> {
    for (name, v) in [("x", x), ("y", y), ("z", z)] {
        if v.abs() > T::one() {
            return Err(Error::Domain(format!("|{}| <= 1 required, got {}", name, v)));
        }
    }
    let sx = ((T::one() - x) * (T::one() + x)).sqrt();
    let wy = ((T::one() - y) * (T::one() + y)).sqrt();
    let r = clamp_unit(x * y - sx * wy * z)?;
    let g = sx * y + x * z * wy + sx * (T::one() - y) * spec.sigma.eval(z);
    let b = T::of(2.0) * g * g - spec.sigma.eval(r);
    if !b.is_finite() {
        return Err(Error::NonFinite(format!("kernel at (y={}, x={}, z={})", y, x, z)));
    }
    Ok(b)
}

/// Reusable quadrature state for applying the operator at one fixed t.
///
/// Smooth integrands go through the Gauss-Chebyshev rule in z = cos phi,
/// which is exact when f is a polynomial. If f carries interior singular
/// points, the phi-integral is split where they map into the integration
/// range and each piece gets an endpoint-clustered tanh-sinh rule instead;
/// plain Gauss-Chebyshev would lose the resolution-stability contract on
/// kinked corpus members.
pub struct ShiftEvaluator<T> {
    sigma: SigmaWeight<T>,
    t: T,
    y: T,
    sn: T,
    co: T,
    gc_z: Vec<T>,
    gc_sigma_z: Vec<T>,
    de_u: Vec<T>,
    de_w: Vec<T>,
}

impl<T: Real> ShiftEvaluator<T> {
    pub fn new(spec: &KernelSpec<T>, t: T, nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidParameter("nodes must be >= 1".into()));
        }
        let co = spec.cos_factor(t);
        if !(co >= T::of(1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "cos factor {:e} at t={} is below 1e-12; t must stay away from +-pi",
                co, t
            )));
        }
        let m = nodes;
        let mut gc_z = Vec::with_capacity(m);
        let mut gc_sigma_z = Vec::with_capacity(m);
        for k in 1..=m {
            let z = (T::PI() * (T::of_usize(2 * k) - T::one()) / T::of_usize(2 * m)).cos();
            gc_z.push(z);
            gc_sigma_z.push(spec.sigma.eval(z));
        }
        // tanh-sinh grid on (0, 1), used per panel when splitting is needed
        let n_de = (nodes / 2).max(49) | 1;
        let tau_max = T::of(3.0);
        let h = T::of(2.0) * tau_max / T::of_usize(n_de - 1);
        let half_pi = T::PI() / T::of(2.0);
        let mut de_u = Vec::with_capacity(n_de);
        let mut de_w = Vec::with_capacity(n_de);
        for j in 0..n_de {
            let tau = -tau_max + h * T::of_usize(j);
            let sh = half_pi * tau.sinh();
            let u = (sh.tanh() + T::one()) / T::of(2.0);
            let ch = sh.cosh();
            let w = h * half_pi * tau.cosh() / (ch * ch) / T::of(2.0);
            if u > T::zero() && u < T::one() && w.is_finite() && w > T::zero() {
                de_u.push(u);
                de_w.push(w);
            }
        }
        Ok(Self {
            sigma: spec.sigma,
            t,
            y: t.cos(),
            sn: t.sin().abs(),
            co,
            gc_z,
            gc_sigma_z,
            de_u,
            de_w,
        })
    }

    pub fn cos_factor(&self) -> T {
        self.co
    }

    #[inline]
    fn kernel_term(&self, f: &FunctionHandle<T>, x: T, sx: T, z: T, sigma_z: T) -> Result<T> {
        let r = clamp_unit(x * self.y - sx * self.sn * z)?;
        let g = sx * self.y + x * z * self.sn + sx * (T::one() - self.y) * sigma_z;
        let b = T::of(2.0) * g * g - self.sigma.eval(r);
        Ok(b * f.eval(r))
    }

    fn integral_gauss_chebyshev(&self, f: &FunctionHandle<T>, x: T, sx: T) -> Result<T> {
        let mut sum = T::zero();
        let mut comp = T::zero();
        for (&z, &sz) in self.gc_z.iter().zip(&self.gc_sigma_z) {
            let term = self.kernel_term(f, x, sx, z, sz)?;
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        Ok((sum + comp) * T::PI() / T::of_usize(self.gc_z.len()))
    }

    fn integral_split(&self, f: &FunctionHandle<T>, x: T, sx: T, splits: &[T]) -> Result<T> {
        let mut edges = vec![T::zero()];
        for &phi in splits {
            if phi - *edges.last().unwrap() > T::of(1e-12) && T::PI() - phi > T::of(1e-12) {
                edges.push(phi);
            }
        }
        edges.push(T::PI());
        let mut total = T::zero();
        for pair in edges.windows(2) {
            let (a, len) = (pair[0], pair[1] - pair[0]);
            let mut sum = T::zero();
            let mut comp = T::zero();
            for (&u, &w) in self.de_u.iter().zip(&self.de_w) {
                let phi = a + len * u;
                let z = phi.cos();
                let term = w * self.kernel_term(f, x, sx, z, self.sigma.eval(z))?;
                let t = sum + term;
                comp += if sum.abs() >= term.abs() {
                    (sum - t) + term
                } else {
                    (term - t) + sum
                };
                sum = t;
            }
            total += (sum + comp) * len;
        }
        Ok(total)
    }

    /// Apply the operator without the t = 0 short circuit (the self-test
    /// uses this to certify that the kernel itself collapses to the
    /// identity).
    pub fn eval_raw(&self, f: &FunctionHandle<T>, x: T) -> Result<T> {
        if x.abs() > T::one() - T::of(X_MARGIN) {
            return Err(Error::Domain(format!(
                "apply_shift needs |x| < 1 - 1e-9, got {}",
                x
            )));
        }
        let sx = ((T::one() - x) * (T::one() + x)).sqrt();
        let denom = sx * self.sn;
        let mut splits: Vec<T> = Vec::new();
        if denom > T::of(1e-12) {
            for &s in f.singular_points() {
                let z = (x * self.y - s) / denom;
                if z.abs() < T::one() - T::of(1e-9) {
                    splits.push(z.acos());
                }
            }
            splits.sort_by(|p, q| p.partial_cmp(q).expect("finite split"));
        }
        let integral = if splits.is_empty() {
            self.integral_gauss_chebyshev(f, x, sx)?
        } else {
            self.integral_split(f, x, sx, &splits)?
        };
        let value = integral / (T::PI() * self.sigma.eval(x) * self.co);
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("shift value at (t={}, x={})", self.t, x)));
        }
        Ok(value)
    }

    /// Apply the operator; t = 0 returns f(x) exactly.
    pub fn eval(&self, f: &FunctionHandle<T>, x: T) -> Result<T> {
        if self.t == T::zero() {
            if x.abs() > T::one() - T::of(X_MARGIN) {
                return Err(Error::Domain(format!(
                    "apply_shift needs |x| < 1 - 1e-9, got {}",
                    x
                )));
            }
            return Ok(f.eval(x));
        }
        self.eval_raw(f, x)
    }
}

/// One-shot application of the shift operator at (t, x).
pub fn apply_shift<T: Real>(
    spec: &KernelSpec<T>,
    f: &FunctionHandle<T>,
    t: T,
    x: T,
    nodes: usize,
) -> Result<T> {
    ShiftEvaluator::new(spec, t, nodes)?.eval(f, x)
}

/// Apply the operator with node doubling until the value moves by at most
/// 1e-9; up to four doublings from `base_nodes`. Returns the converged
/// value and the final change.
pub fn apply_shift_converged<T: Real>(
    spec: &KernelSpec<T>,
    f: &FunctionHandle<T>,
    t: T,
    x: T,
    base_nodes: usize,
) -> Result<(T, T)> {
    let mut nodes = base_nodes.max(8);
    let mut prev = apply_shift(spec, f, t, x, nodes)?;
    let mut change = T::infinity();
    for _ in 0..4 {
        nodes *= 2;
        let cur = apply_shift(spec, f, t, x, nodes)?;
        change = (cur - prev).abs();
        if change <= T::of(1e-9) {
            return Ok((cur, change));
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "apply_shift still moved by {:e} after 4 node doublings at (t={}, x={})",
        change, t, x
    )))
}

/// The function `x -> tau_t(f, x)` as a handle. Interior singular points of
/// f surface in the shifted function where they map through the kernel
/// argument at the ends of the z-range, i.e. at `cos(acos(s) -+ t)`.
pub fn shifted_handle<T: Real>(
    spec: &KernelSpec<T>,
    f: &FunctionHandle<T>,
    t: T,
    nodes: usize,
) -> Result<FunctionHandle<T>> {
    let evaluator = ShiftEvaluator::new(spec, t, nodes)?;
    let inner = f.clone();
    let mut singular = Vec::new();
    for &s in f.singular_points() {
        let theta = s.acos();
        for mapped in [(theta - t.abs()).cos(), (theta + t.abs()).cos()] {
            if mapped.abs() < T::one() - T::of(1e-9)
                && singular
                    .iter()
                    .all(|&q: &T| (q - mapped).abs() > T::of(1e-12))
            {
                singular.push(mapped);
            }
        }
    }
    singular.sort_by(|p, q| p.partial_cmp(q).expect("finite point"));
    Ok(
        FunctionHandle::new(format!("shift[t={}]({})", t, f.label()), move |x| {
            evaluator.eval(&inner, x).unwrap_or_else(|_| T::nan())
        })
        .with_singular_points(singular)
        .with_margin(f.eval_margin().max(T::of(X_MARGIN))),
    )
}

/// The difference `x -> tau_t(f, x) - f(x)`, whose norm the modulus of
/// smoothness takes a supremum over.
pub fn shift_difference_handle<T: Real>(
    spec: &KernelSpec<T>,
    f: &FunctionHandle<T>,
    t: T,
    nodes: usize,
) -> Result<FunctionHandle<T>> {
    let shifted = shifted_handle(spec, f, t, nodes)?;
    let inner = f.clone();
    let mut singular = shifted.singular_points().to_vec();
    for &s in f.singular_points() {
        if singular.iter().all(|&q| (q - s).abs() > T::of(1e-12)) {
            singular.push(s);
        }
    }
    singular.sort_by(|p, q| p.partial_cmp(q).expect("finite point"));
    Ok(
        FunctionHandle::new(format!("{}-id", shifted.label()), move |x| {
            shifted.eval(x) - inner.eval(x)
        })
        .with_singular_points(singular)
        .with_margin(f.eval_margin().max(T::of(X_MARGIN))),
    )
}

/// Report of the kernel-certification gate.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SelfTestReport<T> {
    /// Worst |tau_1(f, x) - f(x)| over the probe functions and x grid,
    /// evaluated through the integral (no short circuit).
    pub max_err_identity: T,
    /// Worst |tau_t(1, x) - 1| over the (t, x) grid.
    pub max_err_unit: T,
    /// Worst product-formula error over nu <= 8 and the (t, x) grid.
    pub max_err_product: T,
    pub pass: bool,
}

fn grid<T: Real>(lo: f64, hi: f64, n: usize) -> Vec<T> {
    (0..n)
        .map(|i| T::of(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Certify the transcription of sigma, Co, and the two Jacobi index pairs
/// against the operator's built-in identities: reproduction at t = 0,
/// preservation of constants, and the eigenfunction product formula for
/// nu <= 8. All other suites are meaningless if this gate fails.
///
/// Failures are reported, not raised; internal evaluation errors count as
/// infinite error.
pub fn selftest<T: Real>(spec: &KernelSpec<T>, res: &Resolution) -> SelfTestReport<T> {
    let nodes = res.shift_nodes;
    let xs: Vec<T> = grid(-0.95, 0.95, 20);
    let ts: Vec<T> = grid(-3.0, 3.0, 20);

    let inf = T::infinity();
    let mut max_identity = T::zero();
    let probes: Vec<FunctionHandle<T>> = vec![
        FunctionHandle::new("square", |x: T| x * x),
        FunctionHandle::new("exp", |x: T| x.exp()),
        FunctionHandle::new("abs", |x: T| x.abs()),
    ];
    match ShiftEvaluator::new(spec, T::zero(), nodes) {
        Ok(ev) => {
            for f in &probes {
                for &x in &xs {
                    let err = ev
                        .eval_raw(f, x)
                        .map(|v| (v - f.eval(x)).abs())
                        .unwrap_or(inf);
                    max_identity = max_identity.max(err);
                }
            }
        }
        Err(_) => max_identity = inf,
    }

    let one = FunctionHandle::new("one", |_x: T| T::one());
    let mut max_unit = T::zero();
    for &t in &ts {
        match ShiftEvaluator::new(spec, t, nodes) {
            Ok(ev) => {
                for &x in &xs {
                    let err = ev.eval(&one, x).map(|v| (v - T::one()).abs()).unwrap_or(inf);
                    max_unit = max_unit.max(err);
                }
            }
            Err(_) => max_unit = inf,
        }
    }

    let ts12: Vec<T> = grid(-3.0, 3.0, 12);
    let xs12: Vec<T> = grid(-0.9, 0.9, 12);
    let mut max_product = T::zero();
    for nu in 0..=8usize {
        let idx_x = spec.idx_x;
        let basis = FunctionHandle::new(format!("jacobi_x_{}", nu), move |x: T| {
            eval_jacobi(idx_x, nu, x).unwrap_or_else(|_| T::nan())
        });
        for &t in &ts12 {
            let ev = match ShiftEvaluator::new(spec, t, nodes) {
                Ok(ev) => ev,
                Err(_) => {
                    max_product = inf;
                    continue;
                }
            };
            let multiplier = match eval_jacobi(spec.idx_y, nu, t.cos()) {
                Ok(v) => v,
                Err(_) => {
                    max_product = inf;
                    continue;
                }
            };
            for &x in &xs12 {
                let expected = match eval_jacobi(spec.idx_x, nu, x) {
                    Ok(v) => v * multiplier,
                    Err(_) => {
                        max_product = inf;
                        continue;
                    }
                };
                let err = ev
                    .eval(&basis, x)
                    .map(|v| (v - expected).abs())
                    .unwrap_or(inf);
                max_product = max_product.max(err);
            }
        }
    }

    let tol = T::of(1e-8);
    SelfTestReport {
        max_err_identity: max_identity,
        max_err_unit: max_unit,
        max_err_product: max_product,
        pass: max_identity <= tol && max_unit <= tol && max_product <= tol,
    }
}

/// Result of probing the norm bound `||tau_t f|| <= C / Co(t) ||f||`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport<T> {
    /// Empirical constant: max over the corpus and t grid of
    /// `||tau_t f|| Co(t) / ||f||`.
    pub max_ratio: T,
    pub worst_label: String,
    pub worst_t: T,
}

/// Measure the empirical constant of the operator-norm bound over a corpus
/// and a 21-point t grid in [-3, 3].
pub fn operator_norm_probe<T: Real>(
    spec: &KernelSpec<T>,
    w: &WeightParams<T>,
    corpus: &[FunctionHandle<T>],
    res: &Resolution,
) -> Result<ProbeReport<T>> {
    if !admissible_for(w, Theorem::Jackson) {
        return Err(Error::InvalidParameter(format!(
            "({}) is outside the admissible region of the norm bound",
            w.label()
        )));
    }
    let ts: Vec<T> = grid(-3.0, 3.0, 21);
    let mut report = ProbeReport {
        max_ratio: T::zero(),
        worst_label: String::new(),
        worst_t: T::zero(),
    };
    for f in corpus {
        let base = weighted_norm(f, w, &spec.sigma, res)?;
        if !(base > T::zero()) {
            continue;
        }
        for &t in &ts {
            let shifted = shifted_handle(spec, f, t, res.shift_nodes)?;
            let norm = weighted_norm(&shifted, w, &spec.sigma, res)?;
            let ratio = norm * spec.cos_factor(t) / base;
            if !ratio.is_finite() {
                return Err(Error::NonFinite(format!(
                    "norm ratio for {} at t={}",
                    f.label(),
                    t
                )));
            }
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_label = f.label().to_string();
                report.worst_t = t;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::corpus_member;
    use approx::assert_abs_diff_eq;

    fn spec() -> KernelSpec<f64> {
        KernelSpec::reference()
    }

    fn res() -> Resolution {
        Resolution::default()
    }

    #[test]
    fn shifted_point_examples() {
        assert_abs_diff_eq!(shifted_point(0.0, 0.7, 1.234).unwrap(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(
            shifted_point(std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(shifted_point(0.3, 1.2, 0.0).is_err());
    }

    #[test]
    fn shifted_point_is_angle_addition_at_phi_zero() {
        for theta in [0.1f64, 0.7, 1.9, 2.8] {
            for t in [-1.2f64, -0.4, 0.3, 1.0, 2.0] {
                let r = shifted_point(t, theta.cos(), 0.0).unwrap();
                assert_abs_diff_eq!(r, (theta + t).cos(), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn shifted_point_stays_in_unit_interval() {
        for i in 0..40 {
            for j in 0..40 {
                for k in 0..10 {
                    let t = -3.0 + 6.0 * i as f64 / 39.0;
                    let x = -1.0 + 2.0 * j as f64 / 39.0;
                    let phi = std::f64::consts::PI * k as f64 / 9.0;
                    let r = shifted_point(t, x, phi).unwrap();
                    assert!(r.abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn kernel_weight_at_x_one_collapses() {
        let s = spec();
        for y in [-0.8, 0.0, 0.6] {
            for z in [-0.9, 0.2, 1.0] {
                let b = kernel_weight(&s, y, 1.0, z).unwrap();
                let expected = 2.0 * (z * (1.0f64 - y * y).sqrt()).powi(2) - (1.0 - y * y);
                assert_abs_diff_eq!(b, expected, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn kernel_weight_bounded_on_cube() {
        let s = spec();
        let mut max_abs: f64 = 0.0;
        for i in 0..=60 {
            for j in 0..=60 {
                for k in 0..=60 {
                    let y = -1.0 + i as f64 / 30.0;
                    let x = -1.0 + j as f64 / 30.0;
                    let z = -1.0 + k as f64 / 30.0;
                    max_abs = max_abs.max(kernel_weight(&s, y, x, z).unwrap().abs());
                }
            }
        }
        // interval bound from the printed expression; the dense scan
        // actually tops out at 1
        assert!(max_abs <= 8.0 + 1.0, "max |B| = {}", max_abs);
        assert!(max_abs <= 1.0 + 1e-12, "scan bound regressed: {}", max_abs);
    }

    #[test]
    fn identity_at_t_zero() {
        let f = corpus_member::<f64>("exp_x").unwrap();
        assert_eq!(apply_shift(&spec(), &f, 0.0, 0.3, 256).unwrap(), f.eval(0.3));
        // and through the integral itself
        let ev = ShiftEvaluator::new(&spec(), 0.0, 256).unwrap();
        assert_abs_diff_eq!(ev.eval_raw(&f, 0.3).unwrap(), f.eval(0.3), epsilon = 1e-12);
    }

    #[test]
    fn constants_are_fixed() {
        let one = FunctionHandle::new("one", |_x: f64| 1.0);
        let v = apply_shift(&spec(), &one, 0.8, 0.5, 256).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_monomial_multiplier() {
        // tau maps x to x * (3 cos t - 2); frozen from the symbolic kernel
        let id = FunctionHandle::new("id", |x: f64| x);
        let t = std::f64::consts::FRAC_PI_2; // cos t = 0
        let v = apply_shift(&spec(), &id, t, 0.5, 256).unwrap();
        assert_abs_diff_eq!(v, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_formula_frozen_value() {
        // tau(P2^(2,2))(0.5) at cos t = 0.3 equals P2^(2,2)(0.5) * P2^(0,4)(0.3) = -47/800
        let s = spec();
        let f = FunctionHandle::new("p2", move |x: f64| eval_jacobi(s.idx_x, 2, x).unwrap());
        let t = 0.3f64.acos();
        let v = apply_shift(&s, &f, t, 0.5, 256).unwrap();
        assert_abs_diff_eq!(v, -47.0 / 800.0, epsilon = 1e-12);
    }

    #[test]
    fn linearity() {
        let s = spec();
        let f = FunctionHandle::new("square", |x: f64| x * x);
        let g = FunctionHandle::new("exp", |x: f64| x.exp());
        let combo = f.scaled(1.75).plus(&g.scaled(-0.4));
        for (t, x) in [(0.3, 0.2), (1.1, -0.6), (2.4, 0.85)] {
            let lhs = apply_shift(&s, &combo, t, x, 256).unwrap();
            let rhs = 1.75 * apply_shift(&s, &f, t, x, 256).unwrap()
                - 0.4 * apply_shift(&s, &g, t, x, 256).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn resolution_doubling_is_stable_on_corpus() {
        let s = spec();
        for label in ["abs_x_pow_0.5", "abs_x_minus_half_pow_1.5", "trunc_pow_1", "exp_x"] {
            let f = corpus_member::<f64>(label).unwrap();
            for (t, x) in [(0.7, 0.37), (1.9, -0.52)] {
                let lo = apply_shift(&s, &f, t, x, 256).unwrap();
                let hi = apply_shift(&s, &f, t, x, 512).unwrap();
                assert!(
                    (lo - hi).abs() <= 1e-9,
                    "{} at (t={}, x={}): {} vs {}",
                    label,
                    t,
                    x,
                    lo,
                    hi
                );
            }
        }
    }

    #[test]
    fn converged_application() {
        let s = spec();
        let f = corpus_member::<f64>("abs_x_pow_0.5").unwrap();
        let (v, change) = apply_shift_converged(&s, &f, 0.9, 0.4, 64).unwrap();
        assert!(change <= 1e-9);
        assert!(v.is_finite());
    }

    #[test]
    fn rejects_endpoint_evaluation() {
        let f = FunctionHandle::new("one", |_x: f64| 1.0);
        assert!(apply_shift(&spec(), &f, 0.5, 1.0 - 1e-12, 64).is_err());
        assert!(ShiftEvaluator::new(&spec(), std::f64::consts::PI - 1e-9, 64).is_err());
    }

    #[test]
    fn selftest_certifies_reference() {
        let report = selftest(&spec(), &res());
        assert!(report.pass, "{:?}", report);
        assert!(report.max_err_identity <= 1e-10);
        assert!(report.max_err_unit <= 1e-10);
        assert!(report.max_err_product <= 1e-8);
    }

    #[test]
    fn selftest_rejects_squared_sigma() {
        let mut bad = spec();
        bad.sigma = SigmaWeight::new(2.0, 2.0).unwrap();
        let report = selftest(&bad, &res());
        assert!(!report.pass);
        assert!(report.max_err_unit > 1e-8);
    }

    #[test]
    fn selftest_rejects_constant_cos_factor() {
        let mut bad = spec();
        bad.co_exponent = 0.0;
        let report = selftest(&bad, &res());
        assert!(!report.pass);
        assert!(report.max_err_unit > 1e-8);
        // the identity at t = 0 is insensitive to the cos factor
        assert!(report.max_err_identity <= 1e-10);
    }

    #[test]
    fn selftest_rejects_shifted_y_family() {
        let mut bad = spec();
        bad.idx_y = JacobiIndex::new(1.0, 5.0).unwrap();
        let report = selftest(&bad, &res());
        assert!(!report.pass);
        assert!(report.max_err_product > 1e-8);
        assert!(report.max_err_unit <= 1e-10);
    }

    #[test]
    fn parse_roundtrip_and_defaults() {
        let s = KernelSpec::<f64>::parse("").unwrap();
        assert_eq!(s, KernelSpec::reference());
        let s2 = KernelSpec::<f64>::parse(&s.to_config_string()).unwrap();
        assert_eq!(s2, s);
        let named = KernelSpec::<f64>::parse("sigma = one-minus-x\n").unwrap();
        assert_eq!(named.sigma.exp_minus, 1.0);
        assert_eq!(named.sigma.exp_plus, 0.0);
        assert!(KernelSpec::<f64>::parse("sigma = mystery\n").is_err());
        assert!(KernelSpec::<f64>::parse("bogus_key = 1\n").is_err());
        assert!(KernelSpec::<f64>::parse("idx_x_a = -2\n").is_err());
    }

    #[test]
    fn probe_on_constants_is_one() {
        let ones = vec![FunctionHandle::new("c", |_x: f64| 2.5)];
        let w = WeightParams::sup(1.0);
        let small = Resolution {
            sup_samples: 257,
            ..res()
        };
        let report = operator_norm_probe(&spec(), &w, &ones, &small).unwrap();
        assert_abs_diff_eq!(report.max_ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn probe_matches_product_formula_on_first_eigenfunction() {
        let s = spec();
        let f = FunctionHandle::new("p1", move |x: f64| x);
        let w = WeightParams::sup(1.0);
        let small = Resolution {
            sup_samples: 513,
            ..res()
        };
        let report = operator_norm_probe(&s, &w, &[f], &small).unwrap();
        // ratio at t is |P1^(0,4)(cos t)| * Co(t); maximize over the same grid
        let expected = (0..21)
            .map(|i| {
                let t = -3.0 + 6.0 * i as f64 / 20.0;
                (3.0 * t.cos() - 2.0).abs() * s.cos_factor(t)
            })
            .fold(0.0f64, f64::max);
        assert_abs_diff_eq!(report.max_ratio, expected, epsilon = 1e-6);
    }

    #[test]
    fn probe_rejects_inadmissible_weight() {
        let w = WeightParams::new(2.0, 0.1).unwrap();
        assert!(operator_norm_probe(&spec(), &w, &[], &res()).is_err());
    }
}
