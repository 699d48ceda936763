//! Golden-section maximization on an interval. Deterministic.

use crate::real::Real;

/// Maximize `f` on `[lo, hi]`; returns the best abscissa/value pair seen.
/// Stops when the bracket shrinks below `xtol` or after `max_iters` steps.
pub(crate) fn golden_max<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    xtol: T,
    max_iters: usize,
) -> (T, T) {
    debug_assert!(lo <= hi);
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..max_iters {
        if hi - lo <= xtol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if f1 > best_f {
            best_x = x1;
            best_f = f1;
        }
        if f2 > best_f {
            best_x = x2;
            best_f = f2;
        }
    }
    (best_x, best_f)
}
