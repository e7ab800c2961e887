//! Bracketed Newton iteration for strictly increasing functions.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Root<T> {
    pub x: T,
}

/// Finds the zero of a strictly increasing `g` inside `[lo, hi]`.
///
/// `eval(x)` returns `(g(x), g'(x))`. The caller guarantees
/// `g(lo) <= 0 <= g(hi)`. Newton steps that leave the current bracket are
/// replaced by bisection. On failure the size of the last step is returned.
pub(crate) fn increasing_root<T, F>(
    mut eval: F,
    mut lo: T,
    mut hi: T,
    tol: T,
    max_iter: usize,
) -> Result<Root<T>, T>
where
    T: Real,
    F: FnMut(T) -> (T, T),
{
    let half = T::lit(0.5);
    let mut x = half * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..max_iter {
        let (g, dg) = eval(x);
        if g == T::zero() {
            return Ok(Root { x });
        }
        if g < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - g / dg;
        if !(dg > T::zero()) || !next.is_finite() || next < lo || next > hi {
            next = half * (lo + hi);
        }
        last_step = (next - x).abs();
        if last_step <= tol || hi - lo <= tol {
            return Ok(Root { x: next });
        }
        x = next;
    }
    Err(last_step)
}
