//! Root finding for increasing functions.
//!
//! The solver keeps a bracket `lo < x* <= hi` that monotonicity makes
//! trivially valid, and takes Newton steps whenever they stay inside it,
//! falling back to bisection otherwise. This converges quadratically on
//! the smooth maps we handle, while the bracket guarantees termination.

/// Outcome of [`solve_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Solve `f(x) = y` for an increasing `f` with derivative `df`.
///
/// `jet(x)` returns `(f(x), f'(x))`. Iteration stops once the residual is
/// zero or the iterate stalls at machine resolution; the caller decides
/// whether the final residual is acceptable.
pub fn solve_increasing<F>(jet: F, y: f64, guess: f64, max_iter: usize) -> Solution
where
    F: Fn(f64) -> (f64, f64),
{
    let mut x = guess;
    let (mut fx, mut dfx) = jet(x);
    if fx == y {
        return Solution { x, residual: 0.0, iterations: 0 };
    }

    // Grow a bracket around the guess.
    let mut step = (fx - y).abs().max(1e-6);
    let (mut lo, mut hi) = if fx < y { (x, x + step) } else { (x - step, x) };
    for _ in 0..200 {
        if fx < y {
            let (fh, _) = jet(hi);
            if fh >= y {
                break;
            }
            lo = hi;
            step *= 2.0;
            hi = lo + step;
        } else {
            let (fl, _) = jet(lo);
            if fl < y {
                break;
            }
            hi = lo;
            step *= 2.0;
            lo = hi - step;
        }
    }

    let mut best = Solution { x, residual: (fx - y).abs(), iterations: 0 };
    for it in 1..=max_iter {
        let r = fx - y;
        if r == 0.0 {
            return Solution { x, residual: 0.0, iterations: it };
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - r / dfx;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let scale = x.abs().max(1.0) * f64::EPSILON;
        let stalled = (next - x).abs() <= scale || hi - lo <= 2.0 * scale;
        x = next;
        let jx = jet(x);
        fx = jx.0;
        dfx = jx.1;
        let res = (fx - y).abs();
        if res <= best.residual {
            best = Solution { x, residual: res, iterations: it };
        }
        if stalled {
            best.iterations = it;
            return best;
        }
    }
    best.iterations = max_iter;
    best
}
