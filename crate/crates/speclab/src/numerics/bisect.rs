//! Sign-change scanning and bisection.
//!
//! Used wherever the crate needs certified scalar roots: Bessel-derivative
//! zeros for the disk reference spectrum, analytic zero audits of oscillating
//! profiles, and threshold calibration.  Bisection is slow but its bracket is
//! a proof: the root lies inside to the returned width.

use crate::{Error, Result};

/// Find all sign-change brackets of `f` on `[a, b]` from an `n`-point uniform
/// scan.  Points where `f` is exactly zero are returned as degenerate
/// brackets `(x, x)`.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "scan needs at least two points");
    let mut out = Vec::new();
    let h = (b - a) / (n - 1) as f64;
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..n {
        let x = a + h * i as f64;
        let fx = f(x);
        if f_prev == 0.0 {
            out.push((x_prev, x_prev));
        } else if f_prev * fx < 0.0 {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        out.push((x_prev, x_prev));
    }
    out
}

/// Bisect `f` on the bracket `[lo, hi]` (must have `f(lo)·f(hi) ≤ 0`) until
/// the bracket width falls below `tol`.  Returns the bracket midpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::invalid(format!(
            "bisect: no sign change on [{lo}, {hi}] (f = {flo:.3e}, {fhi:.3e})"
        )));
    }
    // 200 halvings would shrink any finite bracket below f64 resolution; the
    // loop exits long before on the tolerance test.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}
