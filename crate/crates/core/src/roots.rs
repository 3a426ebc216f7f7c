//! Bracketed bisection and golden-section search.
//!
//! Every target function this crate needs to invert is monotone on its
//! bracket, so bisection is guaranteed-correct; golden section handles the
//! one objective with no closed-form minimizer.

use crate::error::{Error, Result};

pub const MAX_ITER: usize = 200;

/// Root of `f` on `[lo, hi]`, requiring a sign change. Runs until the bracket
/// collapses below `tol` (absolute, on the argument) or `MAX_ITER` halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimizer of a unimodal `f` on `[lo, hi]` by golden-section search,
/// refined until the bracket is below `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.6180339887498949;
    let (mut lo, mut hi) = (lo, hi);
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The boundary may dominate when the true minimizer is an endpoint.
    let candidates = [lo, mid, hi];
    let mut best = mid;
    let mut fbest = f64::INFINITY;
    for &a in &candidates {
        let v = f(a);
        if v < fbest {
            fbest = v;
            best = a;
        }
    }
    best
}
