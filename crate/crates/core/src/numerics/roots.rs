//! Scalar root finding: bracket scans and bisection.

use crate::{Error, Result};

/// Bisection on a sign-changing bracket. `f(a)` and `f(b)` must have
/// opposite signs.
pub fn bisect(f: &mut impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence {
            what: "bisect".into(),
            detail: format!("no sign change on [{a}, {b}]"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scan `[a, b]` on `n` uniform nodes and bisect every sign change.
/// Returns the refined roots in increasing order.
pub fn scan_and_bisect(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut prev_t = a;
    let mut prev_v = f(a);
    for j in 1..=n {
        let t = a + (b - a) * j as f64 / n as f64;
        let v = f(t);
        if prev_v == 0.0 {
            roots.push(prev_t);
        } else if prev_v.signum() != v.signum() && v != 0.0 {
            roots.push(bisect(f, prev_t, t, tol)?);
        }
        prev_t = t;
        prev_v = v;
    }
    if prev_v == 0.0 {
        roots.push(prev_t);
    }
    Ok(roots)
}
