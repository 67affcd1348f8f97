//! Bracketed scalar root finding and one-dimensional maximization.

use crate::error::{Error, Result};

/// Brent's method: inverse quadratic interpolation and secant steps
/// safeguarded by bisection.
///
/// `f(a)` and `f(b)` must have opposite signs (or one of them be zero).
/// Terminates when the bracket is narrower than `xtol + rtol * |x|`.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, rtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    brent_with_values(f, a, fa, b, fb, xtol, rtol, max_iter)
}

#[allow(clippy::too_many_arguments)]
pub fn brent_with_values<F>(
    mut f: F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    xtol: f64,
    rtol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite bracket values f({a})={fa}, f({b})={fb}"
        )));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{a}, {b}]: f = ({fa:e}, {fb:e})"
        )));
    }

    // Hairer/Brent zeroin layout: b is the best estimate, c the contrapoint.
    let (mut a, mut fa, mut b, mut fb) = (a, fa, b, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Numerical(format!("non-finite value f({b})")));
        }
    }
    Err(Error::Numerical(format!(
        "root finder did not converge in {max_iter} iterations"
    )))
}

/// Grows `hi` geometrically from `start` until `f(hi) >= target`, then
/// solves `f(x) = target` on `[lo, hi]` for a non-decreasing `f`.
pub fn solve_increasing<F>(mut f: F, target: f64, lo: f64, start: f64, limit: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = f(lo) - target;
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    let mut prev = lo;
    let mut hi = start.max(lo);
    let mut f_hi = f(hi) - target;
    while f_hi < 0.0 {
        if hi >= limit {
            return Err(Error::Domain(format!(
                "no solution below {limit:e} for target {target:e}"
            )));
        }
        prev = hi;
        hi = (hi * 4.0).min(limit);
        f_hi = f(hi) - target;
        if f_hi.is_nan() {
            return Err(Error::Numerical(format!("non-finite value at {hi:e}")));
        }
    }
    let f_prev = f(prev) - target;
    brent_with_values(|x| f(x) - target, prev, f_prev, hi, f_hi, 0.0, 4.0 * f64::EPSILON, 200)
}

/// Golden-section search for a maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) {
            break;
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_sqrt_two() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 0.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn brent_rejects_same_sign() {
        let err = brent(|x| x * x + 1.0, -1.0, 1.0, 0.0, 1e-12, 100).unwrap_err();
        assert_eq!(err.name(), "BracketError");
    }

    #[test]
    fn brent_handles_steep_functions() {
        let r = brent(|x: f64| (x - 0.3).powi(3) * 1e6, -5.0, 7.0, 0.0, 1e-15, 200).unwrap();
        assert!((r - 0.3).abs() < 1e-5);
    }

    #[test]
    fn solve_increasing_grows_bracket() {
        let x = solve_increasing(|x| x * x * x, 1e6, 0.0, 1.0, 1e300).unwrap();
        assert!((x - 100.0).abs() < 1e-12);
    }

    #[test]
    fn golden_max_of_parabola() {
        let (x, fx) = golden_max(|x| -(x - 0.7) * (x - 0.7) + 2.0, 0.0, 3.0, 200);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-14);
    }
}
