//! Scalar root finding and unimodal search.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximise a unimodal `f` on `[lo, hi]`. Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol {
            break;
        }
        if fc >= fd {
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
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimise a unimodal `f` on `[lo, hi]`. Returns `(argmin, min)`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    xtol: f64,
    max_iter: usize,
) -> (f64, f64) {
    let (x, v) = golden_section_max(|t| -f(t), lo, hi, xtol, max_iter);
    (x, -v)
}

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must differ in sign
/// (zero counts as either sign).
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence {
            context: "bisection without a sign change",
            iterations: 0,
            residual: flo.abs().min(fhi.abs()),
        });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok(mid);
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
    }
    Ok(0.5 * (lo + hi))
}

/// Solve `g(x) = target` for `x > 0`, where `g` is positive and strictly increasing
/// on `(0, inf)`. `g` returns the value and its derivative.
///
/// Works on `ln g(e^u)`, which is piecewise linear for power laws, with a
/// Newton step safeguarded by a bisection bracket.
pub fn solve_increasing<G: FnMut(f64) -> (f64, f64)>(
    mut g: G,
    target: f64,
    guess: f64,
) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!("must be positive, got {target}"),
        });
    }
    let lt = target.ln();
    let mut h = |u: f64| -> (f64, f64) {
        let x = u.exp();
        let (v, dv) = g(x);
        (v.ln() - lt, x * dv / v)
    };

    let mut u = if guess > 0.0 && guess.is_finite() { guess.ln() } else { 0.0 };
    let hu = h(u).0;
    let (mut lo, mut hi);
    // bracket by stepping in log space
    let step = 4.0;
    if hu < 0.0 {
        lo = u;
        let mut k = 0;
        loop {
            let v = u + step;
            let (hv, _) = h(v);
            if hv >= 0.0 {
                hi = v;
                break;
            }
            lo = v;
            u = v;
            k += 1;
            if k > 150 || !hv.is_finite() {
                return Err(Error::BracketOverflow {
                    bound: v.exp(),
                    context: "increasing equation (upper side)",
                });
            }
        }
    } else {
        hi = u;
        let mut k = 0;
        loop {
            let v = u - step;
            let (hv, _) = h(v);
            if hv <= 0.0 {
                lo = v;
                break;
            }
            hi = v;
            u = v;
            k += 1;
            if k > 150 || !hv.is_finite() {
                return Err(Error::BracketOverflow {
                    bound: v.exp(),
                    context: "increasing equation (lower side)",
                });
            }
        }
    }

    u = 0.5 * (lo + hi);
    let (mut hu, mut du) = h(u);
    for _ in 0..200 {
        if hu == 0.0 {
            return Ok(u.exp());
        }
        if hu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = if du > 0.0 && du.is_finite() { u - hu / du } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let dx = (next - u).abs();
        u = next;
        (hu, du) = h(u);
        if dx <= 4.0 * f64::EPSILON * u.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * u.abs().max(1.0) {
            return Ok(u.exp());
        }
    }
    Err(Error::NoConvergence {
        context: "increasing equation",
        iterations: 200,
        residual: hu.abs(),
    })
}
