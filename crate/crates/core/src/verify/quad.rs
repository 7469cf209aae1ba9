//! Adaptive Gauss-Kronrod (7/15) quadrature with forced breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of panel error estimates |K15 - G7|.
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    /// Relative floor on the target, so large integrals are not asked for
    /// more digits than a double holds.
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-9,
            rel_tol: 1e-13,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrate `f` over `[a, b]` with default options and absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> Result<Integral> {
    integrate_with(f, a, b, breakpoints, &QuadOptions::with_tol(tol))
}

pub fn integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "domain",
            reason: format!("non-finite interval [{a}, {b}]"),
        });
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p.is_finite() && p > lo && p < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evals = 0usize;
    for w in edges.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evals += 15;
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    let target = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    let mut best = (value, error);
    let mut frozen: Vec<Panel> = Vec::new();
    while error > target(value) {
        if !error.is_finite() || !value.is_finite() {
            return Err(Error::Quadrature {
                tol: opts.abs_tol,
                estimate: error,
            });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                tol: opts.abs_tol,
                estimate: best.1,
            });
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) < 1e-15 * (hi - lo) {
            // cannot refine further; keep it out of the queue
            frozen.push(p);
            continue;
        }
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        evals += 30;
        value += v1 + v2 - p.value;
        error += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
        if error < best.1 {
            best = (value, error);
        }
    }
    // re-sum for a clean value
    let mut v_sum = 0.0;
    let mut e_sum = 0.0;
    let panels = heap.len() + frozen.len();
    for p in heap.into_iter().chain(frozen) {
        v_sum += p.value;
        e_sum += p.error;
    }
    if e_sum <= best.1 {
        best = (v_sum, e_sum);
    }
    if best.1 > target(best.0) {
        return Err(Error::Quadrature {
            tol: opts.abs_tol,
            estimate: best.1,
        });
    }
    Ok(Integral {
        value: sign * best.0,
        error: best.1,
        panels,
        evaluations: evals,
    })
}

/// Iterated integral of `f(x, y)` for `x` in `[x0, x1]` and `y` in `y_range(x)`,
/// with breakpoints in each direction. `f` may fail; the first failure is returned.
pub fn integrate_2d<F, R, B>(
    mut f: F,
    x0: f64,
    x1: f64,
    x_breaks: &[f64],
    mut y_range: R,
    mut y_breaks: B,
    tol: f64,
) -> Result<Integral>
where
    F: FnMut(f64, f64) -> Result<f64>,
    R: FnMut(f64) -> (f64, f64),
    B: FnMut(f64) -> Vec<f64>,
{
    let width = (x1 - x0).abs().max(1e-300);
    let inner_tol = 0.1 * tol / width;
    let mut failure: Option<Error> = None;
    let mut inner_err: f64 = 0.0;
    let mut evals = 0;
    let outer = integrate(
        |x| {
            if failure.is_some() {
                return 0.0;
            }
            let (y0, y1) = y_range(x);
            let bp = y_breaks(x);
            let mut inner_failure = None;
            let r = integrate(
                |y| match f(x, y) {
                    Ok(v) => v,
                    Err(e) => {
                        if inner_failure.is_none() {
                            inner_failure = Some(e);
                        }
                        0.0
                    }
                },
                y0,
                y1,
                &bp,
                inner_tol,
            );
            if let Some(e) = inner_failure {
                failure = Some(e);
                return 0.0;
            }
            match r {
                Ok(i) => {
                    inner_err = inner_err.max(i.error);
                    evals += i.evaluations;
                    i.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        x0,
        x1,
        x_breaks,
        0.9 * tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let o = outer?;
    Ok(Integral {
        value: o.value,
        error: o.error + inner_err * width,
        panels: o.panels,
        evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_normalises() {
        let i = integrate(|t| 2.0 * (1.0 - t), 0.0, 1.0, &[], 1e-12).unwrap();
        assert!((i.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kinked_function_with_breakpoint() {
        // |t - 0.3|^1.5 has antiderivative pieces
        let f = |t: f64| (t - 0.3).abs().powf(1.5);
        let exact = (0.3f64.powf(2.5) + 0.7f64.powf(2.5)) / 2.5;
        let i = integrate(f, 0.0, 1.0, &[0.3], 1e-12).unwrap();
        assert!((i.value - exact).abs() < 1e-10, "{}", i.value - exact);
    }

    #[test]
    fn zero_and_reversed() {
        let i = integrate(|_| 0.0, 0.0, 3.0, &[], 1e-9).unwrap();
        assert_eq!(i.value, 0.0);
        let a = integrate(|t| t * t, 0.0, 2.0, &[], 1e-12).unwrap();
        let b = integrate(|t| t * t, 2.0, 0.0, &[], 1e-12).unwrap();
        assert!((a.value + b.value).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let i = integrate(|t| t.sqrt(), 0.0, 1.0, &[], 1e-11).unwrap();
        assert!((i.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_panels: 3,
        };
        let r = integrate_with(|t| (1.0 / t.max(1e-300)).sqrt(), 0.0, 1.0, &[], &opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn triangle_2d() {
        // area under y <= x on [0,1]
        let i = integrate_2d(|_, _| Ok(1.0), 0.0, 1.0, &[], |x| (0.0, x), |_| vec![], 1e-10).unwrap();
        assert!((i.value - 0.5).abs() < 1e-12);
    }
}
