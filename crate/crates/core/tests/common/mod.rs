//! Closed forms of the uniform symmetric family (`alpha = beta = gamma = rho`,
//! all token costs `c`, base 1, independent uniform value and scale) shared by
//! the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::Rng;
use tokenscreen::model::{CostRates, ProductionParams, TaskProfile};

#[derive(Debug, Clone, Copy)]
pub struct Sym {
    pub rho: f64,
    pub c: f64,
}

/// Allocation-menu quantities at one type: per-task `x = y`, fine-tuning `z`
/// above the base, transfer and the two-part tariff.
#[derive(Debug, Clone, Copy, Default)]
pub struct Point {
    pub q: f64,
    pub x: f64,
    pub z: f64,
    pub t: f64,
    pub price: f64,
    pub p0: f64,
}

impl Sym {
    pub const EXAMPLE: Sym = Sym { rho: 0.25, c: 0.125 };

    pub fn params(&self) -> ProductionParams {
        ProductionParams::symmetric(self.rho, 1.0).unwrap()
    }

    pub fn costs(&self) -> CostRates {
        CostRates::uniform(self.c).unwrap()
    }

    fn a(&self, w: f64) -> f64 {
        (2.0 * w - 1.0) * self.rho / self.c
    }

    /// Value above which scale-`s` types fine-tune.
    pub fn frontier(&self, s: f64) -> f64 {
        0.5 * (1.0 + self.c / self.rho * s.powf(-(1.0 - 2.0 * self.rho)))
    }

    /// Self-consistent closed forms; `None` below the exclusion point.
    pub fn point(&self, w: f64, s: f64) -> Option<Point> {
        if w <= 0.5 {
            return None;
        }
        let (r, c) = (self.rho, self.c);
        let a = self.a(w);
        let price = w * c / (2.0 * w - 1.0);
        Some(if w <= self.frontier(s) {
            let q = s * a.powf(2.0 * r / (1.0 - 2.0 * r));
            let x = a.powf(1.0 / (1.0 - 2.0 * r));
            let t = q * (0.5 + (2.0 * w - 1.0) * r);
            Point {
                q,
                x,
                z: 0.0,
                t,
                price,
                p0: t - price * 2.0 * s * x,
            }
        } else {
            let e = 1.0 / (1.0 - 3.0 * r);
            let q = s.powf((1.0 - 2.0 * r) * e) * a.powf(3.0 * r * e);
            let x = s.powf(r * e) * a.powf(e);
            let t = -c / 2.0 + q * (0.5 + 1.5 * (2.0 * w - 1.0) * r);
            Point {
                q,
                x,
                z: s * x - 1.0,
                t,
                price,
                p0: t - price * (3.0 * s * x - 1.0),
            }
        })
    }

    /// Reference token and fee formulas for the family. They agree with
    /// [`Sym::point`] on quality and transfer; tokens differ off `s = 1` and the
    /// fine-tuning fee omits the markup on the free base tokens.
    pub fn printed(&self, w: f64, s: f64) -> Option<Point> {
        if w <= 0.5 {
            return None;
        }
        let (r, c) = (self.rho, self.c);
        let a = self.a(w);
        let price = w * c / (2.0 * w - 1.0);
        Some(if w <= self.frontier(s) {
            let e = 1.0 / (1.0 - 2.0 * r);
            let q = s * a.powf(2.0 * r * e);
            Point {
                q,
                x: s.powf(1.0 / (2.0 * r)) * a.powf(e),
                z: 0.0,
                t: q * (0.5 + (2.0 * w - 1.0) * r),
                price,
                p0: s * ((0.5 + (2.0 * w - 1.0) * r) * a.powf(2.0 * r * e) - 2.0 * price * a.powf(e)),
            }
        } else {
            let e = 1.0 / (1.0 - 3.0 * r);
            let sq = s.powf((1.0 - 2.0 * r) * e);
            let q = sq * a.powf(3.0 * r * e);
            let d = 3.0 * r * (1.0 - 3.0 * r);
            Point {
                q,
                x: s.powf((1.0 - 3.0 * r + 3.0 * r * r) / d) * a.powf(e),
                z: s.powf((1.0 - 6.0 * r * r) / d) * a.powf(e) - 1.0,
                t: -c / 2.0 + q * (0.5 + 1.5 * (2.0 * w - 1.0) * r),
                price,
                p0: -c / 2.0 + sq * ((0.5 + 1.5 * (2.0 * w - 1.0) * r) * a.powf(3.0 * r * e) - 3.0 * price * a.powf(e)),
            }
        })
    }
}

/// Package menu of the `rho = 1/4` family: `(Q, X = Y, Z, T, p0)` at `theta`.
pub fn package_quarter(c: f64, theta: f64) -> Option<(f64, f64, f64, f64, f64)> {
    if theta <= 1.0 / 3.0 {
        return None;
    }
    let phi = (3.0 * theta - 1.0) / 2.0;
    let hat = 1.0 / 3.0 + 8.0 * c / 3.0;
    let m = theta / phi;
    if theta <= hat {
        // phi = C'(Q) = 4c Q
        let q = phi / (4.0 * c);
        let x = q * q;
        // rent is the integral of Q from 1/3
        let rent = 3.0 * (theta - 1.0 / 3.0).powi(2) / (16.0 * c);
        let t = theta * q - rent;
        Some((q, x, 0.0, t, t - m * 2.0 * c * x))
    } else {
        // phi = C'(Q) = 4c Q^{1/3}
        let q = (phi / (4.0 * c)).powi(3);
        let x = q.powf(4.0 / 3.0);
        let r_hat = 3.0 * (hat - 1.0 / 3.0).powi(2) / (16.0 * c);
        // integral of ((3k - 1) / (8c))^3 from hat to theta
        let rent = r_hat + ((3.0 * theta - 1.0).powi(4) - (3.0 * hat - 1.0).powi(4)) / (12.0 * (8.0 * c).powi(3));
        let t = theta * q - rent;
        Some((q, x, x - 1.0, t, t - m * (3.0 * c * x - c)))
    }
}

/// Random profile with 1..=`max_segments` segments and values in `[0, 1]`.
pub fn random_profile<R: Rng>(rng: &mut R, max_segments: usize) -> TaskProfile {
    let n = rng.gen_range(1..=max_segments);
    let mut lengths: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = lengths.iter().sum();
    lengths.iter_mut().for_each(|l| *l /= total);
    let head: f64 = lengths[..n - 1].iter().sum();
    lengths[n - 1] = 1.0 - head;
    let pairs: Vec<(f64, f64)> = lengths
        .into_iter()
        .map(|l| (l, if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..1.0) }))
        .collect();
    TaskProfile::from_pairs(&pairs).unwrap()
}

/// Exponents with `alpha + beta + gamma <= 0.9` and costs, base in moderate ranges.
pub fn random_model<R: Rng>(rng: &mut R) -> (ProductionParams, CostRates) {
    loop {
        let a = rng.gen_range(0.05..0.45);
        let b = rng.gen_range(0.05..0.45);
        let g = rng.gen_range(0.02..0.45);
        if a + b + g > 0.9 {
            continue;
        }
        let base = rng.gen_range(0.2..3.0);
        let p = ProductionParams::new(a, b, g, base).unwrap();
        let c = CostRates::new(rng.gen_range(0.02..1.0), rng.gen_range(0.02..1.0), rng.gen_range(0.02..1.0)).unwrap();
        return (p, c);
    }
}

pub fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Revenue and profit of the best two-type menu found by search.
///
/// Each candidate pair of bundles gets its largest incentive-compatible,
/// individually rational transfers. Bundles range over the efficient bundle of
/// either type and efficient bundles of the other type's distorted profile
/// `w_j - lambda (w_i - w_j)`, clipped at zero, for `lambda` on a grid refined
/// by golden section, plus exclusion of either type.
pub fn binary_oracle(
    p1: &TaskProfile,
    p2: &TaskProfile,
    f1: f64,
    params: &ProductionParams,
    costs: &CostRates,
) -> (f64, f64) {
    use tokenscreen::efficient::{efficient_allocation, EfficientPlan};
    use tokenscreen::screening::binary::{plan_cost, plan_value};
    use tokenscreen::verify::search::golden_section_max;

    let (a, b) = TaskProfile::align(p1, p2);
    let f = [f1, 1.0 - f1];
    let prof = [&a, &b];
    let eval = |plans: [Option<&EfficientPlan>; 2]| -> (f64, f64) {
        let v = |i: usize, j: usize| plans[j].map_or(0.0, |pl| plan_value(pl, prof[i], params));
        let (v11, v12, v21, v22) = (v(0, 0), v(0, 1), v(1, 0), v(1, 1));
        let (d1, d2) = (v11 - v12, v22 - v21);
        if d1 + d2 < -1e-12 * (v11.abs() + v22.abs()).max(1.0) {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        // greatest transfers meeting t1 <= min(v11, t2 + d1), t2 <= min(v22, t1 + d2)
        let t1 = v11.min(v22 + d1);
        let t2 = v22.min(v11 + d2);
        let c = |j: usize| plans[j].map_or(0.0, |pl| plan_cost(pl, prof[j], costs));
        let rev = f[0] * t1 + f[1] * t2;
        (rev, rev - f[0] * c(0) - f[1] * c(1))
    };
    let eff = [efficient_allocation(&a, params, costs), efficient_allocation(&b, params, costs)];
    let mut best = eval([Some(&eff[0]), Some(&eff[1])]);
    for cand in [eval([Some(&eff[0]), None]), eval([None, Some(&eff[1])])] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    for i in 0..2 {
        let j = 1 - i;
        let distorted = |lambda: f64| {
            let segs: Vec<(f64, f64)> = prof[i]
                .segments()
                .iter()
                .zip(prof[j].segments())
                .map(|(si, sj)| (sj.length, (sj.value - lambda * (si.value - sj.value)).max(0.0)))
                .collect();
            let pj = efficient_allocation(&TaskProfile::from_pairs(&segs).unwrap(), params, costs);
            let mut plans = [Some(&eff[0]), Some(&eff[1])];
            plans[j] = Some(&pj);
            eval(plans)
        };
        let top = f[i] / f[j];
        let n = 400;
        let grid: Vec<(f64, f64)> = (0..=n).map(|k| distorted(top * k as f64 / n as f64)).collect();
        let k = (0..=n).max_by(|&x, &y| grid[x].1.total_cmp(&grid[y].1)).unwrap();
        let lo = top * k.saturating_sub(1) as f64 / n as f64;
        let hi = top * (k + 1).min(n) as f64 / n as f64;
        let (lam, _) = golden_section_max(|l| distorted(l).1, lo, hi, 1e-13, 200);
        for cand in [grid[k], distorted(lam)] {
            if cand.1 > best.1 {
                best = cand;
            }
        }
    }
    best
}

/// Buyer utility from totals `(x, y, z)` by pairwise reallocation between
/// segments until no transfer helps.
pub fn split_brute_force(x: f64, y: f64, z: f64, profile: &TaskProfile, params: &ProductionParams) -> f64 {
    use tokenscreen::model::precision;
    use tokenscreen::verify::search::golden_section_max;

    let segs = profile.segments();
    let n = segs.len();
    let mut xs = vec![x; n];
    let mut ys = vec![y; n];
    let v = |xi: f64, yi: f64, k: usize| segs[k].length * segs[k].value * precision(params, xi.max(0.0), yi.max(0.0), z).unwrap();
    let total = |xs: &[f64], ys: &[f64]| (0..n).map(|k| v(xs[k], ys[k], k)).sum::<f64>();
    let mut u = total(&xs, &ys);
    for _ in 0..500 {
        for i in 0..n {
            for j in i + 1..n {
                let (li, lj) = (segs[i].length, segs[j].length);
                for which in 0..2 {
                    let (vi, vj) = if which == 0 { (xs[i], xs[j]) } else { (ys[i], ys[j]) };
                    // mass moved from j to i
                    let g = |t: f64| {
                        let (ai, aj) = (vi + t / li, vj - t / lj);
                        if which == 0 {
                            v(ai, ys[i], i) + v(aj, ys[j], j)
                        } else {
                            v(xs[i], ai, i) + v(xs[j], aj, j)
                        }
                    };
                    let (t, _) = golden_section_max(g, -li * vi, lj * vj, 1e-14 * (li * vi + lj * vj), 200);
                    let (ai, aj) = ((vi + t / li).max(0.0), (vj - t / lj).max(0.0));
                    if which == 0 {
                        (xs[i], xs[j]) = (ai, aj);
                    } else {
                        (ys[i], ys[j]) = (ai, aj);
                    }
                }
            }
        }
        let next = total(&xs, &ys);
        let done = next - u <= 1e-15 * next.abs().max(1e-300);
        u = next;
        if done {
            break;
        }
    }
    u
}
