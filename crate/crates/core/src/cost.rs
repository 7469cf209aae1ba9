//! Cobb-Douglas cost minimisation: `min cx x + cy y + cz z` subject to
//! `x^a y^b z^g = q`, `z >= base`, and the two adapters built on it.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite_nonneg, invalid, Error, Result};
use crate::model::{CostRates, ProductionParams};
use crate::verify::search::golden_section_min;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub finetuned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    /// `z` is the full third input and must be at least `base`.
    WithFloor,
    /// Quality delivered over `scale` tasks with uniform per-task tokens.
    Contractible { scale: f64 },
    /// Total tokens of a package; `z` counts tokens above the base.
    Package,
}

impl CostKind {
    fn validate(&self) -> Result<()> {
        if let CostKind::Contractible { scale } = *self {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(invalid("s", format!("must be positive, got {scale}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            CostKind::WithFloor => "with_floor",
            CostKind::Contractible { .. } => "contractible",
            CostKind::Package => "package",
        }
    }
}

/// Cost of a quality level with the base floor, at fixed exponents and prices.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    a: f64,
    b: f64,
    g: f64,
    base: f64,
    cx: f64,
    cy: f64,
    cz: f64,
}

pub(crate) struct KernelPoint {
    pub total: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub finetuned: bool,
}

impl Kernel {
    pub(crate) fn new(p: &ProductionParams, cx: f64, cy: f64, cz: f64) -> Self {
        Kernel {
            a: p.alpha(),
            b: p.beta(),
            g: p.gamma(),
            base: p.base(),
            cx,
            cy,
            cz,
        }
    }

    fn s1(&self) -> f64 {
        self.a + self.b
    }
    fn s2(&self) -> f64 {
        self.a + self.b + self.g
    }

    fn k1(&self) -> f64 {
        let s1 = self.s1();
        (self.cx / self.a).powf(self.a / s1) * (self.cy / self.b).powf(self.b / s1) * self.base.powf(-self.g / s1)
    }

    fn k2(&self) -> f64 {
        let s2 = self.s2();
        (self.cx / self.a).powf(self.a / s2)
            * (self.cy / self.b).powf(self.b / s2)
            * (self.cz / self.g).powf(self.g / s2)
    }

    pub(crate) fn threshold(&self) -> f64 {
        self.base.powf(self.s2())
            * (self.a / self.cx).powf(self.a)
            * (self.b / self.cy).powf(self.b)
            * (self.cz / self.g).powf(self.s1())
    }

    pub(crate) fn eval(&self, q: f64) -> KernelPoint {
        if q == 0.0 {
            return KernelPoint {
                total: self.cz * self.base,
                x: 0.0,
                y: 0.0,
                z: self.base,
                finetuned: false,
            };
        }
        if q <= self.threshold() {
            let s1 = self.s1();
            let m = self.k1() * q.powf(1.0 / s1);
            KernelPoint {
                total: s1 * m + self.cz * self.base,
                x: self.a / self.cx * m,
                y: self.b / self.cy * m,
                z: self.base,
                finetuned: false,
            }
        } else {
            let s2 = self.s2();
            let m = self.k2() * q.powf(1.0 / s2);
            KernelPoint {
                total: s2 * m,
                x: self.a / self.cx * m,
                y: self.b / self.cy * m,
                z: (self.g / self.cz * m).max(self.base),
                finetuned: true,
            }
        }
    }

    pub(crate) fn marginal(&self, q: f64) -> f64 {
        if q == 0.0 {
            return 0.0;
        }
        if q <= self.threshold() {
            let e = 1.0 / self.s1();
            self.k1() * q.powf(e - 1.0)
        } else {
            let e = 1.0 / self.s2();
            self.k2() * q.powf(e - 1.0)
        }
    }

    pub(crate) fn curvature(&self, q: f64) -> f64 {
        if q == 0.0 {
            return f64::INFINITY;
        }
        let e = if q <= self.threshold() { 1.0 / self.s1() } else { 1.0 / self.s2() };
        let k = if q <= self.threshold() { self.k1() } else { self.k2() };
        k * (e - 1.0) * q.powf(e - 2.0)
    }
}

fn check_quality(q: f64) -> Result<()> {
    check_finite_nonneg("quality", q)
}

pub fn cost_with_floor(q: f64, params: &ProductionParams, costs: &CostRates) -> Result<CostBreakdown> {
    check_quality(q)?;
    let k = Kernel::new(params, costs.cx(), costs.cy(), costs.cz());
    let p = k.eval(q);
    Ok(CostBreakdown {
        total: p.total,
        x: p.x,
        y: p.y,
        z: p.z,
        finetuned: p.finetuned,
    })
}

fn contractible_kernel(s: f64, params: &ProductionParams, costs: &CostRates) -> Kernel {
    Kernel::new(params, s * costs.cx(), s * costs.cy(), costs.cz())
}

fn check_scale(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid("s", format!("must be positive, got {s}")));
    }
    Ok(())
}

/// Cost of quality `q` spread over `s` tasks. `x`, `y` are per task, `z` is
/// fine-tuning above the base.
pub fn contractible_cost(q: f64, s: f64, params: &ProductionParams, costs: &CostRates) -> Result<CostBreakdown> {
    check_quality(q)?;
    check_scale(s)?;
    let k = contractible_kernel(s, params, costs);
    let p = k.eval(q / s);
    Ok(CostBreakdown {
        total: (p.total - costs.cz() * params.base()).max(0.0),
        x: p.x,
        y: p.y,
        z: p.z - params.base(),
        finetuned: p.finetuned,
    })
}

/// Cost of a package with total quality `q`; `z` is fine-tuning above the base.
pub fn package_cost(q: f64, params: &ProductionParams, costs: &CostRates) -> Result<CostBreakdown> {
    check_quality(q)?;
    let k = Kernel::new(params, costs.cx(), costs.cy(), costs.cz());
    let p = k.eval(q);
    Ok(CostBreakdown {
        total: (p.total - costs.cz() * params.base()).max(0.0),
        x: p.x,
        y: p.y,
        z: p.z - params.base(),
        finetuned: p.finetuned,
    })
}

/// Quality level where fine-tuning starts to pay.
pub fn cost_threshold(kind: CostKind, params: &ProductionParams, costs: &CostRates) -> Result<f64> {
    kind.validate()?;
    Ok(match kind {
        CostKind::WithFloor | CostKind::Package => Kernel::new(params, costs.cx(), costs.cy(), costs.cz()).threshold(),
        CostKind::Contractible { scale } => scale * contractible_kernel(scale, params, costs).threshold(),
    })
}

pub fn cost(kind: CostKind, q: f64, params: &ProductionParams, costs: &CostRates) -> Result<CostBreakdown> {
    match kind {
        CostKind::WithFloor => cost_with_floor(q, params, costs),
        CostKind::Contractible { scale } => contractible_cost(q, scale, params, costs),
        CostKind::Package => package_cost(q, params, costs),
    }
}

/// dC/dq
pub fn marginal_cost(kind: CostKind, q: f64, params: &ProductionParams, costs: &CostRates) -> Result<f64> {
    check_quality(q)?;
    kind.validate()?;
    Ok(match kind {
        CostKind::WithFloor | CostKind::Package => Kernel::new(params, costs.cx(), costs.cy(), costs.cz()).marginal(q),
        CostKind::Contractible { scale } => contractible_kernel(scale, params, costs).marginal(q / scale) / scale,
    })
}

/// d^2C/dq^2, infinite at q = 0.
pub fn marginal_cost_slope(kind: CostKind, q: f64, params: &ProductionParams, costs: &CostRates) -> Result<f64> {
    check_quality(q)?;
    kind.validate()?;
    Ok(match kind {
        CostKind::WithFloor | CostKind::Package => Kernel::new(params, costs.cx(), costs.cy(), costs.cz()).curvature(q),
        CostKind::Contractible { scale } => {
            contractible_kernel(scale, params, costs).curvature(q / scale) / (scale * scale)
        }
    })
}

/// dC/ds of the contractible cost at fixed quality.
pub fn contractible_cost_ds(q: f64, s: f64, params: &ProductionParams, costs: &CostRates) -> Result<f64> {
    check_quality(q)?;
    check_scale(s)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let k = contractible_kernel(s, params, costs);
    let p = k.eval(q / s);
    let kappa = params.kappa();
    // each branch is proportional to s^{-kappa/e} in s, e the branch exponent sum
    Ok(if p.finetuned {
        -(kappa / params.total_share()) * p.total / s
    } else {
        -(kappa / params.io_share()) * (p.total - costs.cz() * params.base()) / s
    })
}

/// d^2C/dq ds of the contractible cost.
pub fn contractible_cost_dqds(q: f64, s: f64, params: &ProductionParams, costs: &CostRates) -> Result<f64> {
    check_quality(q)?;
    check_scale(s)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let k = contractible_kernel(s, params, costs);
    let mc = k.marginal(q / s) / s;
    let e = if q / s <= k.threshold() {
        params.io_share()
    } else {
        params.total_share()
    };
    Ok(-(params.kappa() / e) * mc / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Accepted first-order residual, relative to total spend.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-6,
            max_iter: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCost {
    pub breakdown: CostBreakdown,
    /// The multiplier on `z >= base` is nonnegative and the floor is active.
    pub floor_binds: bool,
    pub residual: f64,
}

/// Constrained minimisation by brute search: `y` is eliminated through the
/// quality constraint and `(ln x, ln(base + z))` are searched by nested
/// golden sections.
pub fn cost_numeric_oracle(
    kind: CostKind,
    target: f64,
    params: &ProductionParams,
    costs: &CostRates,
    opts: &OracleOptions,
) -> Result<OracleCost> {
    check_quality(target)?;
    kind.validate()?;
    let (a, b, g) = (params.alpha(), params.beta(), params.gamma());
    let base = params.base();
    // spend = ax * x + ay * y + cz * e^t - offset, with x^a y^b e^{g t} = qq
    let (ax, ay, qq, offset) = match kind {
        CostKind::WithFloor => (costs.cx(), costs.cy(), target, 0.0),
        CostKind::Contractible { scale } => (scale * costs.cx(), scale * costs.cy(), target / scale, costs.cz() * base),
        CostKind::Package => (costs.cx(), costs.cy(), target, costs.cz() * base),
    };
    let cz = costs.cz();
    let z_report = |zz: f64| match kind {
        CostKind::WithFloor => zz,
        _ => zz - base,
    };
    if qq == 0.0 {
        return Ok(OracleCost {
            breakdown: CostBreakdown {
                total: cz * base - offset,
                x: 0.0,
                y: 0.0,
                z: z_report(base),
                finetuned: false,
            },
            floor_binds: true,
            residual: 0.0,
        });
    }
    let lq = qq.ln();
    let y_of = |u: f64, t: f64| ((lq - a * u - g * t) / b).exp();
    let inner = |t: f64| -> (f64, f64) {
        // convex in u; centre on the interior stationary point for this t
        let u0 = ((lq - g * t) + b * (ay * a / (ax * b)).ln()) / (a + b);
        golden_section_min(|u| ax * u.exp() + ay * y_of(u, t), u0 - 40.0, u0 + 40.0, 1e-13, opts.max_iter)
    };
    let t0 = base.ln();
    let spend_t = |t: f64| inner(t).1 + cz * t.exp();
    let (t_star, _) = golden_section_min(spend_t, t0, t0 + 80.0, 1e-13, opts.max_iter);
    let t_star = t_star.max(t0);
    let (u_star, _) = inner(t_star);
    let x = u_star.exp();
    let y = y_of(u_star, t_star);
    let zz = t_star.exp();
    let total = ax * x + ay * y + cz * zz - offset;

    // first-order residuals, scaled by spend
    let scale = ax * x + ay * y + cz * zz;
    let r_xy = (a * ay * y - b * ax * x).abs() / scale;
    // d spend / dt along the constraint: cz e^t - (g/b) ay y
    let dt = cz * zz - (g / b) * ay * y;
    let at_floor = (t_star - t0) <= 1e-6;
    let r_t = if at_floor { (-dt).max(0.0) / scale } else { dt.abs() / scale };
    let residual = r_xy.max(r_t);
    if !(residual < opts.tol) {
        return Err(Error::NoConvergence {
            context: "cost oracle",
            iterations: opts.max_iter,
            residual,
        });
    }
    let floor_binds = at_floor && dt >= -opts.tol * scale;
    Ok(OracleCost {
        breakdown: CostBreakdown {
            total,
            x,
            y,
            z: z_report(zz),
            finetuned: !floor_binds,
        },
        floor_binds,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (ProductionParams, CostRates) {
        (
            ProductionParams::symmetric(0.25, 1.0).unwrap(),
            CostRates::uniform(0.125).unwrap(),
        )
    }

    #[test]
    fn zero_quality() {
        let (p, c) = example();
        let f = cost_with_floor(0.0, &p, &c).unwrap();
        assert_eq!((f.total, f.x, f.y, f.z), (0.125, 0.0, 0.0, 1.0));
        let k = contractible_cost(0.0, 0.4, &p, &c).unwrap();
        assert_eq!((k.total, k.z, k.finetuned), (0.0, 0.0, false));
        assert_eq!(package_cost(0.0, &p, &c).unwrap().total, 0.0);
        assert_eq!(marginal_cost(CostKind::Package, 0.0, &p, &c).unwrap(), 0.0);
    }

    #[test]
    fn package_example_values() {
        let (p, c) = example();
        assert!((cost_threshold(CostKind::Package, &p, &c).unwrap() - 1.0).abs() < 1e-15);
        let k = package_cost(8.0, &p, &c).unwrap();
        assert!((k.total - 5.875).abs() < 1e-12);
        assert!((k.x - 16.0).abs() < 1e-12 && (k.z - 15.0).abs() < 1e-12);
        assert!((marginal_cost(CostKind::Package, 1.0, &p, &c).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn contractible_marginal_at_top_type() {
        let (p, c) = example();
        let m = marginal_cost(CostKind::Contractible { scale: 1.0 }, 8.0, &p, &c).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_must_be_positive() {
        let (p, c) = example();
        assert!(contractible_cost(1.0, 0.0, &p, &c).is_err());
        assert!(marginal_cost(CostKind::Contractible { scale: -1.0 }, 1.0, &p, &c).is_err());
        assert!(cost_with_floor(-1.0, &p, &c).is_err());
    }

    #[test]
    fn ds_matches_difference() {
        let (p, c) = example();
        for &(q, s) in &[(0.3, 0.5), (2.0, 0.7), (8.0, 1.0)] {
            let h = 1e-6;
            let fd = (contractible_cost(q, s + h, &p, &c).unwrap().total
                - contractible_cost(q, s - h, &p, &c).unwrap().total)
                / (2.0 * h);
            let an = contractible_cost_ds(q, s, &p, &c).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{q} {s}: {fd} {an}");
        }
    }

    #[test]
    fn oracle_floor_and_interior() {
        let (p, c) = example();
        let o = cost_numeric_oracle(CostKind::WithFloor, 0.5, &p, &c, &OracleOptions::default()).unwrap();
        assert!(o.floor_binds);
        let o = cost_numeric_oracle(CostKind::WithFloor, 8.0, &p, &c, &OracleOptions::default()).unwrap();
        let cf = cost_with_floor(8.0, &p, &c).unwrap();
        assert!(!o.floor_binds);
        assert!((o.breakdown.total - cf.total).abs() < 1e-8 * cf.total);
    }
}
