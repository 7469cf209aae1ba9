//! Two-part tariffs: an upfront fee plus per-token prices at a common markup.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{
    contractible_cost, contractible_cost_ds, marginal_cost, marginal_cost_slope, package_cost, CostKind,
};
use crate::efficient::SegmentTokens;
use crate::error::{check_finite_nonneg, invalid, Error, Result};
use crate::model::{CostRates, ProductionParams, RepresentativeType, TaskProfile, ValueScaleType};
use crate::screening::{
    AllocationMenu, IndexKind, MenuOptions, PackageMenu, ScalarDistribution, Severity, TypeIndex,
};
use crate::verify::audit::{AuditReport, GridSpec};
use crate::verify::quad::integrate;
use crate::verify::search::solve_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPartTariff {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub p0: f64,
    /// Most tasks the per-token prices may be used on.
    pub task_cap: Option<f64>,
}

impl TwoPartTariff {
    pub fn prices(&self) -> Result<CostRates> {
        CostRates::new(self.px, self.py, self.pz)
    }
}

/// `t / phi(t)`.
pub fn markup(dist: &ScalarDistribution, t: f64) -> Result<f64> {
    let phi = dist.virtual_value(t)?;
    if phi <= 0.0 {
        return Err(Error::Excluded(t));
    }
    Ok(t / phi)
}

#[derive(Debug, Clone)]
pub struct PackageTariffs {
    menu: PackageMenu,
}

pub fn package_tariffs(
    theta_dist: &ScalarDistribution,
    params: &ProductionParams,
    costs: &CostRates,
) -> Result<PackageTariffs> {
    Ok(PackageTariffs {
        menu: PackageMenu::new(theta_dist.clone(), *params, *costs)?,
    })
}

impl PackageTariffs {
    pub fn from_menu(menu: PackageMenu) -> Self {
        PackageTariffs { menu }
    }

    pub fn menu(&self) -> &PackageMenu {
        &self.menu
    }

    /// The tariff offered to `theta`; `None` for excluded types.
    pub fn tariff(&self, theta: f64) -> Result<Option<TwoPartTariff>> {
        let q = self.menu.quality(theta)?;
        if q == 0.0 {
            return Ok(None);
        }
        let m = markup(self.menu.distribution(), theta)?;
        let c = self.menu.costs();
        let cost = package_cost(q, self.menu.params(), c)?.total;
        Ok(Some(TwoPartTariff {
            px: m * c.cx(),
            py: m * c.cy(),
            pz: m * c.cz(),
            p0: self.menu.transfer(theta)? - m * cost,
            task_cap: None,
        }))
    }
}

#[derive(Debug, Clone)]
pub struct AllocationTariffs {
    menu: AllocationMenu,
    audit: Option<AuditReport>,
}

pub fn allocation_tariffs(
    value: &ScalarDistribution,
    scale: &ScalarDistribution,
    params: &ProductionParams,
    costs: &CostRates,
    severity: Severity,
) -> Result<AllocationTariffs> {
    let menu = AllocationMenu::new(
        value.clone(),
        scale.clone(),
        *params,
        *costs,
        MenuOptions {
            assumption_severity: severity,
            ..Default::default()
        },
    )?;
    AllocationTariffs::from_menu(menu, severity)
}

impl AllocationTariffs {
    pub fn from_menu(menu: AllocationMenu, severity: Severity) -> Result<Self> {
        let mut audit = None;
        if severity != Severity::Ignore && !menu.scale_distribution().is_point_mass() {
            let grid = menu.default_grid(12);
            let r = assumption2_check(&menu, &grid, 1e-6)?;
            if !r.passed && severity == Severity::Error {
                return Err(Error::AssumptionViolated(format!(
                    "upfront fee falls in scale by {:e} at {:?}",
                    r.max_violation, r.location
                )));
            }
            audit = Some(r);
        }
        Ok(AllocationTariffs { menu, audit })
    }

    pub fn menu(&self) -> &AllocationMenu {
        &self.menu
    }

    pub fn assumption_audit(&self) -> Option<&AuditReport> {
        self.audit.as_ref()
    }

    pub fn tariff(&self, w: f64, s: f64) -> Result<Option<TwoPartTariff>> {
        let q = self.menu.quality(w, s)?;
        if q == 0.0 {
            return Ok(None);
        }
        let m = markup(self.menu.value_distribution(), w)?;
        let c = self.menu.costs();
        let cost = contractible_cost(q, s, self.menu.params(), c)?.total;
        Ok(Some(TwoPartTariff {
            px: m * c.cx(),
            py: m * c.cy(),
            pz: m * c.cz(),
            p0: self.menu.transfer(w, s)? - m * cost,
            task_cap: Some(s),
        }))
    }
}

/// `int_0^w q_s(k, s) dk + m(w) C_s(q(w, s), s)` on the grid; positive values
/// mean the upfront fee falls with scale there.
pub fn assumption2_check(menu: &AllocationMenu, grid: &GridSpec, tol: f64) -> Result<AuditReport> {
    let types = grid.indices(IndexKind::ValueScale)?;
    let excl = menu.exclusion();
    let rows: Vec<Result<(f64, Vec<f64>)>> = types
        .par_iter()
        .map(|&t| {
            let TypeIndex::ValueScale { w, s } = t else { unreachable!() };
            if w <= excl {
                return Ok((0.0, vec![w, s]));
            }
            let mut failure = None;
            let int = integrate(
                |k| match menu.quality_ds(k, s) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                excl,
                w,
                &[menu.finetune_frontier(s)?],
                1e-11,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            let q = menu.quality(w, s)?;
            let cs = contractible_cost_ds(q, s, menu.params(), menu.costs())?;
            let m = markup(menu.value_distribution(), w)?;
            Ok((int.value + m * cs, vec![w, s]))
        })
        .collect();
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for r in rows {
        let c = r?;
        if worst.as_ref().map_or(true, |x| c.0 > x.0) {
            worst = Some(c);
        }
    }
    Ok(AuditReport::from_worst("assumption2", worst, types.len(), tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Buyer {
    ValueScale(ValueScaleType),
    Representative(RepresentativeType),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub quality: f64,
    /// Per-task for value-scale buyers, totals for representative buyers.
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Tasks the tokens are spread over, for value-scale buyers.
    pub tasks: Option<f64>,
    pub token_payment: f64,
    /// Upfront fee plus token payment.
    pub total_payment: f64,
    /// Utility from accepting the tariff.
    pub net_utility: f64,
    pub participates: bool,
}

/// Best purchase under a tariff: cost-minimising tokens at the tariff's prices
/// for each quality, then the quality where marginal value equals marginal price.
pub fn buyer_best_response(tariff: &TwoPartTariff, buyer: Buyer, params: &ProductionParams) -> Result<BestResponse> {
    let prices = tariff.prices()?;
    if !tariff.p0.is_finite() {
        return Err(invalid("p0", "must be finite"));
    }
    let (value, kind) = match buyer {
        Buyer::ValueScale(t) => {
            let s = tariff.task_cap.map_or(t.s(), |cap| t.s().min(cap));
            (t.w(), CostKind::Contractible { scale: s })
        }
        Buyer::Representative(r) => (r.theta(), CostKind::Package),
    };
    let q = if value == 0.0 {
        0.0
    } else {
        solve_increasing(
            |q| {
                (
                    marginal_cost(kind, q, params, &prices).unwrap_or(f64::NAN),
                    marginal_cost_slope(kind, q, params, &prices).unwrap_or(f64::NAN),
                )
            },
            value,
            1.0,
        )
        .map_err(|e| match e {
            Error::BracketOverflow { .. } | Error::NoConvergence { .. } => {
                Error::Unbounded(format!("no finite optimum at value {value}: {e}"))
            }
            other => other,
        })?
    };
    let (c, tasks) = match kind {
        CostKind::Contractible { scale } => (contractible_cost(q, scale, params, &prices)?, Some(scale)),
        _ => (package_cost(q, params, &prices)?, None),
    };
    let net = value * q - c.total - tariff.p0;
    Ok(BestResponse {
        quality: q,
        x: c.x,
        y: c.y,
        z: c.z,
        tasks,
        token_payment: c.total,
        total_payment: tariff.p0 + c.total,
        net_utility: net,
        participates: net >= 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub segments: Vec<SegmentTokens>,
    pub utility: f64,
}

/// How a buyer spreads purchased totals over its tasks.
pub fn buyer_optimal_split(x: f64, y: f64, z: f64, profile: &TaskProfile, params: &ProductionParams) -> Result<Split> {
    check_finite_nonneg("X", x)?;
    check_finite_nonneg("Y", y)?;
    check_finite_nonneg("Z", z)?;
    let k = params.kappa();
    let sum = profile.ces_sum(k);
    if sum == 0.0 {
        return Ok(Split {
            segments: vec![SegmentTokens { x, y }; profile.len()],
            utility: 0.0,
        });
    }
    let segments = profile
        .segments()
        .iter()
        .map(|s| {
            let share = if s.value > 0.0 { s.value.powf(1.0 / k) / sum } else { 0.0 };
            SegmentTokens {
                x: x * share,
                y: y * share,
            }
        })
        .collect();
    let theta = sum.powf(k);
    let utility = if x == 0.0 || y == 0.0 {
        0.0
    } else {
        theta * x.powf(params.alpha()) * y.powf(params.beta()) * (params.base() + z).powf(params.gamma())
    };
    Ok(Split { segments, utility })
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
    fn markups() {
        let d = ScalarDistribution::UniformProduct { kappa: 0.5 };
        assert!((markup(&d, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((markup(&d, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((markup(&ScalarDistribution::Uniform01, 0.75).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(markup(&ScalarDistribution::Uniform01, 0.4), Err(Error::Excluded(_))));
    }

    #[test]
    fn package_fees() {
        let (p, c) = example();
        let t = package_tariffs(&ScalarDistribution::UniformProduct { kappa: 0.5 }, &p, &c).unwrap();
        let top = t.tariff(1.0).unwrap().unwrap();
        assert!((top.p0 - 17.0 / 24.0).abs() < 1e-9);
        assert!((top.px - 0.125).abs() < 1e-12);
        let mid = t.tariff(0.5).unwrap().unwrap();
        assert!((mid.p0 - 1.0 / 12.0).abs() < 1e-10);
        assert!(t.tariff(0.3).unwrap().is_none());
    }

    #[test]
    fn split_on_quarter_step() {
        let p = ProductionParams::symmetric(0.25, 1.0).unwrap();
        let prof = TaskProfile::step(1.0, 0.25).unwrap();
        let s = buyer_optimal_split(1.0, 1.0, 0.0, &prof, &p).unwrap();
        assert!((s.utility - 0.5).abs() < 1e-15);
        assert!((s.segments[0].x - 4.0).abs() < 1e-12 && s.segments[1].x == 0.0);
    }

    #[test]
    fn zero_value_buyer_declines() {
        let p = ProductionParams::symmetric(0.25, 1.0).unwrap();
        let t = TwoPartTariff {
            px: 0.2,
            py: 0.2,
            pz: 0.2,
            p0: 0.1,
            task_cap: Some(0.5),
        };
        let r = buyer_best_response(&t, Buyer::ValueScale(ValueScaleType::new(0.0, 0.5).unwrap()), &p).unwrap();
        assert_eq!(r.quality, 0.0);
        assert!(!r.participates && r.net_utility <= 0.0);
    }
}
