//! Menu of per-task token allocations for value-scale types.

use serde::{Deserialize, Serialize};

use crate::cost::{
    contractible_cost, contractible_cost_dqds, cost_threshold, marginal_cost, marginal_cost_slope, CostKind,
};
use crate::error::{invalid, Error, Result};
use crate::model::{CostRates, ProductionParams};
use crate::screening::assumptions::{assumption1_audit, QualitySchedule};
use crate::screening::dist::ScalarDistribution;
use crate::screening::{IndexKind, MenuFamily, MenuItem, TypeIndex};
use crate::verify::audit::{AuditReport, GridDim, GridSpec};
use crate::verify::quad::{integrate_with, QuadOptions};
use crate::verify::search::solve_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Ignore,
    #[default]
    Warn,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MenuOptions {
    /// What to do when the rent-growth audit fails at construction.
    pub assumption_severity: Severity,
    /// Points per dimension of the construction-time audit grid.
    pub audit_points: usize,
    pub audit_tol: f64,
}

impl Default for MenuOptions {
    fn default() -> Self {
        MenuOptions {
            assumption_severity: Severity::Warn,
            audit_points: 12,
            audit_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AllocationMenu {
    value: ScalarDistribution,
    scale: ScalarDistribution,
    params: ProductionParams,
    costs: CostRates,
    exclusion: f64,
    quad: QuadOptions,
    audit: Option<AuditReport>,
}

pub fn allocation_menu(
    value: &ScalarDistribution,
    scale: &ScalarDistribution,
    params: &ProductionParams,
    costs: &CostRates,
) -> Result<AllocationMenu> {
    AllocationMenu::new(value.clone(), scale.clone(), *params, *costs, MenuOptions::default())
}

impl AllocationMenu {
    pub fn new(
        value: ScalarDistribution,
        scale: ScalarDistribution,
        params: ProductionParams,
        costs: CostRates,
        opts: MenuOptions,
    ) -> Result<Self> {
        value.validate()?;
        scale.validate()?;
        if value.is_point_mass() {
            return Err(Error::Unsupported("allocation menu over a point-mass value".into()));
        }
        let (lo, _) = value.support();
        value.check_monotone_virtual_value(lo)?;
        let exclusion = value.virtual_value_inverse(0.0)?;
        let mut menu = AllocationMenu {
            value,
            scale,
            params,
            costs,
            exclusion,
            quad: QuadOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                max_panels: 2000,
            },
            audit: None,
        };
        if opts.assumption_severity != Severity::Ignore && !menu.scale.is_point_mass() {
            let grid = menu.default_grid(opts.audit_points);
            let report = assumption1_audit(&menu, &grid, opts.audit_tol)?;
            if !report.passed && opts.assumption_severity == Severity::Error {
                return Err(Error::AssumptionViolated(format!(
                    "rent growth in scale exceeds the bound by {:e} at {:?}",
                    report.max_violation, report.location
                )));
            }
            menu.audit = Some(report);
        }
        Ok(menu)
    }

    pub fn value_distribution(&self) -> &ScalarDistribution {
        &self.value
    }
    pub fn scale_distribution(&self) -> &ScalarDistribution {
        &self.scale
    }
    pub fn params(&self) -> &ProductionParams {
        &self.params
    }
    pub fn costs(&self) -> &CostRates {
        &self.costs
    }
    pub fn exclusion(&self) -> f64 {
        self.exclusion
    }

    /// Construction-time rent-growth audit, if it ran.
    pub fn assumption_audit(&self) -> Option<&AuditReport> {
        self.audit.as_ref()
    }

    /// Scale support used for audits and integration.
    pub fn scale_range(&self) -> (f64, f64) {
        match self.scale {
            ScalarDistribution::PointMass { at } => (at, at),
            _ => {
                let (lo, hi) = self.scale.support();
                (lo, hi)
            }
        }
    }

    /// Audit grid over the value support and the scale support, refined at the
    /// exclusion point.
    pub fn default_grid(&self, n: usize) -> GridSpec {
        let (wl, wh) = self.value.support();
        let (sl, sh) = self.scale_range();
        let s_lo = if sl <= 0.0 { sh / n as f64 } else { sl };
        let s_dim = if sh > s_lo {
            GridDim::new(s_lo, sh, n)
        } else {
            GridDim::new(s_lo, s_lo, 1)
        };
        GridSpec {
            dims: vec![GridDim::new(wl, wh, n).with_breakpoints(vec![self.exclusion]), s_dim],
        }
    }

    fn check(&self, w: f64, s: f64) -> Result<()> {
        let (lo, hi) = self.value.support();
        if !(w >= lo && w <= hi) {
            return Err(invalid("w", format!("{w} outside support [{lo}, {hi}]")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid("s", format!("must be positive, got {s}")));
        }
        Ok(())
    }

    /// Value level above which types of scale `s` are fine-tuned.
    pub fn finetune_frontier(&self, s: f64) -> Result<f64> {
        let kind = CostKind::Contractible { scale: s };
        let q_hat = cost_threshold(kind, &self.params, &self.costs)?;
        let mc = marginal_cost(kind, q_hat, &self.params, &self.costs)?;
        self.value.virtual_value_inverse(mc)
    }

    pub fn quality(&self, w: f64, s: f64) -> Result<f64> {
        self.check(w, s)?;
        if w <= self.exclusion {
            return Ok(0.0);
        }
        let phi = self.value.virtual_value(w)?;
        if phi <= 0.0 {
            return Ok(0.0);
        }
        let kind = CostKind::Contractible { scale: s };
        let (p, c) = (&self.params, &self.costs);
        solve_increasing(
            |q| {
                (
                    marginal_cost(kind, q, p, c).unwrap_or(f64::NAN),
                    marginal_cost_slope(kind, q, p, c).unwrap_or(f64::NAN),
                )
            },
            phi,
            s,
        )
    }

    /// dq/ds at fixed w, from the first-order condition.
    pub fn quality_ds(&self, w: f64, s: f64) -> Result<f64> {
        let q = self.quality(w, s)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        let kind = CostKind::Contractible { scale: s };
        let cqq = marginal_cost_slope(kind, q, &self.params, &self.costs)?;
        let cqs = contractible_cost_dqds(q, s, &self.params, &self.costs)?;
        Ok(-cqs / cqq)
    }

    pub fn rent(&self, w: f64, s: f64) -> Result<f64> {
        self.check(w, s)?;
        if w <= self.exclusion {
            return Ok(0.0);
        }
        let frontier = self.finetune_frontier(s)?;
        let mut failure = None;
        let r = integrate_with(
            |k| match self.quality(k, s) {
                Ok(q) => q,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            self.exclusion,
            w,
            &[frontier],
            &self.quad,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r?.value)
    }

    pub fn transfer(&self, w: f64, s: f64) -> Result<f64> {
        let q = self.quality(w, s)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        Ok(w * q - self.rent(w, s)?)
    }

    pub fn item_at(&self, w: f64, s: f64) -> Result<MenuItem> {
        let q = self.quality(w, s)?;
        let index = TypeIndex::ValueScale { w, s };
        if q == 0.0 {
            return Ok(MenuItem::zero(index, Some(s)));
        }
        let c = contractible_cost(q, s, &self.params, &self.costs)?;
        Ok(MenuItem {
            index,
            quality: q,
            x: c.x,
            y: c.y,
            z: c.z,
            tasks: Some(s),
            transfer: w * q - self.rent(w, s)?,
        })
    }

    pub fn cost_at(&self, w: f64, s: f64) -> Result<f64> {
        Ok(contractible_cost(self.quality(w, s)?, s, &self.params, &self.costs)?.total)
    }
}

impl MenuFamily for AllocationMenu {
    fn index_kind(&self) -> IndexKind {
        IndexKind::ValueScale
    }
    fn item(&self, at: TypeIndex) -> Result<MenuItem> {
        match at {
            TypeIndex::ValueScale { w, s } => self.item_at(w, s),
            _ => Err(invalid("index", "allocation menus are indexed by (w, s)")),
        }
    }
    fn kappa(&self) -> f64 {
        self.params.kappa()
    }
}

impl QualitySchedule for AllocationMenu {
    fn quality(&self, w: f64, s: f64) -> Result<f64> {
        AllocationMenu::quality(self, w, s)
    }
    fn quality_ds(&self, w: f64, s: f64) -> Result<f64> {
        AllocationMenu::quality_ds(self, w, s)
    }
    fn exclusion(&self) -> f64 {
        self.exclusion
    }
    fn breakpoints(&self, s: f64) -> Vec<f64> {
        self.finetune_frontier(s).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn menu() -> AllocationMenu {
        AllocationMenu::new(
            ScalarDistribution::Uniform01,
            ScalarDistribution::Uniform01,
            ProductionParams::symmetric(0.25, 1.0).unwrap(),
            CostRates::uniform(0.125).unwrap(),
            MenuOptions {
                assumption_severity: Severity::Ignore,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn example_items() {
        let m = menu();
        let it = m.item_at(0.6, 1.0).unwrap();
        assert!((it.quality - 0.4).abs() < 1e-12);
        assert!((it.x - 0.16).abs() < 1e-12 && it.z.abs() < 1e-12);
        assert!((it.transfer - 0.22).abs() < 1e-10);
        let top = m.item_at(1.0, 1.0).unwrap();
        assert!((top.quality - 8.0).abs() < 1e-10);
        assert!((top.transfer - 111.0 / 16.0).abs() < 1e-9);
        assert!(m.item_at(0.4, 0.3).unwrap().is_zero());
    }

    #[test]
    fn frontier() {
        let m = menu();
        for &s in &[0.25, 0.5, 1.0] {
            let w = m.finetune_frontier(s).unwrap();
            assert!((w - 0.5 * (1.0 + 0.5 / s.sqrt())).abs() < 1e-12);
        }
        assert_eq!(m.finetune_frontier(0.1).unwrap(), 1.0);
    }

    #[test]
    fn analytic_scale_derivative() {
        let m = menu();
        for &(w, s) in &[(0.7, 0.5), (0.95, 0.9)] {
            let h = 1e-6;
            let fd = (m.quality(w, s + h).unwrap() - m.quality(w, s - h).unwrap()) / (2.0 * h);
            assert!((fd - m.quality_ds(w, s).unwrap()).abs() < 1e-6);
        }
    }
}
