//! Menu of token packages indexed by the representative type.

use crate::cost::{marginal_cost, marginal_cost_slope, package_cost, cost_threshold, CostKind};
use crate::error::{invalid, Error, Result};
use crate::model::{CostRates, ProductionParams};
use crate::screening::dist::ScalarDistribution;
use crate::screening::{IndexKind, MenuFamily, MenuItem, TypeIndex};
use crate::verify::quad::{integrate_with, QuadOptions};
use crate::verify::search::solve_increasing;

#[derive(Debug, Clone)]
pub struct PackageMenu {
    dist: ScalarDistribution,
    params: ProductionParams,
    costs: CostRates,
    exclusion: f64,
    finetune_from: f64,
    quad: QuadOptions,
}

pub fn package_menu(dist: &ScalarDistribution, params: &ProductionParams, costs: &CostRates) -> Result<PackageMenu> {
    PackageMenu::new(dist.clone(), *params, *costs)
}

impl PackageMenu {
    pub fn new(dist: ScalarDistribution, params: ProductionParams, costs: CostRates) -> Result<Self> {
        dist.validate()?;
        if dist.is_point_mass() {
            return Err(Error::Unsupported("package menu over a point mass".into()));
        }
        let (lo, _) = dist.support();
        dist.check_monotone_virtual_value(lo)?;
        let exclusion = dist.virtual_value_inverse(0.0)?;
        let q_hat = cost_threshold(CostKind::Package, &params, &costs)?;
        let mc_hat = marginal_cost(CostKind::Package, q_hat, &params, &costs)?;
        let finetune_from = dist.virtual_value_inverse(mc_hat)?;
        Ok(PackageMenu {
            dist,
            params,
            costs,
            exclusion,
            finetune_from,
            quad: QuadOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                max_panels: 2000,
            },
        })
    }

    pub fn distribution(&self) -> &ScalarDistribution {
        &self.dist
    }
    pub fn params(&self) -> &ProductionParams {
        &self.params
    }
    pub fn costs(&self) -> &CostRates {
        &self.costs
    }

    /// Types at or below this value are excluded.
    pub fn exclusion(&self) -> f64 {
        self.exclusion
    }

    /// Types above this value receive fine-tuning (the top of the support if none do).
    pub fn finetune_from(&self) -> f64 {
        self.finetune_from
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        let (lo, hi) = self.dist.support();
        if !(theta >= lo && theta <= hi) {
            return Err(invalid("theta", format!("{theta} outside support [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn quality(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if theta <= self.exclusion {
            return Ok(0.0);
        }
        let phi = self.dist.virtual_value(theta)?;
        if phi <= 0.0 {
            return Ok(0.0);
        }
        let (p, c) = (&self.params, &self.costs);
        solve_increasing(
            |q| {
                (
                    marginal_cost(CostKind::Package, q, p, c).unwrap_or(f64::NAN),
                    marginal_cost_slope(CostKind::Package, q, p, c).unwrap_or(f64::NAN),
                )
            },
            phi,
            1.0,
        )
    }

    /// Buyer rent: integral of the quality schedule from the exclusion point.
    pub fn rent(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if theta <= self.exclusion {
            return Ok(0.0);
        }
        let mut failure = None;
        let r = integrate_with(
            |k| match self.quality(k) {
                Ok(q) => q,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            self.exclusion,
            theta,
            &[self.finetune_from],
            &self.quad,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r?.value)
    }

    pub fn transfer(&self, theta: f64) -> Result<f64> {
        let q = self.quality(theta)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        Ok(theta * q - self.rent(theta)?)
    }

    pub fn item_at(&self, theta: f64) -> Result<MenuItem> {
        let q = self.quality(theta)?;
        let index = TypeIndex::Theta { theta };
        if q == 0.0 {
            return Ok(MenuItem::zero(index, None));
        }
        let c = package_cost(q, &self.params, &self.costs)?;
        Ok(MenuItem {
            index,
            quality: q,
            x: c.x,
            y: c.y,
            z: c.z,
            tasks: None,
            transfer: theta * q - self.rent(theta)?,
        })
    }

    /// Production cost of the item for `theta`.
    pub fn cost_at(&self, theta: f64) -> Result<f64> {
        Ok(package_cost(self.quality(theta)?, &self.params, &self.costs)?.total)
    }
}

impl MenuFamily for PackageMenu {
    fn index_kind(&self) -> IndexKind {
        IndexKind::Theta
    }
    fn item(&self, at: TypeIndex) -> Result<MenuItem> {
        match at {
            TypeIndex::Theta { theta } => self.item_at(theta),
            TypeIndex::ValueScale { w, s } => {
                let mut it = self.item_at(w * s.powf(self.params.kappa()))?;
                it.index = at;
                Ok(it)
            }
            TypeIndex::Label { .. } => Err(invalid("index", "package menus are indexed by theta")),
        }
    }
    fn kappa(&self) -> f64 {
        self.params.kappa()
    }
}
