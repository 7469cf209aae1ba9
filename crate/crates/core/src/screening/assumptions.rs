//! Bounded rent growth in scale, audited on a grid.

use rayon::prelude::*;

use crate::error::Result;
use crate::model::{CostRates, ProductionParams};
use crate::screening::allocation::{AllocationMenu, MenuOptions, Severity};
use crate::screening::dist::ScalarDistribution;
use crate::screening::IndexKind;
use crate::screening::TypeIndex;
use crate::verify::audit::{AuditReport, GridSpec};
use crate::verify::quad::integrate;

/// A quality schedule `q(w, s)` over value-scale types.
pub trait QualitySchedule: Sync {
    fn quality(&self, w: f64, s: f64) -> Result<f64>;

    /// dq/ds; central differences unless overridden.
    fn quality_ds(&self, w: f64, s: f64) -> Result<f64> {
        let h = (1e-5 * s).max(1e-8);
        Ok((self.quality(w, s + h)? - self.quality(w, s - h)?) / (2.0 * h))
    }

    /// Values at or below this are excluded.
    fn exclusion(&self) -> f64;

    /// Kinks of `w -> q(w, s)`.
    fn breakpoints(&self, _s: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// `s * int_0^w q_s(k, s) dk - w q(w, s)` on every grid point; positive values violate.
pub fn assumption1_audit(schedule: &dyn QualitySchedule, grid: &GridSpec, tol: f64) -> Result<AuditReport> {
    let types = grid.indices(IndexKind::ValueScale)?;
    let excl = schedule.exclusion();
    let rows: Vec<Result<Option<(f64, Vec<f64>)>>> = types
        .par_iter()
        .map(|&t| {
            let TypeIndex::ValueScale { w, s } = t else { unreachable!() };
            if w <= excl {
                return Ok(Some((0.0, vec![w, s])));
            }
            let mut failure = None;
            let int = integrate(
                |k| match schedule.quality_ds(k, s) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                excl,
                w,
                &schedule.breakpoints(s),
                1e-11,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            let v = s * int.value - w * schedule.quality(w, s)?;
            Ok(Some((v, vec![w, s])))
        })
        .collect();
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for r in rows {
        if let Some(c) = r? {
            if worst.as_ref().map_or(true, |x| c.0 > x.0) {
                worst = Some(c);
            }
        }
    }
    Ok(AuditReport::from_worst("assumption1", worst, types.len(), tol))
}

/// Rent-growth audit of the optimal allocation schedule built from primitives.
pub fn assumption1_check(
    value: &ScalarDistribution,
    scale: &ScalarDistribution,
    params: &ProductionParams,
    costs: &CostRates,
    grid: &GridSpec,
    tol: f64,
) -> Result<AuditReport> {
    let menu = AllocationMenu::new(
        value.clone(),
        scale.clone(),
        *params,
        *costs,
        MenuOptions {
            assumption_severity: Severity::Ignore,
            ..Default::default()
        },
    )?;
    assumption1_audit(&menu, grid, tol)
}
