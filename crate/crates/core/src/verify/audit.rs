//! Brute-force incentive and participation audits over type grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::screening::{IndexKind, MenuFamily, MenuItem, TypeIndex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub name: String,
    pub max_violation: f64,
    /// Coordinates of the worst case: the type, then the report when there is one.
    pub location: Vec<f64>,
    pub samples: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl AuditReport {
    pub(crate) fn from_worst(name: &str, worst: Option<(f64, Vec<f64>)>, samples: usize, tolerance: f64) -> Self {
        let (max_violation, location) = worst.unwrap_or((0.0, Vec::new()));
        let max_violation = max_violation.max(0.0);
        AuditReport {
            name: name.to_string(),
            max_violation,
            location,
            samples,
            tolerance,
            passed: max_violation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDim {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// Points added exactly at and just around these values.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl GridDim {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        GridDim {
            lo,
            hi,
            count,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_breakpoints(mut self, bp: Vec<f64>) -> Self {
        self.breakpoints = bp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(invalid("grid", format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        if self.lo < self.hi && self.count < 2 {
            return Err(invalid("grid", "need at least two points per dimension"));
        }
        if self.breakpoints.iter().any(|&b| b < self.lo || b > self.hi) {
            return Err(invalid("grid", "breakpoints must lie inside the range"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.lo == self.hi || self.count < 2 {
            return vec![self.lo];
        }
        let n = self.count;
        let h = (self.hi - self.lo) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| self.lo + h * i as f64).collect();
        pts[n - 1] = self.hi;
        for &b in &self.breakpoints {
            for p in [b - h / 8.0, b, b + h / 8.0] {
                if p >= self.lo && p <= self.hi {
                    pts.push(p);
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        pts
    }

    /// Spacing of the base grid.
    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: Vec<GridDim>,
}

impl GridSpec {
    pub fn theta(lo: f64, hi: f64, count: usize) -> Self {
        GridSpec {
            dims: vec![GridDim::new(lo, hi, count)],
        }
    }

    pub fn value_scale(w: GridDim, s: GridDim) -> Self {
        GridSpec { dims: vec![w, s] }
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.dims {
            d.validate()?;
        }
        Ok(())
    }

    /// Grid points as type indices of the given kind, `w` varying fastest.
    pub fn indices(&self, kind: IndexKind) -> Result<Vec<TypeIndex>> {
        self.validate()?;
        match (kind, self.dims.len()) {
            (IndexKind::Theta, 1) => Ok(self.dims[0]
                .points()
                .into_iter()
                .map(|theta| TypeIndex::Theta { theta })
                .collect()),
            (IndexKind::ValueScale, 2) => {
                let ws = self.dims[0].points();
                let ss = self.dims[1].points();
                Ok(ss
                    .iter()
                    .flat_map(|&s| ws.iter().map(move |&w| TypeIndex::ValueScale { w, s }))
                    .collect())
            }
            _ => Err(invalid("grid", "dimension count does not match the menu index")),
        }
    }
}

fn collect_items(menu: &dyn MenuFamily, at: &[TypeIndex]) -> Result<Vec<MenuItem>> {
    at.par_iter().map(|&t| menu.item(t)).collect()
}

fn pick_worst(cands: Vec<Option<(f64, Vec<f64>)>>) -> Option<(f64, Vec<f64>)> {
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for c in cands.into_iter().flatten() {
        if worst.as_ref().map_or(true, |w| c.0 > w.0) {
            worst = Some(c);
        }
    }
    worst
}

/// Largest gain any grid type gets from reporting another grid type, plus, for
/// continuous value-scale menus, from overstating scale to `s' > s` with value
/// `w s / s'` and nearby values.
pub fn ic_audit(menu: &dyn MenuFamily, grid: &GridSpec, tol: f64) -> Result<AuditReport> {
    let types = grid.indices(menu.index_kind())?;
    let mut report = ic_audit_points(menu, &types, &types, tol)?;
    if menu.continuous() && menu.index_kind() == IndexKind::ValueScale {
        let ss = grid.dims[1].points();
        let (wlo, whi) = (grid.dims[0].lo, grid.dims[0].hi);
        let dw = grid.dims[0].step() / 4.0;
        let kappa = menu.kappa();
        let own: Vec<MenuItem> = collect_items(menu, &types)?;
        let rows: Vec<Result<(Option<(f64, Vec<f64>)>, usize)>> = types
            .par_iter()
            .zip(own.par_iter())
            .map(|(&t, own)| {
                let TypeIndex::ValueScale { w, s } = t else { unreachable!() };
                let u0 = own.net_utility(t, kappa);
                let mut worst: Option<(f64, Vec<f64>)> = None;
                let mut n = 0;
                for &s2 in ss.iter().filter(|&&s2| s2 > s) {
                    let centre = w * s / s2;
                    for k in -1..=1 {
                        let w2 = centre + k as f64 * dw;
                        if w2 < wlo || w2 > whi {
                            continue;
                        }
                        let it = menu.item(TypeIndex::ValueScale { w: w2, s: s2 })?;
                        n += 1;
                        let gain = it.net_utility(t, kappa) - u0;
                        if worst.as_ref().map_or(true, |x| gain > x.0) {
                            worst = Some((gain, vec![w, s, w2, s2]));
                        }
                    }
                }
                Ok((worst, n))
            })
            .collect();
        let mut cands = vec![Some((report.max_violation, report.location.clone()))];
        let mut extra = 0;
        for r in rows {
            let (c, n) = r?;
            cands.push(c);
            extra += n;
        }
        report = AuditReport::from_worst("ic", pick_worst(cands), report.samples + extra, tol);
    }
    Ok(report)
}

/// Incentive audit with explicit type and report sets.
pub fn ic_audit_points(
    menu: &dyn MenuFamily,
    types: &[TypeIndex],
    reports: &[TypeIndex],
    tol: f64,
) -> Result<AuditReport> {
    let kappa = menu.kappa();
    let offers = collect_items(menu, reports)?;
    let own = collect_items(menu, types)?;
    let rows: Vec<Option<(f64, Vec<f64>)>> = types
        .par_iter()
        .zip(own.par_iter())
        .map(|(&t, own)| {
            let u0 = own.net_utility(t, kappa);
            let mut worst: Option<(f64, Vec<f64>)> = None;
            for it in &offers {
                let gain = it.net_utility(t, kappa) - u0;
                if worst.as_ref().map_or(true, |x| gain > x.0) {
                    let mut loc = t.coords();
                    loc.extend(it.index.coords());
                    worst = Some((gain, loc));
                }
            }
            worst
        })
        .collect();
    Ok(AuditReport::from_worst("ic", pick_worst(rows), types.len() * reports.len(), tol))
}

/// Every grid type gets nonnegative utility from its own item; excluded types
/// get the zero item.
pub fn ir_audit(menu: &dyn MenuFamily, grid: &GridSpec, tol: f64) -> Result<AuditReport> {
    let types = grid.indices(menu.index_kind())?;
    ir_audit_points(menu, &types, tol)
}

pub fn ir_audit_points(menu: &dyn MenuFamily, types: &[TypeIndex], tol: f64) -> Result<AuditReport> {
    let kappa = menu.kappa();
    let own = collect_items(menu, types)?;
    let rows: Vec<Option<(f64, Vec<f64>)>> = types
        .iter()
        .zip(&own)
        .map(|(&t, it)| {
            let v = if it.quality == 0.0 {
                // zero item must be free
                it.transfer.abs()
            } else {
                -it.net_utility(t, kappa)
            };
            Some((v, t.coords()))
        })
        .collect();
    Ok(AuditReport::from_worst("ir", pick_worst(rows), types.len(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_refine_breakpoints() {
        let d = GridDim::new(0.0, 1.0, 5).with_breakpoints(vec![0.5, 0.3]);
        let p = d.points();
        assert!(p.contains(&0.3) && p.contains(&0.5));
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(p.len(), 5 + 5); // 0.5 is already a node
    }

    #[test]
    fn grid_validation() {
        assert!(GridDim::new(0.0, 1.0, 1).validate().is_err());
        assert!(GridDim::new(0.0, 1.0, 3).with_breakpoints(vec![2.0]).validate().is_err());
        assert!(GridDim::new(0.5, 0.5, 1).validate().is_ok());
    }

    #[test]
    fn report_pass_flag() {
        let r = AuditReport::from_worst("x", Some((2e-7, vec![0.1])), 1, 1e-6);
        assert!(r.passed);
        let r = AuditReport::from_worst("x", Some((2e-6, vec![0.1])), 1, 1e-6);
        assert!(!r.passed);
        let r = AuditReport::from_worst("x", None, 0, 1e-6);
        assert!(r.passed && r.max_violation == 0.0);
    }
}
