use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::screening::dist::ScalarDistribution;
use crate::screening::{AllocationMenu, Menu, PackageMenu};
use crate::verify::quad::{integrate, integrate_with, QuadOptions};
use crate::verify::search::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueProfit {
    pub revenue: f64,
    pub profit: f64,
    /// Quadrature error estimates for expected transfer and expected cost.
    pub revenue_error: f64,
    pub cost_error: f64,
}

/// Expected transfer and expected transfer net of production cost.
pub fn revenue_profit(menu: &Menu, tol: f64) -> Result<RevenueProfit> {
    match menu {
        Menu::Packages(m) => packages(m, tol),
        Menu::Allocations(m) => allocations(m, tol),
        Menu::Binary(m) => Ok(RevenueProfit {
            revenue: m.revenue(),
            profit: m.profit(),
            revenue_error: 0.0,
            cost_error: 0.0,
        }),
    }
}

fn guarded<'a, F: FnMut(f64) -> Result<f64> + 'a>(
    mut f: F,
    failure: &'a mut Option<Error>,
) -> impl FnMut(f64) -> f64 + 'a {
    move |x| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    }
}

fn packages(m: &PackageMenu, tol: f64) -> Result<RevenueProfit> {
    let dist = m.distribution();
    let (_, hi) = dist.support();
    let lo = m.exclusion();
    if lo >= hi {
        return Ok(RevenueProfit {
            revenue: 0.0,
            profit: 0.0,
            revenue_error: 0.0,
            cost_error: 0.0,
        });
    }
    let bp = [m.finetune_from()];
    let mut fail = None;
    let rev = integrate(
        guarded(|t| Ok(m.transfer(t)? * dist.pdf(t)), &mut fail),
        lo,
        hi,
        &bp,
        tol,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let rev = rev?;
    let mut fail = None;
    let cost = integrate(guarded(|t| Ok(m.cost_at(t)? * dist.pdf(t)), &mut fail), lo, hi, &bp, tol);
    if let Some(e) = fail {
        return Err(e);
    }
    let cost = cost?;
    Ok(RevenueProfit {
        revenue: rev.value,
        profit: rev.value - cost.value,
        revenue_error: rev.error,
        cost_error: cost.error,
    })
}

/// Inner integral over values at a fixed scale of transfer (`which = 0`) or
/// cost (`which = 1`), with its error estimate.
fn value_slice(m: &AllocationMenu, s: f64, tol: f64, which: usize) -> Result<(f64, f64)> {
    let value = m.value_distribution();
    let (_, hi) = value.support();
    let lo = m.exclusion();
    if lo >= hi {
        return Ok((0.0, 0.0));
    }
    let bp = [m.finetune_frontier(s)?];
    let mut fail = None;
    let r = integrate_with(
        guarded(
            |w| {
                let v = if which == 0 { m.transfer(w, s)? } else { m.cost_at(w, s)? };
                Ok(v * value.pdf(w))
            },
            &mut fail,
        ),
        lo,
        hi,
        &bp,
        &QuadOptions::with_tol(tol),
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let r = r?;
    Ok((r.value, r.error))
}

fn allocations(m: &AllocationMenu, tol: f64) -> Result<RevenueProfit> {
    let scale = m.scale_distribution();
    if let ScalarDistribution::PointMass { at } = *scale {
        let t = value_slice(m, at, tol, 0)?;
        let c = value_slice(m, at, tol, 1)?;
        return Ok(RevenueProfit {
            revenue: t.0,
            profit: t.0 - c.0,
            revenue_error: t.1,
            cost_error: c.1,
        });
    }
    let (slo, shi) = scale.support();
    let (_, whi) = m.value_distribution().support();
    // below this scale nobody is fine-tuned
    let s_star = {
        let g = |s: f64| m.finetune_frontier(s).map(|w| if w >= whi { -1.0 } else { 1.0 }).unwrap_or(-1.0);
        if g(shi) < 0.0 {
            shi
        } else if g(slo.max(1e-300)) > 0.0 {
            slo
        } else {
            bisect(g, slo.max(1e-300), shi, 1e-15, 200)?
        }
    };
    let inner_tol = 0.05 * tol;
    // the outer rule is run twice (transfer and cost) on panels evaluated in parallel
    let outer = |which: usize| -> Result<(f64, f64)> {
        let mut fail = None;
        let mut cache: Vec<(f64, f64)> = Vec::new();
        let r = integrate(
            guarded(
                |s| {
                    if s <= 0.0 {
                        return Ok(0.0);
                    }
                    let v = value_slice(m, s, inner_tol, which)?;
                    cache.push((s, v.1));
                    Ok(v.0 * scale.pdf(s))
                },
                &mut fail,
            ),
            slo,
            shi,
            &[s_star],
            0.5 * tol,
        );
        if let Some(e) = fail {
            return Err(e);
        }
        let r = r?;
        let inner_err = cache.iter().map(|c| c.1).fold(0.0, f64::max) * (shi - slo);
        Ok((r.value, r.error + inner_err))
    };
    let res: Vec<Result<(f64, f64)>> = [0usize, 1].par_iter().map(|&k| outer(k)).collect();
    let mut it = res.into_iter();
    let (rv, re) = it.next().unwrap()?;
    let (cv, ce) = it.next().unwrap()?;
    Ok(RevenueProfit {
        revenue: rv,
        profit: rv - cv,
        revenue_error: re,
        cost_error: ce,
    })
}
