//! Surplus-maximising token allocations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    efficient_finetune_threshold, precision_unchecked, representative_type, CostRates, ProductionParams,
    TaskProfile,
};
use crate::verify::search::{bisect, golden_section_max};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentTokens {
    pub x: f64,
    pub y: f64,
}

/// Per-task token densities plus the shared fine-tuning amount.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficientPlan {
    pub segments: Vec<SegmentTokens>,
    pub finetune: f64,
    pub total_input: f64,
    pub total_output: f64,
    pub surplus: f64,
    pub theta: f64,
}

impl EfficientPlan {
    fn empty(n: usize) -> Self {
        EfficientPlan {
            segments: vec![SegmentTokens { x: 0.0, y: 0.0 }; n],
            finetune: 0.0,
            total_input: 0.0,
            total_output: 0.0,
            surplus: 0.0,
            theta: 0.0,
        }
    }

    pub fn is_finetuned(&self) -> bool {
        self.finetune > 0.0
    }
}

fn assemble(
    profile: &TaskProfile,
    params: &ProductionParams,
    costs: &CostRates,
    theta: f64,
    segments: Vec<SegmentTokens>,
    z: f64,
) -> EfficientPlan {
    let mut total_input = 0.0;
    let mut total_output = 0.0;
    for (seg, t) in profile.segments().iter().zip(&segments) {
        total_input += seg.length * t.x;
        total_output += seg.length * t.y;
    }
    let mut plan = EfficientPlan {
        segments,
        finetune: z,
        total_input,
        total_output,
        surplus: 0.0,
        theta,
    };
    plan.surplus = surplus_unchecked(&plan, profile, params, costs);
    plan
}

/// Closed-form planner optimum. Ties at the threshold go to the branch without fine-tuning.
pub fn efficient_allocation(profile: &TaskProfile, params: &ProductionParams, costs: &CostRates) -> EfficientPlan {
    if profile.is_zero() {
        return EfficientPlan::empty(profile.len());
    }
    let (a, b, g) = (params.alpha(), params.beta(), params.gamma());
    let (k, d) = (params.kappa(), params.delta());
    let (cx, cy, cz) = (costs.cx(), costs.cy(), costs.cz());
    let theta = representative_type(profile, params).theta();
    let threshold = efficient_finetune_threshold(params, costs);

    // common factor multiplying w_i^{1/kappa}, and z
    let (factor, z) = if theta <= threshold {
        let f = (a / cx).powf(a / k) * (b / cy).powf(b / k) * params.base().powf(g / k);
        (f, 0.0)
    } else {
        let dd = (a / cx).powf(a / d) * (b / cy).powf(b / d) * (g / cz).powf(g / d);
        let f = theta.powf(g / (k * d)) * dd;
        let z = (theta.powf(1.0 / d) * (g / cz) * dd - params.base()).max(0.0);
        (f, z)
    };
    let segments = profile
        .segments()
        .iter()
        .map(|s| {
            if s.value > 0.0 {
                let w = s.value.powf(1.0 / k) * factor;
                SegmentTokens {
                    x: w * a / cx,
                    y: w * b / cy,
                }
            } else {
                SegmentTokens { x: 0.0, y: 0.0 }
            }
        })
        .collect();
    assemble(profile, params, costs, theta, segments, z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericOptions {
    pub tol: f64,
    /// Largest fine-tuning level the outer bracket may reach.
    pub bracket_cap: f64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            tol: 1e-8,
            bracket_cap: 1e12,
        }
    }
}

/// Planner optimum by direct search on the first-order conditions.
///
/// For each z the per-segment x, y solve their own first-order conditions in
/// closed form; z is then found by golden-section search on the concave value
/// of z, with the bracket doubled from `[0, base]`, and polished by bisection on
/// the marginal value.
pub fn efficient_allocation_numeric(
    profile: &TaskProfile,
    params: &ProductionParams,
    costs: &CostRates,
    opts: &NumericOptions,
) -> Result<EfficientPlan> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-3) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must lie in (0, 1e-3], got {}", opts.tol),
        });
    }
    if profile.is_zero() {
        return Ok(EfficientPlan::empty(profile.len()));
    }
    let (a, b, g) = (params.alpha(), params.beta(), params.gamma());
    let k = params.kappa();
    let (cx, cy, cz) = (costs.cx(), costs.cy(), costs.cz());
    let base = params.base();
    let ratio = b * cx / (a * cy); // y = ratio * x

    let inner = |z: f64| -> Vec<SegmentTokens> {
        let bz = (base + z).powf(g);
        profile
            .segments()
            .iter()
            .map(|s| {
                if s.value > 0.0 {
                    let x = (a * s.value * bz * ratio.powf(b) / cx).powf(1.0 / k);
                    SegmentTokens { x, y: ratio * x }
                } else {
                    SegmentTokens { x: 0.0, y: 0.0 }
                }
            })
            .collect()
    };
    let value = |z: f64| -> f64 {
        let toks = inner(z);
        profile
            .segments()
            .iter()
            .zip(&toks)
            .map(|(s, t)| s.length * (s.value * precision_unchecked(params, t.x, t.y, z) - cx * t.x - cy * t.y))
            .sum::<f64>()
            - cz * z
    };
    // envelope: d value / dz at the inner optimum
    let marginal = |z: f64| -> f64 {
        let toks = inner(z);
        profile
            .segments()
            .iter()
            .zip(&toks)
            .map(|(s, t)| s.length * s.value * g * precision_unchecked(params, t.x, t.y, z) / (base + z))
            .sum::<f64>()
            - cz
    };

    let theta = representative_type(profile, params).theta();
    if marginal(0.0) <= 0.0 {
        return Ok(assemble(profile, params, costs, theta, inner(0.0), 0.0));
    }

    let (mut lo, mut hi) = (0.0, base);
    while marginal(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > opts.bracket_cap {
            return Err(Error::BracketOverflow {
                bound: opts.bracket_cap,
                context: "efficient fine-tuning level",
            });
        }
    }
    let (zg, _) = golden_section_max(value, lo, hi, opts.tol * hi.max(1.0), 400);
    // polish: the golden bracket is accurate only to sqrt(eps) in value
    let w = (opts.tol * hi.max(1.0)).max(1e-12 * hi);
    let (mut plo, mut phi) = ((zg - w).max(lo), (zg + w).min(hi));
    if marginal(plo) < 0.0 {
        plo = lo;
    }
    if marginal(phi) > 0.0 {
        phi = hi;
    }
    let z = bisect(marginal, plo, phi, 1e-15 * hi.max(1.0), 200)?;
    Ok(assemble(profile, params, costs, theta, inner(z), z))
}

fn surplus_unchecked(plan: &EfficientPlan, profile: &TaskProfile, params: &ProductionParams, costs: &CostRates) -> f64 {
    profile
        .segments()
        .iter()
        .zip(&plan.segments)
        .map(|(s, t)| {
            s.length * (s.value * precision_unchecked(params, t.x, t.y, plan.finetune) - costs.cx() * t.x - costs.cy() * t.y)
        })
        .sum::<f64>()
        - costs.cz() * plan.finetune
}

pub fn social_surplus(
    plan: &EfficientPlan,
    profile: &TaskProfile,
    params: &ProductionParams,
    costs: &CostRates,
) -> Result<f64> {
    if plan.segments.len() != profile.len() {
        return Err(Error::SegmentMismatch {
            plan: plan.segments.len(),
            profile: profile.len(),
        });
    }
    for t in &plan.segments {
        if !(t.x >= 0.0 && t.y >= 0.0 && t.x.is_finite() && t.y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "plan",
                reason: "token densities must be finite and nonnegative".into(),
            });
        }
    }
    if !(plan.finetune >= 0.0 && plan.finetune.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "plan",
            reason: "fine-tuning must be finite and nonnegative".into(),
        });
    }
    Ok(surplus_unchecked(plan, profile, params, costs))
}
