//! Two fully heterogeneous profile types.

use serde::{Deserialize, Serialize};

use crate::efficient::{efficient_allocation, EfficientPlan};
use crate::error::{invalid, Error, Result};
use crate::model::{precision_unchecked, representative_type, CostRates, ProductionParams, Segment, TaskProfile};
use crate::verify::search::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullSurplusTest {
    pub full_surplus: bool,
    /// `sum l (w_H - w_L) w_L^{(alpha+beta)/kappa}`; the high type envies the
    /// low type's full-price bundle exactly when this is positive.
    pub integrand: f64,
}

/// Whether both types can be charged their full value for their efficient bundles.
pub fn full_surplus_test(high: &TaskProfile, low: &TaskProfile, params: &ProductionParams) -> FullSurplusTest {
    let (h, l) = TaskProfile::align(high, low);
    let a = params.io_share() / params.kappa();
    let integrand: f64 = h
        .segments()
        .iter()
        .zip(l.segments())
        .filter(|(_, sl)| sl.value > 0.0)
        .map(|(sh, sl)| sh.length * (sh.value - sl.value) * sl.value.powf(a))
        .sum();
    FullSurplusTest {
        full_surplus: integrand <= 0.0,
        integrand,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum BinaryCase {
    /// Identical profiles: one item at full value.
    Degenerate,
    FullSurplus,
    /// Low type served efficiently for its virtual profile.
    Screening,
    /// High type's participation binds too; the low type's virtual profile uses
    /// `weight` in place of the high type's probability.
    HighParticipationBinds { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryItem {
    /// 1 or 2: which input profile this type is.
    pub label: u8,
    pub probability: f64,
    /// The type's profile on the common segmentation.
    pub profile: TaskProfile,
    pub plan: EfficientPlan,
    pub transfer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMenu {
    pub high: BinaryItem,
    pub low: BinaryItem,
    pub case: BinaryCase,
    params: ProductionParams,
    costs: CostRates,
}

/// Constraint slacks; each is nonnegative when the constraint holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryConstraints {
    pub ir_high: f64,
    pub ir_low: f64,
    pub ic_high: f64,
    pub ic_low: f64,
}

impl BinaryConstraints {
    pub fn min_slack(&self) -> f64 {
        self.ir_high.min(self.ir_low).min(self.ic_high).min(self.ic_low)
    }
}

/// Value to `profile` of a plan laid out on the same segmentation.
pub fn plan_value(plan: &EfficientPlan, profile: &TaskProfile, params: &ProductionParams) -> f64 {
    profile
        .segments()
        .iter()
        .zip(&plan.segments)
        .map(|(s, t)| s.length * s.value * precision_unchecked(params, t.x, t.y, plan.finetune))
        .sum()
}

/// Production cost of a plan laid out on `profile`'s segmentation.
pub fn plan_cost(plan: &EfficientPlan, profile: &TaskProfile, costs: &CostRates) -> f64 {
    profile
        .segments()
        .iter()
        .zip(&plan.segments)
        .map(|(s, t)| s.length * (costs.cx() * t.x + costs.cy() * t.y))
        .sum::<f64>()
        + costs.cz() * plan.finetune
}

impl BinaryMenu {
    pub fn params(&self) -> &ProductionParams {
        &self.params
    }

    pub fn constraints(&self) -> BinaryConstraints {
        let p = &self.params;
        let (h, l) = (&self.high, &self.low);
        let u_hh = plan_value(&h.plan, &h.profile, p) - h.transfer;
        let u_hl = plan_value(&l.plan, &h.profile, p) - l.transfer;
        let u_ll = plan_value(&l.plan, &l.profile, p) - l.transfer;
        let u_lh = plan_value(&h.plan, &l.profile, p) - h.transfer;
        BinaryConstraints {
            ir_high: u_hh,
            ir_low: u_ll,
            ic_high: u_hh - u_hl,
            ic_low: u_ll - u_lh,
        }
    }

    pub fn revenue(&self) -> f64 {
        if self.case == BinaryCase::Degenerate {
            return self.high.transfer;
        }
        self.high.probability * self.high.transfer + self.low.probability * self.low.transfer
    }

    pub fn profit(&self) -> f64 {
        let c = |it: &BinaryItem| it.transfer - plan_cost(&it.plan, &it.profile, &self.costs);
        if self.case == BinaryCase::Degenerate {
            return c(&self.high);
        }
        self.high.probability * c(&self.high) + self.low.probability * c(&self.low)
    }
}

fn virtual_low(high: &TaskProfile, low: &TaskProfile, weight: f64, p_low: f64) -> TaskProfile {
    let segs = high
        .segments()
        .iter()
        .zip(low.segments())
        .map(|(h, l)| Segment {
            length: l.length,
            value: (l.value - weight / p_low * (h.value - l.value)).max(0.0),
        })
        .collect();
    TaskProfile::new(segs).expect("aligned profile")
}

struct Labelled<'a> {
    high: &'a TaskProfile,
    low: &'a TaskProfile,
    f_high: f64,
    f_low: f64,
    l_high: u8,
    l_low: u8,
}

fn item(label: u8, probability: f64, profile: &TaskProfile, plan: EfficientPlan, transfer: f64) -> BinaryItem {
    BinaryItem {
        label,
        probability,
        profile: profile.clone(),
        plan,
        transfer,
    }
}

fn solve_labelled(lab: &Labelled, params: &ProductionParams, costs: &CostRates) -> Result<BinaryMenu> {
    let p = params;
    let plan_h = efficient_allocation(lab.high, p, costs);
    let v_hh = plan_value(&plan_h, lab.high, p);
    let fs = full_surplus_test(lab.high, lab.low, p);
    let build = |plan_l: EfficientPlan, t_h: f64, t_l: f64, case: BinaryCase| BinaryMenu {
        high: item(lab.l_high, lab.f_high, lab.high, plan_h.clone(), t_h),
        low: item(lab.l_low, lab.f_low, lab.low, plan_l, t_l),
        case,
        params: *p,
        costs: *costs,
    };
    if fs.full_surplus {
        let plan_l = efficient_allocation(lab.low, p, costs);
        let t_l = plan_value(&plan_l, lab.low, p);
        return Ok(build(plan_l, v_hh, t_l, BinaryCase::FullSurplus));
    }

    let low_plan = |weight: f64| efficient_allocation(&virtual_low(lab.high, lab.low, weight, lab.f_low), p, costs);
    // information rent the high type earns on the low bundle
    let rent_h = |plan: &EfficientPlan| plan_value(plan, lab.high, p) - plan_value(plan, lab.low, p);

    let plan_l = low_plan(lab.f_high);
    let scale = v_hh.abs().max(1.0);
    let menu = if rent_h(&plan_l) >= -1e-12 * scale {
        let t_l = plan_value(&plan_l, lab.low, p);
        let t_h = v_hh - plan_value(&plan_l, lab.high, p) + t_l;
        build(plan_l, t_h, t_l, BinaryCase::Screening)
    } else {
        // rent is positive at weight 0 (no full surplus) and negative at f_high
        let mu = bisect(|m| rent_h(&low_plan(m)), 0.0, lab.f_high, 1e-15, 200)?;
        let plan_l = low_plan(mu);
        let t_l = plan_value(&plan_l, lab.low, p);
        build(plan_l, v_hh, t_l, BinaryCase::HighParticipationBinds { weight: mu })
    };
    let c = menu.constraints();
    if c.ic_low < -1e-9 * scale {
        return Err(Error::Unsupported(format!(
            "low type's incentive constraint fails by {:e}; both incentive constraints would bind",
            -c.ic_low
        )));
    }
    Ok(menu)
}

/// Profit-maximising menu for two profiles, type 1 drawn with probability `f1`.
pub fn binary_menu(
    profile_1: &TaskProfile,
    profile_2: &TaskProfile,
    f1: f64,
    params: &ProductionParams,
    costs: &CostRates,
) -> Result<BinaryMenu> {
    if !(f1 > 0.0 && f1 < 1.0) {
        return Err(invalid("f1", format!("must lie in (0, 1), got {f1}")));
    }
    let (a, b) = TaskProfile::align(profile_1, profile_2);
    let same = a.segments().iter().zip(b.segments()).all(|(x, y)| x.value == y.value);
    if same {
        let plan = efficient_allocation(&a, params, costs);
        let t = plan_value(&plan, &a, params);
        let it = item(1, 1.0, &a, plan, t);
        let mut low = it.clone();
        low.label = 2;
        return Ok(BinaryMenu {
            high: it,
            low,
            case: BinaryCase::Degenerate,
            params: *params,
            costs: *costs,
        });
    }
    let t1 = representative_type(&a, params).theta();
    let t2 = representative_type(&b, params).theta();
    let one_high = Labelled {
        high: &a,
        low: &b,
        f_high: f1,
        f_low: 1.0 - f1,
        l_high: 1,
        l_low: 2,
    };
    let two_high = Labelled {
        high: &b,
        low: &a,
        f_high: 1.0 - f1,
        f_low: f1,
        l_high: 2,
        l_low: 1,
    };
    if t1 > t2 {
        solve_labelled(&one_high, params, costs)
    } else if t2 > t1 {
        solve_labelled(&two_high, params, costs)
    } else {
        // tie: keep whichever labelling is feasible and more profitable
        match (solve_labelled(&one_high, params, costs), solve_labelled(&two_high, params, costs)) {
            (Ok(x), Ok(y)) => Ok(if y.profit() > x.profit() { y } else { x }),
            (Ok(x), Err(_)) | (Err(_), Ok(x)) => Ok(x),
            (Err(e), Err(_)) => Err(e),
        }
    }
}
