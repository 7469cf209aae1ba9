//! Primitive objects: technology, token costs, buyer types and their CES index.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite_nonneg, check_positive, invalid, Error, Result};

/// Cobb-Douglas exponents and the base level of the model.
///
/// Precision on a task is `x^alpha * y^beta * (base + z)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ProductionParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    base: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    base: f64,
}

impl TryFrom<RawParams> for ProductionParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ProductionParams::new(r.alpha, r.beta, r.gamma, r.base)
    }
}

impl From<ProductionParams> for RawParams {
    fn from(p: ProductionParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            base: p.base,
        }
    }
}

impl ProductionParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, base: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        check_positive("gamma", gamma)?;
        check_positive("base", base)?;
        if alpha + beta + gamma >= 1.0 {
            return Err(invalid(
                "alpha+beta+gamma",
                format!("must be below 1, got {}", alpha + beta + gamma),
            ));
        }
        Ok(ProductionParams {
            alpha,
            beta,
            gamma,
            base,
        })
    }

    /// alpha = beta = gamma = rho.
    pub fn symmetric(rho: f64, base: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0 / 3.0) {
            return Err(invalid("rho", format!("must lie in (0, 1/3), got {rho}")));
        }
        Self::new(rho, rho, rho, base)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn base(&self) -> f64 {
        self.base
    }

    /// alpha + beta
    pub fn io_share(&self) -> f64 {
        self.alpha + self.beta
    }

    /// alpha + beta + gamma
    pub fn total_share(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }

    /// 1 - alpha - beta, the exponent of the CES aggregate.
    pub fn kappa(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    /// 1 - alpha - beta - gamma
    pub fn delta(&self) -> f64 {
        1.0 - self.alpha - self.beta - self.gamma
    }
}

/// Constant per-token marginal costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCosts", into = "RawCosts")]
pub struct CostRates {
    cx: f64,
    cy: f64,
    cz: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCosts {
    cx: f64,
    cy: f64,
    cz: f64,
}

impl TryFrom<RawCosts> for CostRates {
    type Error = Error;
    fn try_from(r: RawCosts) -> Result<Self> {
        CostRates::new(r.cx, r.cy, r.cz)
    }
}

impl From<CostRates> for RawCosts {
    fn from(c: CostRates) -> Self {
        RawCosts {
            cx: c.cx,
            cy: c.cy,
            cz: c.cz,
        }
    }
}

impl CostRates {
    pub fn new(cx: f64, cy: f64, cz: f64) -> Result<Self> {
        check_positive("cx", cx)?;
        check_positive("cy", cy)?;
        check_positive("cz", cz)?;
        Ok(CostRates { cx, cy, cz })
    }

    pub fn uniform(c: f64) -> Result<Self> {
        Self::new(c, c, c)
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn cz(&self) -> f64 {
        self.cz
    }

    /// All three rates multiplied by `m`.
    pub fn scaled(&self, m: f64) -> Result<Self> {
        Self::new(self.cx * m, self.cy * m, self.cz * m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub value: f64,
}

/// Piecewise-constant willingness to pay over the unit task interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct TaskProfile {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for TaskProfile {
    type Error = Error;
    fn try_from(v: Vec<Segment>) -> Result<Self> {
        TaskProfile::new(v)
    }
}

impl From<TaskProfile> for Vec<Segment> {
    fn from(p: TaskProfile) -> Self {
        p.segments
    }
}

const LENGTH_TOL: f64 = 1e-12;

impl TaskProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        let mut total = 0.0;
        for (i, s) in segments.iter().enumerate() {
            if !(s.length.is_finite() && s.length > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i} has length {}",
                    s.length
                )));
            }
            if !(s.value.is_finite() && s.value >= 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "segment {i} has value {}",
                    s.value
                )));
            }
            total += s.length;
        }
        if (total - 1.0).abs() > LENGTH_TOL {
            return Err(Error::InvalidProfile(format!(
                "segment lengths sum to {total}, expected 1"
            )));
        }
        Ok(TaskProfile { segments })
    }

    /// Build from `(length, value)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(length, value)| Segment { length, value })
                .collect(),
        )
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![Segment { length: 1.0, value }])
    }

    /// Value `w` on the first `s` of the tasks, zero afterwards.
    pub fn step(w: f64, s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(invalid("s", format!("must lie in (0, 1], got {s}")));
        }
        if s == 1.0 {
            return Self::constant(w);
        }
        Self::new(vec![
            Segment { length: s, value: w },
            Segment {
                length: 1.0 - s,
                value: 0.0,
            },
        ])
    }

    /// Equal-length segments with the given values.
    pub fn equal_segments(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidProfile("no segments".into()));
        }
        let l = 1.0 / n as f64;
        let mut segs: Vec<Segment> = values
            .iter()
            .map(|&value| Segment { length: l, value })
            .collect();
        // absorb rounding in the last segment
        let head: f64 = segs[..n - 1].iter().map(|s| s.length).sum();
        segs[n - 1].length = 1.0 - head;
        Self::new(segs)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.value == 0.0)
    }

    /// Segment values multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        check_finite_nonneg("lambda", lambda)?;
        Self::new(
            self.segments
                .iter()
                .map(|s| Segment {
                    length: s.length,
                    value: s.value * lambda,
                })
                .collect(),
        )
    }

    /// Re-express both profiles on their common refinement.
    pub fn align(a: &TaskProfile, b: &TaskProfile) -> (TaskProfile, TaskProfile) {
        let mut out_a = Vec::new();
        let mut out_b = Vec::new();
        let (mut i, mut j) = (0, 0);
        let (mut ra, mut rb) = (a.segments[0].length, b.segments[0].length);
        let mut covered = 0.0;
        loop {
            let step = ra.min(rb);
            if step > 0.0 {
                out_a.push(Segment {
                    length: step,
                    value: a.segments[i].value,
                });
                out_b.push(Segment {
                    length: step,
                    value: b.segments[j].value,
                });
                covered += step;
            }
            ra -= step;
            rb -= step;
            let a_done = ra <= 1e-15;
            let b_done = rb <= 1e-15;
            if a_done {
                i += 1;
                if i < a.segments.len() {
                    ra = a.segments[i].length;
                }
            }
            if b_done {
                j += 1;
                if j < b.segments.len() {
                    rb = b.segments[j].length;
                }
            }
            if i >= a.segments.len() || j >= b.segments.len() {
                break;
            }
        }
        // rounding leftovers go to the last piece
        if let (Some(la), Some(lb)) = (out_a.last_mut(), out_b.last_mut()) {
            la.length += 1.0 - covered;
            lb.length = la.length;
        }
        (
            TaskProfile { segments: out_a },
            TaskProfile { segments: out_b },
        )
    }

    /// `sum length * value^(1/kappa)`, the CES integral before the outer power.
    pub fn ces_sum(&self, kappa: f64) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.value > 0.0)
            .map(|s| s.length * s.value.powf(1.0 / kappa))
            .sum()
    }
}

/// A buyer with value `w` on a fraction `s` of tasks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueScaleType {
    w: f64,
    s: f64,
}

impl ValueScaleType {
    pub fn new(w: f64, s: f64) -> Result<Self> {
        if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
            return Err(invalid("w", format!("must lie in [0, 1], got {w}")));
        }
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(invalid("s", format!("must lie in (0, 1], got {s}")));
        }
        Ok(ValueScaleType { w, s })
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn profile(&self) -> TaskProfile {
        TaskProfile::step(self.w, self.s).expect("validated value-scale type")
    }
}

/// CES aggregate of a profile.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct RepresentativeType(f64);

impl RepresentativeType {
    pub fn new(theta: f64) -> Result<Self> {
        check_finite_nonneg("theta", theta)?;
        Ok(RepresentativeType(theta))
    }

    pub fn theta(&self) -> f64 {
        self.0
    }
}

pub fn precision(params: &ProductionParams, x: f64, y: f64, z: f64) -> Result<f64> {
    check_finite_nonneg("x", x)?;
    check_finite_nonneg("y", y)?;
    check_finite_nonneg("z", z)?;
    Ok(precision_unchecked(params, x, y, z))
}

pub(crate) fn precision_unchecked(p: &ProductionParams, x: f64, y: f64, z: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    x.powf(p.alpha) * y.powf(p.beta) * (p.base + z).powf(p.gamma)
}

pub fn representative_type(profile: &TaskProfile, params: &ProductionParams) -> RepresentativeType {
    let k = params.kappa();
    let sum = profile.ces_sum(k);
    RepresentativeType(if sum > 0.0 { sum.powf(k) } else { 0.0 })
}

pub fn value_scale_theta(t: &ValueScaleType, params: &ProductionParams) -> RepresentativeType {
    RepresentativeType(t.w * t.s.powf(params.kappa()))
}

/// Representative type above which the planner buys fine-tuning tokens.
pub fn efficient_finetune_threshold(params: &ProductionParams, costs: &CostRates) -> f64 {
    let (a, b, g) = (params.alpha, params.beta, params.gamma);
    params.base.powf(params.delta())
        * (costs.cx / a).powf(a)
        * (costs.cy / b).powf(b)
        * (costs.cz / g).powf(params.kappa())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> ProductionParams {
        ProductionParams::symmetric(0.25, 1.0).unwrap()
    }

    #[test]
    fn precision_examples() {
        let p = quarter();
        assert!((precision(&p, 16.0, 16.0, 15.0).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(precision(&p, 0.0, 5.0, 3.0).unwrap(), 0.0);
        assert_eq!(precision(&p, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert!(precision(&p, -1.0, 1.0, 0.0).is_err());
        assert!(precision(&p, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn theta_examples() {
        let p = quarter();
        let one = TaskProfile::constant(1.0).unwrap();
        assert_eq!(representative_type(&one, &p).theta(), 1.0);
        let step = TaskProfile::step(1.0, 0.25).unwrap();
        assert!((representative_type(&step, &p).theta() - 0.5).abs() < 1e-15);
        let two = TaskProfile::from_pairs(&[(0.5, 0.8), (0.5, 0.2)]).unwrap();
        assert!((representative_type(&two, &p).theta() - 0.34f64.sqrt()).abs() < 1e-15);

        let t = ValueScaleType::new(0.8, 0.25).unwrap();
        assert!((value_scale_theta(&t, &p).theta() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn thresholds() {
        let p = quarter();
        let c = CostRates::uniform(0.125).unwrap();
        assert!((efficient_finetune_threshold(&p, &c) - 0.5).abs() < 1e-15);
        let p = ProductionParams::symmetric(0.2, 1.0).unwrap();
        let c = CostRates::uniform(0.2).unwrap();
        assert!((efficient_finetune_threshold(&p, &c) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(ProductionParams::new(0.3, 0.3, 0.4, 1.0).is_err());
        assert!(ProductionParams::new(0.0, 0.3, 0.1, 1.0).is_err());
        assert!(ProductionParams::new(0.1, 0.3, 0.1, 0.0).is_err());
        assert!(ProductionParams::symmetric(1.0 / 3.0, 1.0).is_err());
        assert!(CostRates::new(1.0, 0.0, 1.0).is_err());
        assert!(TaskProfile::from_pairs(&[(0.5, 1.0), (0.4, 1.0)]).is_err());
        assert!(TaskProfile::from_pairs(&[(0.5, 1.0), (0.5, -1.0)]).is_err());
        assert!(ValueScaleType::new(0.5, 0.0).is_err());
        assert!(ValueScaleType::new(1.2, 0.5).is_err());
    }

    #[test]
    fn serde_rejects_invalid() {
        let bad = r#"{"alpha":0.5,"beta":0.5,"gamma":0.1,"base":1}"#;
        assert!(serde_json::from_str::<ProductionParams>(bad).is_err());
        let ok = r#"{"alpha":0.25,"beta":0.25,"gamma":0.25,"base":1}"#;
        assert_eq!(serde_json::from_str::<ProductionParams>(ok).unwrap(), quarter());
    }

    #[test]
    fn align_refines_both() {
        let a = TaskProfile::from_pairs(&[(0.3, 1.0), (0.7, 2.0)]).unwrap();
        let b = TaskProfile::from_pairs(&[(0.5, 3.0), (0.5, 4.0)]).unwrap();
        let (ra, rb) = TaskProfile::align(&a, &b);
        let lens: Vec<f64> = ra.segments().iter().map(|s| s.length).collect();
        assert_eq!(lens.len(), 3);
        assert!((lens[0] - 0.3).abs() < 1e-15 && (lens[1] - 0.2).abs() < 1e-15);
        let vb: Vec<f64> = rb.segments().iter().map(|s| s.value).collect();
        assert_eq!(vb, vec![3.0, 3.0, 4.0]);
        let va: Vec<f64> = ra.segments().iter().map(|s| s.value).collect();
        assert_eq!(va, vec![1.0, 2.0, 2.0]);
    }
}
