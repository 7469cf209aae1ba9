//! Scalar type distributions, virtual values and the law of the CES index.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ProductionParams;
use crate::verify::quad::integrate;

/// Distribution of a one-dimensional type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarDistribution {
    Uniform01,
    /// All mass at one point. Only valid as a scale distribution.
    PointMass { at: f64 },
    /// Law of `w * s^kappa` for independent uniform `w`, `s`.
    UniformProduct { kappa: f64 },
    Tabulated(Tabulated),
}

/// Survival function and density on a grid, interpolated with cubic Hermite pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTabulated", into = "RawTabulated")]
pub struct Tabulated {
    grid: Vec<f64>,
    survival: Vec<f64>,
    pdf: Vec<f64>,
    pdf_slope: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTabulated {
    grid: Vec<f64>,
    survival: Vec<f64>,
    pdf: Vec<f64>,
}

impl TryFrom<RawTabulated> for Tabulated {
    type Error = Error;
    fn try_from(r: RawTabulated) -> Result<Self> {
        Tabulated::new(r.grid, r.survival, r.pdf)
    }
}

impl From<Tabulated> for RawTabulated {
    fn from(t: Tabulated) -> Self {
        RawTabulated {
            grid: t.grid,
            survival: t.survival,
            pdf: t.pdf,
        }
    }
}

impl Tabulated {
    pub fn new(grid: Vec<f64>, survival: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if n < 3 || survival.len() != n || pdf.len() != n {
            return Err(invalid("tabulated", "grid, survival and pdf need equal length >= 3"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("tabulated", "grid must be strictly increasing"));
        }
        if pdf.iter().any(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(invalid("tabulated", "pdf must be finite and nonnegative"));
        }
        if survival.windows(2).any(|w| w[1] > w[0] + 1e-8) || (survival[0] - 1.0).abs() > 1e-8 || survival[n - 1].abs() > 1e-8
        {
            return Err(invalid("tabulated", "survival must fall monotonically from 1 to 0"));
        }
        // finite-difference slopes of the density
        let mut pdf_slope = vec![0.0; n];
        for i in 0..n {
            pdf_slope[i] = if i == 0 {
                (pdf[1] - pdf[0]) / (grid[1] - grid[0])
            } else if i == n - 1 {
                (pdf[n - 1] - pdf[n - 2]) / (grid[n - 1] - grid[n - 2])
            } else {
                (pdf[i + 1] - pdf[i - 1]) / (grid[i + 1] - grid[i - 1])
            };
        }
        let t = Tabulated {
            grid,
            survival,
            pdf,
            pdf_slope,
        };
        // exact for the piecewise cubic density: Simpson per cell
        let mass: f64 = t
            .grid
            .windows(2)
            .map(|w| (w[1] - w[0]) / 6.0 * (t.pdf_at(w[0]) + 4.0 * t.pdf_at(0.5 * (w[0] + w[1])) + t.pdf_at(w[1])))
            .sum();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(invalid("tabulated", format!("density integrates to {mass}, expected 1")));
        }
        Ok(t)
    }

    /// Tabulate given survival and density functions on `n` uniform points.
    pub fn from_fns<S: FnMut(f64) -> f64, F: FnMut(f64) -> f64>(
        lo: f64,
        hi: f64,
        n: usize,
        mut survival: S,
        mut pdf: F,
    ) -> Result<Self> {
        let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let mut sv: Vec<f64> = grid.iter().map(|&t| survival(t).clamp(0.0, 1.0)).collect();
        sv[0] = 1.0;
        sv[n - 1] = 0.0;
        let pv = grid.iter().map(|&t| pdf(t).max(0.0)).collect();
        Self::new(grid, sv, pv)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    fn cell(&self, t: f64) -> usize {
        let n = self.grid.len();
        match self.grid.binary_search_by(|g| g.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn hermite(t: f64, x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
        let h = x1 - x0;
        let u = (t - x0) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * f0 + (u3 - 2.0 * u2 + u) * h * d0 + (-2.0 * u3 + 3.0 * u2) * f1 + (u3 - u2) * h * d1
    }

    fn survival_at(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo {
            return 1.0;
        }
        if t >= hi {
            return 0.0;
        }
        let i = self.cell(t);
        Self::hermite(
            t,
            self.grid[i],
            self.grid[i + 1],
            self.survival[i],
            self.survival[i + 1],
            -self.pdf[i],
            -self.pdf[i + 1],
        )
        .clamp(0.0, 1.0)
    }

    fn pdf_at(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        let i = self.cell(t);
        Self::hermite(
            t,
            self.grid[i],
            self.grid[i + 1],
            self.pdf[i],
            self.pdf[i + 1],
            self.pdf_slope[i],
            self.pdf_slope[i + 1],
        )
        .max(0.0)
    }
}

/// `kappa * sum_{k>=2} C(p, k) (-eps)^k`, accurate near the top of the support.
fn binomial_tail(p: f64, eps: f64) -> f64 {
    let mut term = p * (-eps); // k = 1
    let mut sum = 0.0;
    for k in 2..400 {
        term *= (p - (k as f64 - 1.0)) / k as f64 * (-eps);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

impl ScalarDistribution {
    pub fn support(&self) -> (f64, f64) {
        match self {
            ScalarDistribution::Uniform01 | ScalarDistribution::UniformProduct { .. } => (0.0, 1.0),
            ScalarDistribution::PointMass { at } => (*at, *at),
            ScalarDistribution::Tabulated(t) => t.support(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarDistribution::PointMass { at } if !(at.is_finite() && *at > 0.0) => {
                Err(invalid("point_mass", format!("location must be positive, got {at}")))
            }
            ScalarDistribution::UniformProduct { kappa } if !(*kappa > 0.0 && *kappa < 1.0) => {
                Err(invalid("kappa", format!("must lie in (0, 1), got {kappa}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, ScalarDistribution::PointMass { .. })
    }

    /// `1 - F(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            ScalarDistribution::Uniform01 => (1.0 - t).clamp(0.0, 1.0),
            ScalarDistribution::PointMass { at } => {
                if t < *at {
                    1.0
                } else {
                    0.0
                }
            }
            ScalarDistribution::UniformProduct { kappa } => {
                if t <= 0.0 {
                    return 1.0;
                }
                if t >= 1.0 {
                    return 0.0;
                }
                let k = *kappa;
                let p = 1.0 / k;
                let eps = 1.0 - t;
                if eps < 0.1 {
                    (k * binomial_tail(p, eps) / (1.0 - k)).max(0.0)
                } else {
                    ((1.0 - k) - t + k * t.powf(p)) / (1.0 - k)
                }
            }
            ScalarDistribution::Tabulated(tab) => tab.survival_at(t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            ScalarDistribution::Uniform01 => {
                if (0.0..=1.0).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            ScalarDistribution::PointMass { .. } => 0.0,
            ScalarDistribution::UniformProduct { kappa } => {
                if !(0.0..=1.0).contains(&t) {
                    return 0.0;
                }
                let k = *kappa;
                let p = 1.0 / k;
                if t == 0.0 {
                    return 1.0 / (1.0 - k);
                }
                -((p - 1.0) * t.ln()).exp_m1() / (1.0 - k)
            }
            ScalarDistribution::Tabulated(tab) => tab.pdf_at(t),
        }
    }

    /// `(1 - F(t)) / f(t)`, with the limit 0 at a top endpoint where both vanish.
    pub fn inverse_hazard(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        if self.is_point_mass() {
            return Err(Error::Unsupported("virtual value of a point mass".into()));
        }
        if !(t >= lo && t <= hi) {
            return Err(invalid("t", format!("{t} outside support [{lo}, {hi}]")));
        }
        let s = self.survival(t);
        let f = self.pdf(t);
        if f > 0.0 {
            return Ok(s / f);
        }
        if s == 0.0 && t >= hi {
            return Ok(0.0);
        }
        Err(Error::ZeroDensity(t))
    }

    pub fn virtual_value(&self, t: f64) -> Result<f64> {
        Ok(t - self.inverse_hazard(t)?)
    }

    /// Check that the virtual value is nondecreasing on `[from, hi]`.
    pub fn check_monotone_virtual_value(&self, from: f64) -> Result<()> {
        let (lo, hi) = self.support();
        let start = from.max(lo);
        let n = 1024;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = start + (hi - start) * i as f64 / n as f64;
            let v = match self.virtual_value(t) {
                Ok(v) => v,
                Err(Error::ZeroDensity(_)) => continue,
                Err(e) => return Err(e),
            };
            if v < prev - 1e-9 * (1.0 + v.abs()) {
                return Err(Error::NonMonotoneVirtualValue { at: t });
            }
            prev = prev.max(v);
        }
        Ok(())
    }

    /// Generalised inverse of the virtual value: largest `t` with `phi(t) <= level`,
    /// clamped to the support.
    pub fn virtual_value_inverse(&self, level: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let phi = |t: f64| self.virtual_value(t);
        if phi(hi)? <= level {
            return Ok(hi);
        }
        let plo = match phi(lo) {
            Ok(v) => v,
            Err(Error::ZeroDensity(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        if plo > level {
            return Ok(lo);
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let v = match phi(m) {
                Ok(v) => v,
                Err(Error::ZeroDensity(_)) => f64::NEG_INFINITY,
                Err(e) => return Err(e),
            };
            if v <= level {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(a)
    }
}

const TABULATION_POINTS: usize = 4001;

/// Law of `theta = w * s^kappa` for independent value and scale draws.
pub fn theta_distribution(
    value: &ScalarDistribution,
    scale: &ScalarDistribution,
    params: &ProductionParams,
) -> Result<ScalarDistribution> {
    value.validate()?;
    scale.validate()?;
    let kappa = params.kappa();
    if value.is_point_mass() {
        return Err(Error::Unsupported("point-mass value distribution has no density".into()));
    }
    match (value, scale) {
        (ScalarDistribution::Uniform01, ScalarDistribution::Uniform01) => {
            return Ok(ScalarDistribution::UniformProduct { kappa });
        }
        (_, ScalarDistribution::PointMass { at }) => {
            if *at == 1.0 {
                return Ok(value.clone());
            }
            let c = at.powf(kappa);
            let (lo, hi) = value.support();
            let tab = Tabulated::from_fns(
                lo * c,
                hi * c,
                TABULATION_POINTS,
                |t| value.survival(t / c),
                |t| value.pdf(t / c) / c,
            )?;
            return Ok(ScalarDistribution::Tabulated(tab));
        }
        _ => {}
    }
    let (wl, wh) = value.support();
    let (sl, sh) = scale.support();
    if wl < 0.0 || sl < 0.0 {
        return Err(Error::Unsupported("negative supports".into()));
    }
    let lo = wl * sl.powf(kappa);
    let hi = wh * sh.powf(kappa);
    // t / s^kappa crosses the value support bounds at these scales
    let crossings = |t: f64| -> Vec<f64> {
        let mut v = Vec::new();
        for w in [wl, wh] {
            if w > 0.0 && t > 0.0 {
                v.push((t / w).powf(1.0 / kappa));
            }
        }
        v
    };
    let mut failure = None;
    let mut surv = |t: f64| -> f64 {
        let r = integrate(
            |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                value.survival(t / s.powf(kappa)) * scale.pdf(s)
            },
            sl,
            sh,
            &crossings(t),
            1e-11,
        );
        match r {
            Ok(i) => i.value,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let mut fail2 = None;
    let mut dens = |t: f64| -> f64 {
        let r = integrate(
            |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let c = s.powf(kappa);
                value.pdf(t / c) / c * scale.pdf(s)
            },
            sl,
            sh,
            &crossings(t),
            1e-11,
        );
        match r {
            Ok(i) => i.value,
            Err(e) => {
                fail2.get_or_insert(e);
                0.0
            }
        }
    };
    let grid: Vec<f64> = (0..TABULATION_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (TABULATION_POINTS - 1) as f64)
        .collect();
    let sv: Vec<f64> = grid.iter().map(|&t| surv(t)).collect();
    let pv: Vec<f64> = grid.iter().map(|&t| dens(t)).collect();
    if let Some(e) = failure.or(fail2) {
        return Err(e);
    }
    let mut sv = sv;
    sv[0] = 1.0;
    *sv.last_mut().unwrap() = 0.0;
    Ok(ScalarDistribution::Tabulated(Tabulated::new(grid, sv, pv)?))
}
