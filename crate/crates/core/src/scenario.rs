//! Scenario files, presets and canonical JSON.

use std::io;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::model::{CostRates, ProductionParams, TaskProfile};
use crate::screening::{theta_distribution, ScalarDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Packages,
    Allocations,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distributions {
    pub value: ScalarDistribution,
    pub scale: ScalarDistribution,
    /// Law of the CES index; derived from value and scale when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ScalarDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryPayload {
    pub profile_1: TaskProfile,
    pub profile_2: TaskProfile,
    /// Probability of `profile_1`.
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub production: ProductionParams,
    pub costs: CostRates,
    pub distributions: Distributions,
    pub setting: Setting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary: Option<BinaryPayload>,
    /// Profile used by the `efficient` and `cost` commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<TaskProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    UniformExample,
    UniformSymmetric { rho: f64, c: f64 },
}

impl Preset {
    /// `uniform-example` or `uniform-symmetric`; the latter takes `rho` and `c`.
    pub fn parse(name: &str, rho: Option<f64>, c: Option<f64>) -> Result<Self> {
        match name {
            "uniform-example" => Ok(Preset::UniformExample),
            "uniform-symmetric" => Ok(Preset::UniformSymmetric {
                rho: rho.ok_or_else(|| invalid("rho", "uniform-symmetric needs --rho"))?,
                c: c.ok_or_else(|| invalid("c", "uniform-symmetric needs --c"))?,
            }),
            other => Err(invalid("preset", format!("unknown preset {other:?}"))),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        match *self {
            Preset::UniformExample => uniform_symmetric(0.25, 0.125),
            Preset::UniformSymmetric { rho, c } => uniform_symmetric(rho, c),
        }
    }

    /// `(rho, c)` of the symmetric family.
    pub fn symmetric_params(&self) -> (f64, f64) {
        match *self {
            Preset::UniformExample => (0.25, 0.125),
            Preset::UniformSymmetric { rho, c } => (rho, c),
        }
    }
}

/// Uniform value and scale, `alpha = beta = gamma = rho`, all token costs `c`, base 1.
pub fn uniform_symmetric(rho: f64, c: f64) -> Result<Scenario> {
    if !(rho > 0.0 && rho < 1.0 / 3.0) {
        return Err(invalid("rho", format!("must lie in (0, 1/3), got {rho}")));
    }
    Ok(Scenario {
        production: ProductionParams::symmetric(rho, 1.0)?,
        costs: CostRates::uniform(c)?,
        distributions: Distributions {
            value: ScalarDistribution::Uniform01,
            scale: ScalarDistribution::Uniform01,
            theta: None,
        },
        setting: Setting::Allocations,
        binary: None,
        profile: None,
    })
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.distributions.value.validate()?;
        self.distributions.scale.validate()?;
        if let Some(t) = &self.distributions.theta {
            t.validate()?;
        }
        match (self.setting, &self.binary) {
            (Setting::Binary, None) => return Err(invalid("binary", "binary setting needs a binary payload")),
            (_, Some(b)) => {
                if !(b.f1 > 0.0 && b.f1 < 1.0) {
                    return Err(invalid("f1", format!("must lie in (0, 1), got {}", b.f1)));
                }
            }
            _ => {}
        }
        if self.setting == Setting::Allocations && self.distributions.value.is_point_mass() {
            return Err(invalid("distributions.value", "allocations need a value density"));
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s).map_err(|e| invalid("scenario", e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn theta_distribution(&self) -> Result<ScalarDistribution> {
        match &self.distributions.theta {
            Some(t) => Ok(t.clone()),
            None => theta_distribution(&self.distributions.value, &self.distributions.scale, &self.production),
        }
    }

    /// Compact JSON with every number written to 17 significant digits.
    pub fn to_canonical_json(&self) -> String {
        to_json_string(self, 17, false).expect("scenario serializes")
    }

    /// Hex SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `v` in plain decimal (scientific below `1e-5` and from `1e21`) with `digits`
/// significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mant) = match mant.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mant),
    };
    let d: String = mant.chars().filter(|c| *c != '.').collect();
    if !(-5..21).contains(&exp) {
        return format!("{sign}{mant}e{exp}");
    }
    let out = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), d)
    } else {
        let int_len = exp as usize + 1;
        if int_len >= d.len() {
            format!("{}{}.0", d, "0".repeat(int_len - d.len()))
        } else {
            format!("{}.{}", &d[..int_len], &d[int_len..])
        }
    };
    format!("{sign}{out}")
}

/// JSON formatter writing floats with a fixed number of significant digits.
pub struct SigFormatter {
    digits: usize,
    pretty: serde_json::ser::PrettyFormatter<'static>,
    indent: bool,
}

impl SigFormatter {
    pub fn new(digits: usize, indent: bool) -> Self {
        SigFormatter {
            digits,
            pretty: serde_json::ser::PrettyFormatter::new(),
            indent,
        }
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                if self.indent {
                    self.pretty.$name(w $(, $arg)*)
                } else {
                    serde_json::ser::CompactFormatter.$name(w $(, $arg)*)
                }
            }
        )*
    };
}

impl serde_json::ser::Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_sig(value, self.digits).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T, digits: usize, indent: bool) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFormatter::new(digits, indent));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidProfile(format!("serialization failed: {e}")))?;
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.125, 15), "0.125000000000000");
        assert_eq!(format_sig(139.0 / 480.0, 15), "0.289583333333333");
        assert_eq!(format_sig(-2.5, 3), "-2.50");
        assert_eq!(format_sig(1234.0, 4), "1234.0");
        assert_eq!(format_sig(12.5, 5), "12.500");
        assert_eq!(format_sig(1e-9, 3), "1.00e-9");
        assert_eq!(format_sig(0.0, 15), "0.0");
        assert_eq!(format_sig(1e-6, 3), "1.00e-6");
        assert_eq!(format_sig(2.5e-5, 2), "0.000025");
    }

    #[test]
    fn canonical_round_trip() {
        let sc = uniform_symmetric(0.3, 0.1).unwrap();
        let text = sc.to_canonical_json();
        let back = Scenario::from_json(&text).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.to_canonical_json(), text);
        assert_eq!(back.hash(), sc.hash());
    }

    #[test]
    fn presets_agree() {
        let a = Preset::UniformExample.scenario().unwrap();
        let b = Preset::UniformSymmetric { rho: 0.25, c: 0.125 }.scenario().unwrap();
        assert_eq!(a, b);
        assert!(uniform_symmetric(1.0 / 3.0, 0.1).is_err());
    }
}
