//! Arbitration policies and the blending law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::uncertainty::{conf_au, conf_in, ConfidenceParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Robot authority grows as the end effector nears the nominal target.
    Positive,
    /// Robot authority shrinks as the end effector nears the nominal target.
    Negative,
    /// Product of intent and autonomy confidence.
    #[serde(rename = "bell", alias = "bell_shaped")]
    BellShaped,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::Positive, PolicyKind::Negative, PolicyKind::BellShaped];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Positive => "positive",
            PolicyKind::Negative => "negative",
            PolicyKind::BellShaped => "bell",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "pos" => Ok(PolicyKind::Positive),
            "negative" | "neg" => Ok(PolicyKind::Negative),
            "bell" | "bell_shaped" | "bell-shaped" | "bellshaped" => Ok(PolicyKind::BellShaped),
            other => {
                Err(Error::invalid("policy", format!("unknown policy {other:?} (expected positive, negative or bell)")))
            }
        }
    }
}

/// One linear distance ramp: it spans `[0, ramp·D]` and is capped at `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ramp {
    pub ramp: f64,
    pub cap: f64,
}

impl Default for Ramp {
    fn default() -> Self {
        Ramp { ramp: 1.0, cap: 1.0 }
    }
}

impl Ramp {
    fn validate(&self, field: &'static str) -> Result<()> {
        if !(self.ramp > 0.0 && self.ramp <= 1.0) {
            return Err(Error::invalid(field, format!("ramp must lie in (0, 1], got {}", self.ramp)));
        }
        if !(0.0..=1.0).contains(&self.cap) {
            return Err(Error::invalid(field, format!("cap must lie in [0, 1], got {}", self.cap)));
        }
        Ok(())
    }
}

/// Shapes of the two distance-ramp baselines.
///
/// With `ramp = 1` and `cap = 1` they are the plain linear ramps `1 - d/D`
/// (positive) and `d/D` (negative). The defaults steepen both so that the
/// negative policy starts at full authority from typical start distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineShape {
    pub positive: Ramp,
    pub negative: Ramp,
}

impl Default for BaselineShape {
    fn default() -> Self {
        BaselineShape { positive: Ramp { ramp: 0.8, cap: 1.0 }, negative: Ramp { ramp: 0.5, cap: 1.0 } }
    }
}

impl BaselineShape {
    /// Plain `1 - d/D` and `d/D` ramps.
    pub fn linear() -> Self {
        BaselineShape { positive: Ramp::default(), negative: Ramp::default() }
    }
}

impl BaselineShape {
    pub fn validate(&self) -> Result<()> {
        self.positive.validate("baseline.positive")?;
        self.negative.validate("baseline.negative")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationParams {
    pub confidence: ConfidenceParams,
    pub baseline: BaselineShape,
}

/// Per-step arbitration outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationState {
    pub d: f64,
    pub conf_in: f64,
    pub conf_au: f64,
    pub alpha: f64,
}

/// Arbitration weight given to the robot at distance `d` from the nominal target.
pub fn alpha(policy: PolicyKind, d: f64, sigma_n: f64, sigma_a: f64, p: &ArbitrationParams) -> ArbitrationState {
    let range = p.confidence.range_d;
    let ci = conf_in(d, sigma_n, &p.confidence);
    let ca = conf_au(d, sigma_a, &p.confidence);
    let a = if !(d <= range) {
        0.0
    } else {
        let (pos, neg) = (p.baseline.positive, p.baseline.negative);
        match policy {
            PolicyKind::BellShaped => ci * ca,
            PolicyKind::Positive => (1.0 - d / (pos.ramp * range)).clamp(0.0, pos.cap),
            PolicyKind::Negative => (d / (neg.ramp * range)).clamp(0.0, neg.cap),
        }
    };
    ArbitrationState { d, conf_in: ci, conf_au: ca, alpha: a.clamp(0.0, 1.0) }
}

/// Final motion command `(1 - α)·x + α·y`.
pub fn blend(x: Vec3, y: Vec3, alpha: f64) -> Result<Vec3> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(x * (1.0 - alpha) + y * alpha)
}
