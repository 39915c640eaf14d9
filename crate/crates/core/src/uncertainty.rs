//! Confidence models for intent-inference and autonomy uncertainty.
//!
//! Both confidences are functions of the distance `d` between the end
//! effector and the nominal target, and both vanish outside the shared-control
//! range `D`:
//!
//! * intent confidence `conf_in(d) = erf((1 - d/D) / a)`, where the regulation
//!   constant `a = 1 - (σn - D)² / E` grows toward 1 as the intent spread σn
//!   grows toward `D` (lower confidence);
//! * autonomy confidence `conf_au(d) = erf((d/D) / b)` with
//!   `b = σa / (D · erfinv(Γ))`, so that `conf_au(σa) = Γ` and the robot's
//!   confidence collapses as it closes in on a target it can only localize to
//!   within σa.
//!
//! The autonomy model is motivated by the probability of the end effector's
//! final location landing outside a sphere of radius `R` around the true
//! target, given in closed form by [`encounter_prob`] and by quadrature in
//! [`encounter_prob_numeric`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::special::{erf, erf_inv, integrate};

/// Isotropic Gaussian: every axis has standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoGaussian {
    pub mean: Vec3,
    pub sigma: f64,
}

impl IsoGaussian {
    pub fn new(mean: Vec3, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be finite and >= 0, got {sigma}")));
        }
        Ok(IsoGaussian { mean, sigma })
    }

    /// Distribution of `P = T_s + w` where `T_s ~ self` and `w ~ N(0, other.sigma²)`.
    pub fn convolve(&self, other: &IsoGaussian) -> IsoGaussian {
        IsoGaussian { mean: self.mean + other.mean, sigma: convolve_variance(self.sigma, other.sigma) }
    }
}

/// How the distance enters the autonomy confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutonomyDistance {
    /// `erf((d/D)/b)`: guarantees `conf_au(σa) = Γ`.
    #[default]
    Normalized,
    /// `erf(d/b)`: the literal reading, kept for comparison.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    /// Shared-control range `D` (m).
    pub range_d: f64,
    /// Floor of the intent regulation constant `a`.
    pub a_min: f64,
    /// Autonomy confidence level reached at `d = σa`.
    pub gamma: f64,
    /// Regulation constant `E = D² / (1 - a_min)`.
    pub e_const: f64,
    pub autonomy_distance: AutonomyDistance,
}

impl ConfidenceParams {
    pub fn new(range_d: f64, a_min: f64, gamma: f64) -> Result<Self> {
        if !(range_d > 0.0 && range_d.is_finite()) {
            return Err(Error::invalid("range_d", format!("must be positive, got {range_d}")));
        }
        if !(a_min > 0.0 && a_min <= 1.0) {
            return Err(Error::invalid("a_min", format!("must lie in (0, 1], got {a_min}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
        }
        let e_const = if a_min < 1.0 { range_d * range_d / (1.0 - a_min) } else { f64::INFINITY };
        Ok(ConfidenceParams { range_d, a_min, gamma, e_const, autonomy_distance: AutonomyDistance::Normalized })
    }

    pub fn with_autonomy_distance(mut self, mode: AutonomyDistance) -> Self {
        self.autonomy_distance = mode;
        self
    }

    /// Regulation constant `a` for an intent spread `sigma_n`.
    ///
    /// `sigma_n` is clamped to `[0, D]`; `a` is clamped to `[a_min, 1]`.
    pub fn intent_regulation(&self, sigma_n: f64) -> f64 {
        let d = self.range_d;
        let s = sigma_n.clamp(0.0, d);
        let a = 1.0 - (s - d).powi(2) / self.e_const;
        a.clamp(self.a_min, 1.0)
    }
}

/// `erf((1 - d/D) / a)` inside the range, 0 outside.
pub fn conf_in_regulated(d: f64, a: f64, range_d: f64) -> f64 {
    if !(d <= range_d) {
        return 0.0;
    }
    erf((1.0 - d / range_d) / a).max(0.0)
}

/// Confidence that the nominal target is the true one.
pub fn conf_in(d: f64, sigma_n: f64, p: &ConfidenceParams) -> f64 {
    conf_in_regulated(d.max(0.0), p.intent_regulation(sigma_n), p.range_d)
}

/// Confidence that the robot can complete the reach on its own.
pub fn conf_au(d: f64, sigma_a: f64, p: &ConfidenceParams) -> f64 {
    let d = d.max(0.0);
    if d > p.range_d {
        return 0.0;
    }
    if sigma_a <= 0.0 {
        // b -> 0+: a unit step away from the target
        return if d > 0.0 { 1.0 } else { 0.0 };
    }
    let root = erf_inv(p.gamma);
    match p.autonomy_distance {
        AutonomyDistance::Normalized => {
            let b = sigma_a / (p.range_d * root);
            erf((d / p.range_d) / b)
        }
        AutonomyDistance::Raw => {
            let b = sigma_a / (p.range_d * root);
            erf(d / b)
        }
    }
}

/// Standard deviation of the sum of two independent isotropic Gaussians.
pub fn convolve_variance(sigma_s: f64, sigma_w: f64) -> f64 {
    sigma_s.hypot(sigma_w)
}

/// Probability that an isotropic 3-D Gaussian sample lies at least `r` from its mean.
pub fn encounter_prob(r: f64, sigma_a: f64) -> Result<f64> {
    check_radius(r, sigma_a)?;
    let s2 = sigma_a * sigma_a;
    let p = 1.0 - erf(r / (2.0 * s2).sqrt()) + (2.0 / (PI * s2)).sqrt() * r * (-r * r / (2.0 * s2)).exp();
    Ok(p.clamp(0.0, 1.0))
}

/// Radial quadrature of the same probability; reference for [`encounter_prob`].
pub fn encounter_prob_numeric(r: f64, sigma_a: f64) -> Result<f64> {
    check_radius(r, sigma_a)?;
    // In units of sigma: sqrt(2/pi) * int_{r/sigma}^inf u^2 exp(-u^2/2) du.
    let lo = r / sigma_a;
    let hi = lo + 40.0;
    let norm = (2.0 / PI).sqrt();
    let v = integrate(|u| norm * u * u * (-0.5 * u * u).exp(), lo, hi, 1e-13);
    Ok(v.clamp(0.0, 1.0))
}

fn check_radius(r: f64, sigma_a: f64) -> Result<()> {
    if !(sigma_a > 0.0) {
        return Err(Error::DegenerateDistribution);
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid("r", format!("must be finite and >= 0, got {r}")));
    }
    Ok(())
}
