//! Synthetic human operator and the straight-line robot agent.
//!
//! The operator heads for the true target along a direction rotated by
//! `θ_t = Θ · b_t / D` about a per-trial axis, where `b_t` is the remaining
//! distance; the rotation fades as the target gets close, which produces a
//! curved approach that converges onto the target.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{any_orthogonal, rotate_about_axis, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    /// Mean of the initial deviation angle Θ (degrees).
    pub theta0_mean_deg: f64,
    /// Standard deviation of Θ (degrees).
    pub theta0_sd_deg: f64,
    /// Input magnitude per step (m/step).
    pub speed_a: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams { theta0_mean_deg: 20.0, theta0_sd_deg: 10.0, speed_a: 0.0015 }
    }
}

impl OperatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed_a > 0.0 && self.speed_a.is_finite()) {
            return Err(Error::invalid("operator.speed_a", format!("must be positive, got {}", self.speed_a)));
        }
        if !(self.theta0_sd_deg >= 0.0 && self.theta0_mean_deg.is_finite()) {
            return Err(Error::invalid("operator.theta0_sd_deg", "must be >= 0"));
        }
        Ok(())
    }
}

/// Per-trial operator draw; fixed for the life of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorState {
    /// Initial deviation angle Θ (radians).
    pub theta_big: f64,
    /// Unit axis the approach direction is rotated about.
    pub swirl_axis: Vec3,
    pub true_target: Vec3,
}

/// How the per-trial rotation axis is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwirlPlane {
    /// Uniform among unit vectors orthogonal to the initial approach direction.
    Free,
    /// Fixed axis (planar motion when it is orthogonal to the approach).
    Fixed(Vec3),
}

/// Draw Θ and the rotation axis for one approach from `start` to `true_target`.
pub fn draw_theta<R: Rng + ?Sized>(
    rng: &mut R,
    p: &OperatorParams,
    start: Vec3,
    true_target: Vec3,
    plane: SwirlPlane,
) -> Result<OperatorState> {
    let z: f64 = StandardNormal.sample(rng);
    let theta_deg = p.theta0_mean_deg + p.theta0_sd_deg * z;
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let swirl_axis = match plane {
        SwirlPlane::Fixed(axis) => axis.unit()?,
        SwirlPlane::Free => {
            let dir = (true_target - start).unit()?;
            let e1 = any_orthogonal(dir)?;
            let e2 = dir.cross(e1);
            (e1 * phase.cos() + e2 * phase.sin()).unit()?
        }
    };
    Ok(OperatorState { theta_big: theta_deg.to_radians(), swirl_axis, true_target })
}

/// Current deviation angle for a remaining distance `b`.
pub fn deviation_angle(theta_big: f64, b: f64, range_d: f64) -> f64 {
    theta_big * b / range_d
}

/// Synthesized human input: magnitude `A′`, rotated off the target direction.
pub fn human_input(pos: Vec3, st: &OperatorState, p: &OperatorParams, range_d: f64) -> Vec3 {
    let to_target = st.true_target - pos;
    let b = to_target.norm();
    if b == 0.0 {
        return Vec3::ZERO;
    }
    let dir = to_target * (1.0 / b);
    let theta = deviation_angle(st.theta_big, b, range_d);
    rotate_about_axis(dir, st.swirl_axis, theta).expect("swirl axis is unit length") * p.speed_a
}

/// Robot input: straight toward the nominal target, never overshooting it.
pub fn robot_input(pos: Vec3, nominal_target: Vec3, speed_a: f64) -> Vec3 {
    let to_nominal = nominal_target - pos;
    let d = to_nominal.norm();
    if d == 0.0 {
        return Vec3::ZERO;
    }
    to_nominal * (speed_a.min(d) / d)
}
