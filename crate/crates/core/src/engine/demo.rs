use serde::{Deserialize, Serialize};

use super::{drive, Episode, TrialDraws, TrialRecord};
use crate::arbitration::PolicyKind;
use crate::config::{Experiment, UncertaintySetting};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::operator::SwirlPlane;
use crate::scene::{Scene, Target};

/// Parameters of the planar three-policy illustration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub seed: u64,
    /// Target position; the approach starts at the origin.
    pub target: Vec3,
    /// Autonomy offset magnitude (m), applied in the X-Y plane.
    pub offset_m: f64,
    /// Shared-control range as a multiple of the start-to-target distance.
    pub range_factor: f64,
    /// Remaining distances (m) at which direction vectors are sampled, after the start.
    pub sample_distances_m: Vec<f64>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            seed: 103,
            target: Vec3::new(0.0, 0.2, 0.0),
            offset_m: 0.03,
            range_factor: 1.0,
            sample_distances_m: vec![0.110, 0.050],
        }
    }
}

/// Unit directions at one sampling point of a demo trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionSample {
    pub policy: PolicyKind,
    /// Nominal label of the sampling point: 0 for the start, else the distance (m).
    pub at_distance_m: f64,
    pub step: u32,
    pub pos: Vec3,
    pub alpha: f64,
    pub human: Vec3,
    pub robot: Vec3,
    pub command: Vec3,
    pub to_target: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoResult {
    pub setting: UncertaintySetting,
    pub traces: Vec<TrialRecord>,
    pub samples: Vec<DirectionSample>,
}

impl DemoResult {
    pub fn trace(&self, policy: PolicyKind) -> Option<&TrialRecord> {
        self.traces.iter().find(|t| t.meta.policy == policy)
    }
}

fn demo_scene(target: Vec3, range_factor: f64) -> Result<Scene> {
    let b0 = target.norm();
    if !(b0 > 0.0) {
        return Err(Error::invalid("demo.target", "must differ from the origin"));
    }
    // A second, never-assisted bolt keeps the scene well formed; the demo
    // injects no wrong-target period.
    let decoy = Vec3::new(target.y, -target.x, 0.0).unit_or_zero() * (0.5 * b0) + target * 0.5;
    let scene = Scene {
        targets: vec![
            Target { label: "target".into(), position: target },
            Target { label: "decoy".into(), position: decoy },
        ],
        home: Vec3::ZERO,
        range_d: range_factor * b0,
    };
    scene.validate()?;
    Ok(scene)
}

/// Replay the planar approach under autonomy-only uncertainty with each policy.
///
/// The scene's target replaces the grid layout and the confidence range is
/// `range_factor` times the start distance; every other model parameter comes
/// from `exp`.
pub fn run_demo2d(exp: &Experiment, cfg: &DemoConfig) -> Result<DemoResult> {
    if !(cfg.offset_m >= 0.0 && cfg.offset_m.is_finite()) {
        return Err(Error::invalid("demo.offset_m", "must be finite and >= 0"));
    }
    if cfg.target.z != 0.0 {
        return Err(Error::invalid("demo.target", "must lie in the X-Y plane"));
    }
    if !(cfg.range_factor >= 1.0 && cfg.range_factor.is_finite()) {
        return Err(Error::invalid("demo.range_factor", "must be finite and >= 1"));
    }
    let demo = exp.with_scene(demo_scene(cfg.target, cfg.range_factor)?)?;
    let (scene, arbitration) = (&demo.scene, demo.arbitration);
    let base = exp.levels.setting(0, 0, scene.range_d)?;
    let setting = UncertaintySetting {
        offset_m: cfg.offset_m,
        sigma_a: exp.levels.sigma_a_floor + exp.levels.sigma_a_scale * cfg.offset_m,
        ..base
    };
    let draws = TrialDraws::draw_with(
        cfg.seed,
        scene.home,
        scene,
        0,
        &exp.operator,
        SwirlPlane::Fixed(Vec3::Z),
        Some(Vec3::Z),
    )?;

    let mut traces = Vec::with_capacity(3);
    let mut samples = Vec::new();
    for policy in PolicyKind::ALL {
        let episode = Episode::from_draws(scene, &exp.sim, arbitration, 0, policy, setting, cfg.seed, draws)?;
        let record = drive(episode, &exp.operator, scene.range_d);
        samples.extend(sample_directions(&record, &cfg.sample_distances_m));
        traces.push(record);
    }
    Ok(DemoResult { setting, traces, samples })
}

fn sample_directions(record: &TrialRecord, distances: &[f64]) -> Vec<DirectionSample> {
    let target = record.meta.true_target;
    let sample = |at: f64, s: &super::StepRecord| DirectionSample {
        policy: record.meta.policy,
        at_distance_m: at,
        step: s.t,
        pos: s.pos,
        alpha: s.alpha,
        human: s.x.unit_or_zero(),
        robot: s.y.unit_or_zero(),
        command: s.m.unit_or_zero(),
        to_target: (target - s.pos).unit_or_zero(),
    };
    let mut out = Vec::with_capacity(distances.len() + 1);
    if let Some(first) = record.steps.first() {
        out.push(sample(0.0, first));
    }
    for &dist in distances {
        if let Some(s) = record.steps.iter().find(|s| s.pos.distance(target) <= dist) {
            out.push(sample(dist, s));
        }
    }
    out
}
