//! Simulation configuration and the TOML config file.
//!
//! Every section and key is optional; missing values take the defaults below.
//! Unknown keys are rejected so that typos fail loudly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arbitration::{ArbitrationParams, BaselineShape};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::operator::OperatorParams;
use crate::scene::{RowLayout, Scene, Target};
use crate::uncertainty::{AutonomyDistance, ConfidenceParams};

pub const LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Control period (s).
    pub dt: f64,
    /// Human input magnitude A′ (m/step); also the robot's speed cap.
    pub speed_a: f64,
    pub success_radius: f64,
    /// Number of steps averaged by the stuck detector.
    pub stuck_window: u32,
    /// Mean command magnitude below which a trial counts as stuck; A′/100 when unset.
    pub stuck_speed_eps: Option<f64>,
    pub timeout_s: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.05,
            speed_a: 0.0015,
            success_radius: 0.01,
            stuck_window: 20,
            stuck_speed_eps: None,
            timeout_s: 60.0,
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn stuck_eps(&self) -> f64 {
        self.stuck_speed_eps.unwrap_or(self.speed_a / 100.0)
    }

    /// Largest step count that does not exceed the timeout.
    pub fn step_limit(&self) -> u32 {
        (self.timeout_s / self.dt + 1e-9).floor() as u32
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("sim.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.speed_a > 0.0 && self.speed_a.is_finite()) {
            return Err(Error::invalid("sim.speed_a", format!("must be positive, got {}", self.speed_a)));
        }
        if !(self.success_radius > 0.0) {
            return Err(Error::invalid("sim.success_radius", "must be positive"));
        }
        if !(self.timeout_s > self.stuck_window as f64 * self.dt) {
            return Err(Error::invalid("sim.timeout_s", "must exceed stuck_window * dt"));
        }
        if let Some(eps) = self.stuck_speed_eps {
            if !(eps >= 0.0) {
                return Err(Error::invalid("sim.stuck_speed_eps", "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Mapping from the six uncertainty levels to injected errors and model spreads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelMap {
    /// Wrong-target period per intent level (s).
    pub intent_durations_s: [f64; LEVELS],
    /// Nominal-target offset per autonomy level (m).
    pub autonomy_offsets_m: [f64; LEVELS],
    /// σn = sigma_n_floor + (level / 5) · sigma_n_scale · D.
    pub sigma_n_floor: f64,
    pub sigma_n_scale: f64,
    /// σa = sigma_a_floor + sigma_a_scale · offset.
    pub sigma_a_floor: f64,
    pub sigma_a_scale: f64,
}

impl Default for LevelMap {
    fn default() -> Self {
        LevelMap {
            intent_durations_s: [0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            autonomy_offsets_m: [0.0, 0.02, 0.04, 0.06, 0.08, 0.10],
            sigma_n_floor: 0.0,
            sigma_n_scale: 0.5,
            sigma_a_floor: 0.08,
            sigma_a_scale: 1.0,
        }
    }
}

/// One cell of the 6 × 6 uncertainty grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySetting {
    pub intent_level: u8,
    pub autonomy_level: u8,
    pub wrong_duration_s: f64,
    pub offset_m: f64,
    pub sigma_n: f64,
    pub sigma_a: f64,
}

impl LevelMap {
    pub fn validate(&self) -> Result<()> {
        if self.intent_durations_s.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid("levels.intent_durations_s", "must be finite and >= 0"));
        }
        if self.autonomy_offsets_m.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid("levels.autonomy_offsets_m", "must be finite and >= 0"));
        }
        for (name, v) in [
            ("levels.sigma_n_floor", self.sigma_n_floor),
            ("levels.sigma_n_scale", self.sigma_n_scale),
            ("levels.sigma_a_floor", self.sigma_a_floor),
            ("levels.sigma_a_scale", self.sigma_a_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn setting(&self, intent_level: u8, autonomy_level: u8, range_d: f64) -> Result<UncertaintySetting> {
        if intent_level as usize >= LEVELS {
            return Err(Error::invalid("intent_level", format!("must be 0..=5, got {intent_level}")));
        }
        if autonomy_level as usize >= LEVELS {
            return Err(Error::invalid("autonomy_level", format!("must be 0..=5, got {autonomy_level}")));
        }
        let offset_m = self.autonomy_offsets_m[autonomy_level as usize];
        Ok(UncertaintySetting {
            intent_level,
            autonomy_level,
            wrong_duration_s: self.intent_durations_s[intent_level as usize],
            offset_m,
            sigma_n: self.sigma_n_floor + intent_level as f64 / 5.0 * self.sigma_n_scale * range_d,
            sigma_a: self.sigma_a_floor + self.sigma_a_scale * offset_m,
        })
    }

    /// All 36 cells, intent-major.
    pub fn all_settings(&self, range_d: f64) -> Vec<UncertaintySetting> {
        let mut out = Vec::with_capacity(LEVELS * LEVELS);
        for i in 0..LEVELS as u8 {
            for a in 0..LEVELS as u8 {
                out.push(self.setting(i, a, range_d).expect("levels in range"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSection {
    pub theta0_mean_deg: f64,
    pub theta0_sd_deg: f64,
}

impl Default for OperatorSection {
    fn default() -> Self {
        let p = OperatorParams::default();
        OperatorSection { theta0_mean_deg: p.theta0_mean_deg, theta0_sd_deg: p.theta0_sd_deg }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceSection {
    pub a_min: f64,
    pub gamma: f64,
    pub autonomy_distance: AutonomyDistance,
}

impl Default for ConfidenceSection {
    fn default() -> Self {
        ConfidenceSection { a_min: 0.8, gamma: 0.25, autonomy_distance: AutonomyDistance::Normalized }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub in_row_spacing: f64,
    pub row_separation: f64,
    pub row_heights: [f64; 2],
    pub row_yaw_deg: f64,
    pub centroid_distance: f64,
    pub range_d: f64,
    /// Explicit targets; overrides the row layout when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<Target>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub home: Option<Vec3>,
}

impl Default for SceneSection {
    fn default() -> Self {
        let l = RowLayout::default();
        SceneSection {
            in_row_spacing: l.in_row_spacing,
            row_separation: l.row_separation,
            row_heights: l.row_heights,
            row_yaw_deg: l.row_yaw_deg,
            centroid_distance: l.centroid_distance,
            range_d: l.range_d,
            targets: None,
            home: None,
        }
    }
}

impl SceneSection {
    pub fn build(&self) -> Result<Scene> {
        match &self.targets {
            Some(targets) => {
                let scene =
                    Scene { targets: targets.clone(), home: self.home.unwrap_or(Vec3::ZERO), range_d: self.range_d };
                scene.validate()?;
                Ok(scene)
            }
            None => {
                let mut scene = RowLayout {
                    in_row_spacing: self.in_row_spacing,
                    row_separation: self.row_separation,
                    row_heights: self.row_heights,
                    row_yaw_deg: self.row_yaw_deg,
                    centroid_distance: self.centroid_distance,
                    range_d: self.range_d,
                }
                .build()?;
                if let Some(home) = self.home {
                    scene.home = home;
                    scene.validate()?;
                }
                Ok(scene)
            }
        }
    }
}

/// Root of the config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArbiterConfig {
    pub sim: SimConfig,
    pub operator: OperatorSection,
    pub confidence: ConfidenceSection,
    pub baseline: BaselineShape,
    pub levels: LevelMap,
    pub scene: SceneSection,
    /// Planar illustration run by `demo2d`; not used by the grid.
    pub demo: crate::engine::DemoConfig,
}

impl ArbiterConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Validate and assemble the runtime model.
    pub fn resolve(&self) -> Result<Experiment> {
        self.sim.validate()?;
        self.levels.validate()?;
        self.baseline.validate()?;
        let scene = self.scene.build()?;
        let confidence = ConfidenceParams::new(scene.range_d, self.confidence.a_min, self.confidence.gamma)?
            .with_autonomy_distance(self.confidence.autonomy_distance);
        let operator = OperatorParams {
            theta0_mean_deg: self.operator.theta0_mean_deg,
            theta0_sd_deg: self.operator.theta0_sd_deg,
            speed_a: self.sim.speed_a,
        };
        operator.validate()?;
        Ok(Experiment {
            scene,
            sim: self.sim,
            operator,
            arbitration: ArbitrationParams { confidence, baseline: self.baseline },
            levels: self.levels.clone(),
        })
    }
}

/// Fully resolved, validated model shared by the engine, service and CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scene: Scene,
    pub sim: SimConfig,
    pub operator: OperatorParams,
    pub arbitration: ArbitrationParams,
    pub levels: LevelMap,
}

impl Default for Experiment {
    fn default() -> Self {
        ArbiterConfig::default().resolve().expect("defaults are valid")
    }
}

impl Experiment {
    pub fn setting(&self, intent_level: u8, autonomy_level: u8) -> Result<UncertaintySetting> {
        self.levels.setting(intent_level, autonomy_level, self.scene.range_d)
    }

    pub fn all_settings(&self) -> Vec<UncertaintySetting> {
        self.levels.all_settings(self.scene.range_d)
    }

    /// The same model over another scene; the confidence range follows the scene's `range_d`.
    pub fn with_scene(&self, scene: Scene) -> Result<Experiment> {
        scene.validate()?;
        let c = self.arbitration.confidence;
        let confidence =
            ConfidenceParams::new(scene.range_d, c.a_min, c.gamma)?.with_autonomy_distance(c.autonomy_distance);
        Ok(Experiment { scene, arbitration: ArbitrationParams { confidence, ..self.arbitration }, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let e = Experiment::default();
        assert_eq!(e.scene.len(), 6);
        assert_eq!(e.all_settings().len(), 36);
    }

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(ArbiterConfig::from_toml_str("").unwrap(), ArbiterConfig::default());
    }

    #[test]
    fn round_trip_text() {
        let c = ArbiterConfig::default();
        assert_eq!(ArbiterConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = ArbiterConfig::from_toml_str("[sim]\ndt = 0.05\nspeeed_a = 1.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("speeed_a"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn level_mapping() {
        let e = Experiment::default();
        let s = e.setting(5, 3).unwrap();
        assert_eq!(s.wrong_duration_s, 10.0);
        assert!((s.offset_m - 0.06).abs() < 1e-15);
        assert!(e.setting(6, 0).is_err());
        assert!(e.setting(0, 7).is_err());
    }

    #[test]
    fn invalid_sim_rejected() {
        let mut c = ArbiterConfig::default();
        c.sim.timeout_s = 0.5;
        assert!(c.resolve().is_err());
    }
}
