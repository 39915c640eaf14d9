//! Workspace layout: candidate targets, the home pose and the shared-control range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotate_about_axis, Vec3};

/// Minimum separation between two targets.
const MIN_TARGET_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub label: String,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub home: Vec3,
    /// Shared-control range: beyond this distance the robot contributes nothing.
    pub range_d: f64,
}

/// Geometry of the default two-row bolt layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowLayout {
    pub in_row_spacing: f64,
    pub row_separation: f64,
    pub row_heights: [f64; 2],
    pub row_yaw_deg: f64,
    pub centroid_distance: f64,
    pub range_d: f64,
}

impl Default for RowLayout {
    fn default() -> Self {
        RowLayout {
            in_row_spacing: 0.08,
            row_separation: 0.12,
            row_heights: [0.0, 0.05],
            row_yaw_deg: 30.0,
            centroid_distance: 0.25,
            range_d: 0.40,
        }
    }
}

impl RowLayout {
    pub fn build(&self) -> Result<Scene> {
        let mean_height = 0.5 * (self.row_heights[0] + self.row_heights[1]);
        let horizontal = (self.centroid_distance.powi(2) - mean_height.powi(2)).sqrt();
        if !horizontal.is_finite() {
            return Err(Error::InvalidScene("centroid closer than row height".into()));
        }
        let centroid = Vec3::new(horizontal, 0.0, mean_height);
        let yaw = self.row_yaw_deg.to_radians();
        let along = rotate_about_axis(Vec3::X, Vec3::Z, yaw)?;
        let across = rotate_about_axis(Vec3::Y, Vec3::Z, yaw)?;

        let mut targets = Vec::with_capacity(6);
        for (row, &height) in self.row_heights.iter().enumerate() {
            let side = if row == 0 { -0.5 } else { 0.5 };
            let row_center = centroid + across * (side * self.row_separation);
            for k in -1..=1 {
                let mut p = row_center + along * (k as f64 * self.in_row_spacing);
                p.z = height;
                targets.push(Target { label: format!("bolt-{}{}", ['a', 'b'][row], k + 2), position: p });
            }
        }
        let scene = Scene { targets, home: Vec3::ZERO, range_d: self.range_d };
        scene.validate()?;
        Ok(scene)
    }
}

/// The six-bolt tabletop layout used by the simulation study.
pub fn default_scene() -> Scene {
    RowLayout::default().build().expect("default layout is valid")
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_d.is_finite() && self.range_d > 0.0) {
            return Err(Error::InvalidScene(format!("range_d must be positive, got {}", self.range_d)));
        }
        if !self.home.is_finite() {
            return Err(Error::InvalidScene("home is not finite".into()));
        }
        if self.targets.len() < 2 {
            return Err(Error::InvalidScene(format!("need at least 2 targets, got {}", self.targets.len())));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !t.position.is_finite() {
                return Err(Error::InvalidScene(format!("target {i} is not finite")));
            }
            let reach = t.position.distance(self.home);
            if reach > self.range_d {
                return Err(Error::InvalidScene(format!(
                    "target {i} is {reach:.4} m from home, outside range_d {}",
                    self.range_d
                )));
            }
            for (j, u) in self.targets.iter().enumerate().skip(i + 1) {
                if t.position.distance(u.position) <= MIN_TARGET_SEPARATION {
                    return Err(Error::InvalidScene(format!("targets {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn position(&self, id: usize) -> Result<Vec3> {
        self.targets
            .get(id)
            .map(|t| t.position)
            .ok_or_else(|| Error::invalid("target_id", format!("{id} not in scene of {}", self.len())))
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.targets.iter().enumerate() {
            for b in &self.targets[i + 1..] {
                best = best.min(a.position.distance(b.position));
            }
        }
        best
    }
}
