//! Target inference from gaze and hand motion, and their Bayesian fusion.
//!
//! Each modality yields a normalized posterior over the scene's targets. Gaze
//! is scored with an isotropic Gaussian likelihood around each target after a
//! trailing mean filter; hand motion is scored by the extra path length the
//! observed trajectory implies for each target. Fusion multiplies the two
//! posteriors and renormalizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ensure_finite, Vec3};
use crate::scene::Scene;

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_LAMBDA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Eye,
    Hand,
    Fused,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: f64,
    pub point: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazeStream {
    samples: Vec<GazeSample>,
    window_len: usize,
}

impl GazeStream {
    pub fn new(samples: Vec<GazeSample>, window_len: usize) -> Result<Self> {
        if window_len == 0 {
            return Err(Error::invalid("window_len", "must be at least 1"));
        }
        for s in &samples {
            if !s.t.is_finite() {
                return Err(Error::NonFinite("gaze timestamp"));
            }
            ensure_finite(s.point)?;
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::invalid("samples", "timestamps must be strictly increasing"));
        }
        Ok(GazeStream { samples, window_len })
    }

    /// Points sampled at a fixed period with the default window.
    pub fn from_points(points: &[Vec3], dt: f64) -> Result<Self> {
        let samples = points.iter().enumerate().map(|(i, &p)| GazeSample { t: i as f64 * dt, point: p }).collect();
        Self::new(samples, DEFAULT_WINDOW)
    }

    pub fn samples(&self) -> &[GazeSample] {
        &self.samples
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Trailing moving average; early samples average over what is available.
    pub fn filtered(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.samples.len());
        let mut acc = Vec3::ZERO;
        for (i, s) in self.samples.iter().enumerate() {
            acc += s.point;
            if i >= self.window_len {
                acc = acc - self.samples[i - self.window_len].point;
            }
            let n = (i + 1).min(self.window_len) as f64;
            out.push(acc * (1.0 / n));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandTrajectory {
    points: Vec<Vec3>,
}

impl HandTrajectory {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoObservations);
        }
        for &p in &points {
            ensure_finite(p)?;
        }
        Ok(HandTrajectory { points })
    }

    pub fn start(&self) -> Vec3 {
        self.points[0]
    }

    pub fn current(&self) -> Vec3 {
        *self.points.last().expect("nonempty")
    }

    pub fn path_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentEstimate {
    pub scores: Vec<f64>,
    pub argmax: usize,
    pub modality: Modality,
}

impl IntentEstimate {
    /// Normalize log-scores into a posterior. Ties go to the lowest index.
    fn from_log_scores(log_scores: &[f64], modality: Modality) -> Result<Self> {
        let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::DegenerateDistribution);
        }
        let weights: Vec<f64> = log_scores.iter().map(|l| (l - max).exp()).collect();
        Self::from_weights(weights, modality)
    }

    /// Normalize nonnegative weights into a posterior.
    pub fn from_weights(weights: Vec<f64>, modality: Modality) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::DegenerateDistribution);
        }
        let scores: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(IntentEstimate { argmax: argmax(&scores), scores, modality })
    }

    pub fn uniform(n: usize, modality: Modality) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegenerateDistribution);
        }
        Self::from_weights(vec![1.0; n], modality)
    }
}

/// Index of the largest score; the first one wins ties.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Target posterior from gaze.
pub fn infer_eye(gaze: &GazeStream, scene: &Scene, sigma_gaze: f64) -> Result<IntentEstimate> {
    if gaze.samples.is_empty() {
        return Err(Error::NoObservations);
    }
    if !(sigma_gaze > 0.0 && sigma_gaze.is_finite()) {
        return Err(Error::invalid("sigma_gaze", "must be positive"));
    }
    let filtered = gaze.filtered();
    let inv_two_var = 1.0 / (2.0 * sigma_gaze * sigma_gaze);
    let log_scores: Vec<f64> = scene
        .targets
        .iter()
        .map(|t| -filtered.iter().map(|g| (*g - t.position).norm().powi(2)).sum::<f64>() * inv_two_var)
        .collect();
    IntentEstimate::from_log_scores(&log_scores, Modality::Eye)
}

/// Target posterior from the hand trajectory's extra path cost.
pub fn infer_hand(traj: &HandTrajectory, scene: &Scene, lambda: f64) -> Result<IntentEstimate> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    let (s, c) = (traj.start(), traj.current());
    let travelled = traj.path_length();
    let log_scores: Vec<f64> =
        scene.targets.iter().map(|t| -lambda * (travelled + c.distance(t.position) - s.distance(t.position))).collect();
    IntentEstimate::from_log_scores(&log_scores, Modality::Hand)
}

/// Product of two posteriors over the same targets.
pub fn fuse(eye: &IntentEstimate, hand: &IntentEstimate) -> Result<IntentEstimate> {
    if eye.scores.len() != hand.scores.len() {
        return Err(Error::TargetMismatch(eye.scores.len(), hand.scores.len()));
    }
    let weights = eye.scores.iter().zip(&hand.scores).map(|(a, b)| a * b).collect();
    IntentEstimate::from_weights(weights, Modality::Fused)
}

/// Standard deviation of the product of two isotropic Gaussians.
pub fn fused_variance(sigma_e: f64, sigma_h: f64) -> Result<f64> {
    if !(sigma_e >= 0.0 && sigma_h >= 0.0) || !sigma_e.is_finite() || !sigma_h.is_finite() {
        return Err(Error::invalid("sigma", "must be finite and >= 0"));
    }
    let (ve, vh) = (sigma_e * sigma_e, sigma_h * sigma_h);
    if ve + vh == 0.0 {
        return Err(Error::DegenerateFusion);
    }
    Ok((ve * vh / (ve + vh)).sqrt())
}
