//! Helpfulness, friendliness and trial outcome classification.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::engine::TrialRecord;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub t: u32,
    pub helpfulness: f64,
    pub friendliness: f64,
}

/// α-weighted cosine between the robot input and the direction to the true target.
pub fn helpfulness(y: Vec3, v_ct: Vec3, alpha: f64) -> f64 {
    match y.cos_angle(v_ct) {
        Some(c) => alpha * c,
        None => 0.0,
    }
}

/// Cosine between the human input and the executed command.
///
/// Both zero counts as full agreement; exactly one zero as full disagreement.
pub fn friendliness(x: Vec3, m: Vec3) -> f64 {
    match (x.norm() > 0.0, m.norm() > 0.0) {
        (true, true) => x.cos_angle(m).unwrap_or(1.0),
        (false, false) => 1.0,
        _ => -1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Running,
    Success,
    StuckAtNominal,
    Timeout,
}

impl OutcomeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeStatus::Running => "running",
            OutcomeStatus::Success => "success",
            OutcomeStatus::StuckAtNominal => "stuck_at_nominal",
            OutcomeStatus::Timeout => "timeout",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != OutcomeStatus::Running
    }
}

impl fmt::Display for OutcomeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "running" => OutcomeStatus::Running,
            "success" => OutcomeStatus::Success,
            "stuck_at_nominal" => OutcomeStatus::StuckAtNominal,
            "timeout" => OutcomeStatus::Timeout,
            other => return Err(Error::Schema(format!("unknown status {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub status: OutcomeStatus,
    pub steps: u32,
    pub duration_s: f64,
    pub mean_h: f64,
    pub mean_f: f64,
}

/// Incremental outcome detection, fed one step at a time.
///
/// The stuck detector only considers windows that lie entirely after the
/// wrong-target period: while the robot is still assisting toward another
/// bolt a standstill is transient, not a failure.
#[derive(Debug, Clone)]
pub struct OutcomeTracker {
    success_radius: f64,
    window: usize,
    stuck_eps: f64,
    step_limit: u32,
    dt: f64,
    wrong_steps: u32,
    recent: VecDeque<f64>,
    steps: u32,
    sum_h: f64,
    sum_f: f64,
    status: OutcomeStatus,
}

impl OutcomeTracker {
    pub fn new(cfg: &SimConfig, wrong_steps: u32) -> Self {
        OutcomeTracker {
            success_radius: cfg.success_radius,
            window: cfg.stuck_window as usize,
            stuck_eps: cfg.stuck_eps(),
            step_limit: cfg.step_limit(),
            dt: cfg.dt,
            wrong_steps,
            recent: VecDeque::with_capacity(cfg.stuck_window as usize + 1),
            steps: 0,
            sum_h: 0.0,
            sum_f: 0.0,
            status: OutcomeStatus::Running,
        }
    }

    pub fn status(&self) -> OutcomeStatus {
        self.status
    }

    /// Record one executed step ending at `pos_after`.
    pub fn push(&mut self, m: Vec3, h: f64, f: f64, pos_after: Vec3, true_target: Vec3) -> OutcomeStatus {
        if self.status.is_terminal() {
            return self.status;
        }
        self.steps += 1;
        self.sum_h += h;
        self.sum_f += f;
        if self.window > 0 {
            self.recent.push_back(m.norm());
            if self.recent.len() > self.window {
                self.recent.pop_front();
            }
        }

        let reached = pos_after.distance(true_target) <= self.success_radius;
        self.status = if reached {
            OutcomeStatus::Success
        } else if self.is_stuck() {
            OutcomeStatus::StuckAtNominal
        } else if self.steps > self.step_limit {
            OutcomeStatus::Timeout
        } else {
            OutcomeStatus::Running
        };
        self.status
    }

    fn is_stuck(&self) -> bool {
        if self.window == 0 || self.recent.len() < self.window {
            return false;
        }
        let window_start = self.steps as usize - self.window;
        if window_start < self.wrong_steps as usize {
            return false;
        }
        let mean = self.recent.iter().sum::<f64>() / self.window as f64;
        mean < self.stuck_eps
    }

    pub fn outcome(&self) -> TrialOutcome {
        let n = self.steps.max(1) as f64;
        TrialOutcome {
            status: self.status,
            steps: self.steps,
            duration_s: self.steps as f64 * self.dt,
            mean_h: if self.steps == 0 { 0.0 } else { self.sum_h / n },
            mean_f: if self.steps == 0 { 0.0 } else { self.sum_f / n },
        }
    }
}

/// Classify a recorded trace from scratch.
pub fn classify(trace: &TrialRecord, cfg: &SimConfig) -> TrialOutcome {
    let mut tracker = OutcomeTracker::new(cfg, trace.meta.wrong_steps);
    for s in &trace.steps {
        let after = s.pos + s.m;
        if tracker.push(s.m, s.helpfulness, s.friendliness, after, trace.meta.true_target).is_terminal() {
            break;
        }
    }
    tracker.outcome()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpfulness_examples() {
        assert!((helpfulness(Vec3::X, Vec3::X * 3.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(helpfulness(Vec3::ZERO, Vec3::X, 1.0), 0.0);
        assert_eq!(helpfulness(Vec3::X, Vec3::ZERO, 1.0), 0.0);
        let y = Vec3::new(60f64.to_radians().cos(), 60f64.to_radians().sin(), 0.0);
        assert!((helpfulness(y, Vec3::X, 0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn friendliness_examples() {
        let x = Vec3::new(0.3, -0.1, 0.2);
        assert!((friendliness(x, x) - 1.0).abs() < 1e-15);
        assert!((friendliness(x, -x) + 1.0).abs() < 1e-15);
        assert_eq!(friendliness(Vec3::ZERO, Vec3::ZERO), 1.0);
        assert_eq!(friendliness(Vec3::ZERO, x), -1.0);
        assert_eq!(friendliness(x, Vec3::ZERO), -1.0);
    }

    fn cfg() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn tracker_success() {
        let c = cfg();
        let mut t = OutcomeTracker::new(&c, 0);
        let target = Vec3::new(0.0, 0.0, 0.005);
        assert_eq!(t.push(Vec3::X * 0.001, 0.0, 1.0, Vec3::ZERO, target), OutcomeStatus::Success);
        // terminal status is sticky
        assert_eq!(t.push(Vec3::X, 0.0, 1.0, Vec3::X, target), OutcomeStatus::Success);
        assert_eq!(t.outcome().steps, 1);
    }

    #[test]
    fn tracker_stuck_only_after_wrong_period() {
        let c = cfg();
        let target = Vec3::new(1.0, 0.0, 0.0);
        let window = c.stuck_window;
        let mut t = OutcomeTracker::new(&c, 30);
        for i in 1..=(30 + window) {
            let s = t.push(Vec3::ZERO, 0.0, -1.0, Vec3::ZERO, target);
            if i < 30 + window {
                assert_eq!(s, OutcomeStatus::Running, "step {i}");
            } else {
                assert_eq!(s, OutcomeStatus::StuckAtNominal);
            }
        }
    }

    #[test]
    fn tracker_timeout() {
        let mut c = cfg();
        c.speed_a = 0.0;
        c.stuck_speed_eps = Some(0.0);
        c.timeout_s = 1.0;
        let mut t = OutcomeTracker::new(&c, 0);
        let mut last = OutcomeStatus::Running;
        let mut n = 0;
        while !last.is_terminal() {
            last = t.push(Vec3::ZERO, 0.0, 1.0, Vec3::ZERO, Vec3::X);
            n += 1;
        }
        assert_eq!(last, OutcomeStatus::Timeout);
        assert_eq!(n, 21);
        assert!((t.outcome().duration_s - 21.0 * c.dt).abs() < 1e-12);
    }

    #[test]
    fn means_cover_all_steps() {
        let c = cfg();
        let mut t = OutcomeTracker::new(&c, 0);
        t.push(Vec3::X * 0.001, 0.2, 1.0, Vec3::ZERO, Vec3::X);
        t.push(Vec3::X * 0.001, 0.4, 0.0, Vec3::ZERO, Vec3::X);
        let o = t.outcome();
        assert!((o.mean_h - 0.3).abs() < 1e-15);
        assert!((o.mean_f - 0.5).abs() < 1e-15);
    }
}
