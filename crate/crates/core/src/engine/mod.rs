//! Trial loop, full-grid Monte-Carlo runner and the planar demo.
//!
//! An [`Episode`] is the single place where one control step is computed:
//! the robot input toward the current nominal target, the policy weight, the
//! blended command, the metrics and the outcome check. Simulated trials drive
//! it with the synthetic operator; live sessions drive it with external input.

mod demo;
mod grid;

pub use demo::{run_demo2d, DemoConfig, DemoResult, DirectionSample};
pub use grid::{run_grid, CellKey, CellResult, GridResult, GridRow};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arbitration::{alpha, blend, ArbitrationParams, PolicyKind};
use crate::config::{Experiment, SimConfig, UncertaintySetting};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::metrics::{friendliness, helpfulness, OutcomeStatus, OutcomeTracker, TrialOutcome};
use crate::operator::{draw_theta, human_input, robot_input, OperatorParams, OperatorState, SwirlPlane};
use crate::rng::stream;
use crate::scene::Scene;

/// Random draws for one approach task, shared by every policy and setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialDraws {
    pub operator: OperatorState,
    /// Unit direction of the autonomy offset.
    pub offset_dir: Vec3,
    /// Bolt the robot assists toward during the wrong-target period.
    pub wrong_target: usize,
}

impl TrialDraws {
    pub fn draw(seed: u64, scene: &Scene, target_id: usize, op: &OperatorParams) -> Result<Self> {
        Self::draw_with(seed, scene.home, scene, target_id, op, SwirlPlane::Free, None)
    }

    pub(crate) fn draw_with(
        seed: u64,
        start: Vec3,
        scene: &Scene,
        target_id: usize,
        op: &OperatorParams,
        plane: SwirlPlane,
        offset_plane_normal: Option<Vec3>,
    ) -> Result<Self> {
        let true_target = scene.position(target_id)?;
        let mut rng = stream(seed);
        let operator = draw_theta(&mut rng, op, start, true_target, plane)?;
        let offset_dir = loop {
            let mut v = Vec3::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            if let Some(n) = offset_plane_normal {
                v = v - n * v.dot(n);
            }
            if v.norm() > 1e-12 {
                break v.unit()?;
            }
        };
        let others = scene.len() - 1;
        let pick = if others > 0 { rng.random_range(0..others) } else { 0 };
        let wrong_target = if pick >= target_id { pick + 1 } else { pick };
        Ok(TrialDraws { operator, offset_dir, wrong_target })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub policy: PolicyKind,
    pub setting: UncertaintySetting,
    pub seed: u64,
    pub target_id: usize,
    pub true_target: Vec3,
    pub start: Vec3,
    pub theta_big: f64,
    pub draws: TrialDraws,
    /// Steps during which the robot assists toward the wrong bolt.
    pub wrong_steps: u32,
    pub nominal_wrong: Vec3,
    pub nominal_true: Vec3,
}

/// One executed control step. `pos` is the position before the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u32,
    pub pos: Vec3,
    pub x: Vec3,
    pub y: Vec3,
    pub m: Vec3,
    pub d: f64,
    pub alpha: f64,
    pub conf_in: f64,
    pub conf_au: f64,
    pub nominal: Vec3,
    pub helpfulness: f64,
    pub friendliness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub meta: TrialMeta,
    pub steps: Vec<StepRecord>,
    pub outcome: TrialOutcome,
}

impl TrialRecord {
    pub fn final_pos(&self) -> Vec3 {
        self.steps.last().map(|s| s.pos + s.m).unwrap_or(self.meta.start)
    }
}

/// A steppable shared-control episode.
#[derive(Debug, Clone)]
pub struct Episode {
    meta: TrialMeta,
    arbitration: ArbitrationParams,
    speed_a: f64,
    pos: Vec3,
    tracker: OutcomeTracker,
    steps: Vec<StepRecord>,
}

impl Episode {
    pub fn new(
        exp: &Experiment,
        target_id: usize,
        policy: PolicyKind,
        setting: UncertaintySetting,
        seed: u64,
    ) -> Result<Self> {
        let draws = TrialDraws::draw(seed, &exp.scene, target_id, &exp.operator)?;
        Self::from_draws(&exp.scene, &exp.sim, exp.arbitration, target_id, policy, setting, seed, draws)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_draws(
        scene: &Scene,
        sim: &SimConfig,
        arbitration: ArbitrationParams,
        target_id: usize,
        policy: PolicyKind,
        setting: UncertaintySetting,
        seed: u64,
        draws: TrialDraws,
    ) -> Result<Self> {
        let true_target = scene.position(target_id)?;
        let offset = draws.offset_dir * setting.offset_m;
        let wrong_steps = (setting.wrong_duration_s / sim.dt).round() as u32;
        let nominal_wrong = scene.position(draws.wrong_target)? + offset;
        let meta = TrialMeta {
            policy,
            setting,
            seed,
            target_id,
            true_target,
            start: scene.home,
            theta_big: draws.operator.theta_big,
            draws,
            wrong_steps,
            nominal_wrong,
            nominal_true: true_target + offset,
        };
        Ok(Episode {
            tracker: OutcomeTracker::new(sim, wrong_steps),
            meta,
            arbitration,
            speed_a: sim.speed_a,
            pos: scene.home,
            steps: Vec::new(),
        })
    }

    pub fn meta(&self) -> &TrialMeta {
        &self.meta
    }

    pub fn pos(&self) -> Vec3 {
        self.pos
    }

    pub fn status(&self) -> OutcomeStatus {
        self.tracker.status()
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn outcome(&self) -> TrialOutcome {
        self.tracker.outcome()
    }

    /// Nominal target the robot assists toward at step `t`.
    pub fn nominal_at(&self, t: u32) -> Vec3 {
        if t < self.meta.wrong_steps {
            self.meta.nominal_wrong
        } else {
            self.meta.nominal_true
        }
    }

    /// Arbitration state at the current position, before any input is applied.
    pub fn preview(&self) -> crate::arbitration::ArbitrationState {
        let t = self.steps.len() as u32;
        let d = self.nominal_at(t).distance(self.pos);
        alpha(self.meta.policy, d, self.meta.setting.sigma_n, self.meta.setting.sigma_a, &self.arbitration)
    }

    /// Apply one human input and advance the end effector.
    pub fn step(&mut self, x: Vec3) -> Result<&StepRecord> {
        if self.status().is_terminal() {
            return Err(Error::SessionTerminated(format!("episode ended with {}", self.status())));
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("human input"));
        }
        let t = self.steps.len() as u32;
        let nominal = self.nominal_at(t);
        let d = nominal.distance(self.pos);
        let y = robot_input(self.pos, nominal, self.speed_a);
        let state = alpha(self.meta.policy, d, self.meta.setting.sigma_n, self.meta.setting.sigma_a, &self.arbitration);
        let m = blend(x, y, state.alpha)?;
        let h = helpfulness(y, self.meta.true_target - self.pos, state.alpha);
        let f = friendliness(x, m);
        let record = StepRecord {
            t,
            pos: self.pos,
            x,
            y,
            m,
            d,
            alpha: state.alpha,
            conf_in: state.conf_in,
            conf_au: state.conf_au,
            nominal,
            helpfulness: h,
            friendliness: f,
        };
        self.pos += m;
        self.tracker.push(m, h, f, self.pos, self.meta.true_target);
        self.steps.push(record);
        Ok(self.steps.last().expect("just pushed"))
    }

    pub fn into_record(self) -> TrialRecord {
        let outcome = self.tracker.outcome();
        TrialRecord { meta: self.meta, steps: self.steps, outcome }
    }
}

/// Drive an episode with the synthetic operator until it terminates.
pub fn drive(mut episode: Episode, op: &OperatorParams, range_d: f64) -> TrialRecord {
    let state = episode.meta.draws.operator;
    while !episode.status().is_terminal() {
        let x = human_input(episode.pos, &state, op, range_d);
        episode.step(x).expect("episode is live and input finite");
    }
    episode.into_record()
}

/// Simulate one approach task with the synthetic operator.
pub fn run_trial(
    exp: &Experiment,
    target_id: usize,
    policy: PolicyKind,
    setting: UncertaintySetting,
    seed: u64,
) -> Result<TrialRecord> {
    let episode = Episode::new(exp, target_id, policy, setting, seed)?;
    Ok(drive(episode, &exp.operator, exp.scene.range_d))
}

/// Step an episode with a fixed input sequence, stopping early if it terminates.
pub fn run_scripted(
    exp: &Experiment,
    target_id: usize,
    policy: PolicyKind,
    setting: UncertaintySetting,
    seed: u64,
    inputs: &[Vec3],
) -> Result<TrialRecord> {
    let mut episode = Episode::new(exp, target_id, policy, setting, seed)?;
    for &x in inputs {
        if episode.status().is_terminal() {
            break;
        }
        episode.step(x)?;
    }
    Ok(episode.into_record())
}
