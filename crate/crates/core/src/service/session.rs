use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};

use super::SCHEMA_VERSION;
use crate::arbitration::PolicyKind;
use crate::config::{Experiment, UncertaintySetting};
use crate::engine::{Episode, TrialRecord};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::metrics::OutcomeStatus;
use crate::rng::derive_seed;
use crate::scene::Scene;

/// Buffered step frames per event subscriber before it starts lagging.
const EVENT_BUFFER: usize = 256;

fn default_policy() -> PolicyKind {
    PolicyKind::BellShaped
}

/// Body of `POST /sessions`. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    /// Custom scene; the server's configured scene when absent.
    #[serde(default)]
    pub scene: Option<Scene>,
    #[serde(default = "default_policy")]
    pub policy: PolicyKind,
    #[serde(default)]
    pub intent_level: u8,
    #[serde(default)]
    pub autonomy_level: u8,
    /// Random when absent.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Derived from the seed when absent.
    #[serde(default)]
    pub target_id: Option<usize>,
    /// Hide the nominal target from replies.
    #[serde(default)]
    pub blind: bool,
}

impl Default for CreateSession {
    fn default() -> Self {
        CreateSession {
            scene: None,
            policy: default_policy(),
            intent_level: 0,
            autonomy_level: 0,
            seed: None,
            target_id: None,
            blind: false,
        }
    }
}

/// Body of `POST /sessions/{id}/step`: one human displacement in meters per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRequest {
    #[serde(alias = "human_input")]
    pub input: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub v: u32,
    pub id: String,
    pub policy: PolicyKind,
    pub setting: UncertaintySetting,
    pub seed: u64,
    pub target_id: usize,
    pub blind: bool,
    pub scene: Scene,
    pub range_d: f64,
    pub dt: f64,
    pub speed_a: f64,
    /// Inputs longer than this are scaled down to it.
    pub max_input: f64,
    pub success_radius: f64,
    /// Number of accepted steps.
    pub step: u32,
    pub pos: Vec3,
    pub status: OutcomeStatus,
    /// Arbitration at the current pose.
    pub alpha: f64,
    pub conf_in: f64,
    pub conf_au: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReply {
    pub v: u32,
    pub id: String,
    /// Index of the step this reply describes (0-based).
    pub step: u32,
    /// Pose after the step.
    pub pos: Vec3,
    /// Human input actually applied, after clamping.
    pub human: Vec3,
    pub clamped: bool,
    pub robot: Vec3,
    pub command: Vec3,
    /// Distance from the pre-step pose to the nominal target.
    pub distance: f64,
    pub alpha: f64,
    pub conf_in: f64,
    pub conf_au: f64,
    pub helpfulness: f64,
    pub friendliness: f64,
    pub mean_helpfulness: f64,
    pub mean_friendliness: f64,
    pub status: OutcomeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReply {
    pub v: u32,
    pub id: String,
    pub step: u32,
    pub dt: f64,
    pub record: TrialRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub policy: PolicyKind,
    pub intent_level: u8,
    pub autonomy_level: u8,
    pub step: u32,
    pub status: OutcomeStatus,
}

struct Session {
    id: String,
    exp: Arc<Experiment>,
    episode: Episode,
    blind: bool,
    events: broadcast::Sender<StepReply>,
}

impl Session {
    fn max_input(&self) -> f64 {
        2.0 * self.exp.sim.speed_a
    }

    fn descriptor(&self) -> SessionDescriptor {
        let meta = self.episode.meta();
        let state = self.episode.preview();
        let step = self.episode.steps().len() as u32;
        SessionDescriptor {
            v: SCHEMA_VERSION,
            id: self.id.clone(),
            policy: meta.policy,
            setting: meta.setting,
            seed: meta.seed,
            target_id: meta.target_id,
            blind: self.blind,
            scene: self.exp.scene.clone(),
            range_d: self.exp.scene.range_d,
            dt: self.exp.sim.dt,
            speed_a: self.exp.sim.speed_a,
            max_input: self.max_input(),
            success_radius: self.exp.sim.success_radius,
            step,
            pos: self.episode.pos(),
            status: self.episode.status(),
            alpha: state.alpha,
            conf_in: state.conf_in,
            conf_au: state.conf_au,
            nominal: (!self.blind).then(|| self.episode.nominal_at(step)),
        }
    }

    fn summary(&self) -> SessionSummary {
        let meta = self.episode.meta();
        SessionSummary {
            id: self.id.clone(),
            policy: meta.policy,
            intent_level: meta.setting.intent_level,
            autonomy_level: meta.setting.autonomy_level,
            step: self.episode.steps().len() as u32,
            status: self.episode.status(),
        }
    }

    fn step(&mut self, input: Vec3) -> Result<StepReply> {
        if self.episode.status().is_terminal() {
            return Err(Error::SessionTerminated(self.id.clone()));
        }
        if !input.is_finite() {
            return Err(Error::invalid("input", "must be finite"));
        }
        let max = self.max_input();
        let human = input.clamp_norm(max);
        let rec = *self.episode.step(human)?;
        let outcome = self.episode.outcome();
        let reply = StepReply {
            v: SCHEMA_VERSION,
            id: self.id.clone(),
            step: rec.t,
            pos: self.episode.pos(),
            human,
            clamped: input.norm() > max,
            robot: rec.y,
            command: rec.m,
            distance: rec.d,
            alpha: rec.alpha,
            conf_in: rec.conf_in,
            conf_au: rec.conf_au,
            helpfulness: rec.helpfulness,
            friendliness: rec.friendliness,
            mean_helpfulness: outcome.mean_h,
            mean_friendliness: outcome.mean_f,
            status: outcome.status,
            nominal: (!self.blind).then_some(rec.nominal),
        };
        // No subscribers is fine.
        let _ = self.events.send(reply.clone());
        Ok(reply)
    }
}

/// All live sessions. The map is only locked to look sessions up; each
/// session has its own FIFO lock so requests to it run in arrival order while
/// distinct sessions proceed concurrently.
pub struct SessionRegistry {
    exp: Arc<Experiment>,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Session>>>>,
}

impl SessionRegistry {
    pub fn new(exp: Experiment) -> Self {
        SessionRegistry { exp: Arc::new(exp), sessions: RwLock::new(BTreeMap::new()) }
    }

    pub fn experiment(&self) -> &Experiment {
        &self.exp
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        let map = self.sessions.read().expect("session map lock");
        map.get(id).cloned().ok_or_else(|| Error::SessionNotFound(id.to_string()))
    }

    pub fn create(&self, req: CreateSession) -> Result<SessionDescriptor> {
        let exp = match req.scene {
            Some(scene) => Arc::new(self.exp.with_scene(scene).map_err(|e| match e {
                Error::InvalidScene(msg) => Error::invalid("scene", msg),
                other => other,
            })?),
            None => Arc::clone(&self.exp),
        };
        let setting = exp.setting(req.intent_level, req.autonomy_level)?;
        let seed = req.seed.unwrap_or_else(rand::random);
        let target_id = match req.target_id {
            Some(t) if t >= exp.scene.len() => {
                return Err(Error::invalid("target_id", format!("must be below {}, got {t}", exp.scene.len())))
            }
            Some(t) => t,
            None => (derive_seed(seed, &[0x7461_7267]) % exp.scene.len() as u64) as usize,
        };
        let episode = Episode::new(&exp, target_id, req.policy, setting, seed)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session =
            Session { id: id.clone(), exp, episode, blind: req.blind, events: broadcast::channel(EVENT_BUFFER).0 };
        let descriptor = session.descriptor();
        self.sessions.write().expect("session map lock").insert(id.clone(), Arc::new(Mutex::new(session)));
        log::info!(
            "session {id} created: policy={} intent=L{} autonomy=L{} seed={seed} target={target_id}",
            req.policy,
            req.intent_level,
            req.autonomy_level
        );
        Ok(descriptor)
    }

    pub async fn describe(&self, id: &str) -> Result<SessionDescriptor> {
        Ok(self.get(id)?.lock().await.descriptor())
    }

    pub async fn step(&self, id: &str, req: StepRequest) -> Result<StepReply> {
        let session = self.get(id)?;
        let mut session = session.lock().await;
        let reply = session.step(req.input)?;
        if reply.status.is_terminal() {
            log::info!("session {id} ended: {} after {} steps", reply.status, reply.step + 1);
        }
        Ok(reply)
    }

    pub async fn trace(&self, id: &str) -> Result<TraceReply> {
        let session = self.get(id)?;
        let session = session.lock().await;
        Ok(TraceReply {
            v: SCHEMA_VERSION,
            id: id.to_string(),
            step: session.episode.steps().len() as u32,
            dt: session.exp.sim.dt,
            record: session.episode.clone().into_record(),
        })
    }

    /// Remove a session; returns whether it existed.
    pub fn delete(&self, id: &str) -> bool {
        let removed = self.sessions.write().expect("session map lock").remove(id).is_some();
        if removed {
            log::info!("session {id} deleted");
        }
        removed
    }

    pub async fn list(&self) -> Vec<SessionSummary> {
        let all: Vec<_> = self.sessions.read().expect("session map lock").values().cloned().collect();
        let mut out = Vec::with_capacity(all.len());
        for s in all {
            out.push(s.lock().await.summary());
        }
        out
    }

    /// Step frames of one session, from now on.
    pub async fn subscribe(&self, id: &str) -> Result<broadcast::Receiver<StepReply>> {
        Ok(self.get(id)?.lock().await.events.subscribe())
    }
}
