use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{drive, Episode, TrialDraws};
use crate::arbitration::PolicyKind;
use crate::config::{Experiment, UncertaintySetting};
use crate::error::{Error, Result};
use crate::metrics::OutcomeStatus;
use crate::rng::task_seed;

/// Identifies one (policy × uncertainty setting) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub policy: PolicyKind,
    pub intent_level: u8,
    pub autonomy_level: u8,
}

/// One simulated approach task, as written to `grid.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub policy: PolicyKind,
    pub intent_level: u8,
    pub autonomy_level: u8,
    pub set_id: u32,
    pub target_id: usize,
    pub seed: u64,
    pub status: OutcomeStatus,
    pub steps: u32,
    pub duration_s: f64,
    pub mean_helpfulness: f64,
    pub mean_friendliness: f64,
}

impl GridRow {
    pub fn key(&self) -> CellKey {
        CellKey { policy: self.policy, intent_level: self.intent_level, autonomy_level: self.autonomy_level }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CellResult {
    pub trials: usize,
    pub successes: usize,
    /// Completion times of successful trials only (s).
    pub completion_times: Vec<f64>,
    pub mean_h: Vec<f64>,
    pub mean_f: Vec<f64>,
}

impl CellResult {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    pub fn push(&mut self, row: &GridRow) {
        self.trials += 1;
        if row.status == OutcomeStatus::Success {
            self.successes += 1;
            self.completion_times.push(row.duration_s);
        }
        self.mean_h.push(row.mean_helpfulness);
        self.mean_f.push(row.mean_friendliness);
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridResult {
    pub sets: u32,
    pub rows: Vec<GridRow>,
    pub cells: BTreeMap<CellKey, CellResult>,
}

impl GridResult {
    pub fn from_rows(sets: u32, rows: Vec<GridRow>) -> Self {
        let mut cells: BTreeMap<CellKey, CellResult> = BTreeMap::new();
        for row in &rows {
            cells.entry(row.key()).or_default().push(row);
        }
        GridResult { sets, rows, cells }
    }

    pub fn cell(&self, policy: PolicyKind, intent_level: u8, autonomy_level: u8) -> Option<&CellResult> {
        self.cells.get(&CellKey { policy, intent_level, autonomy_level })
    }
}

struct Job {
    set_id: u32,
    target_id: usize,
    setting: UncertaintySetting,
    policy: PolicyKind,
}

/// Run `sets` simulation sets over every policy and setting.
///
/// Random draws depend only on (master seed, set, target), so every policy and
/// every uncertainty setting in a set sees the same operator, offset direction
/// and wrong bolt. Rows come back in a fixed job order regardless of how many
/// worker threads ran them.
pub fn run_grid(
    exp: &Experiment,
    sets: u32,
    policies: &[PolicyKind],
    settings: &[UncertaintySetting],
) -> Result<GridResult> {
    if sets == 0 {
        return Err(Error::invalid("sets", "must be at least 1"));
    }
    let targets = exp.scene.len();
    let mut jobs = Vec::with_capacity(sets as usize * targets * settings.len() * policies.len());
    for set_id in 0..sets {
        for target_id in 0..targets {
            for setting in settings {
                for &policy in policies {
                    jobs.push(Job { set_id, target_id, setting: *setting, policy });
                }
            }
        }
    }

    let rows = jobs
        .par_iter()
        .map(|job| -> Result<GridRow> {
            let seed = task_seed(exp.sim.seed, job.set_id, job.target_id);
            let draws = TrialDraws::draw(seed, &exp.scene, job.target_id, &exp.operator)?;
            let episode = Episode::from_draws(
                &exp.scene,
                &exp.sim,
                exp.arbitration,
                job.target_id,
                job.policy,
                job.setting,
                seed,
                draws,
            )?;
            let record = drive(episode, &exp.operator, exp.scene.range_d);
            Ok(GridRow {
                policy: job.policy,
                intent_level: job.setting.intent_level,
                autonomy_level: job.setting.autonomy_level,
                set_id: job.set_id,
                target_id: job.target_id,
                seed,
                status: record.outcome.status,
                steps: record.outcome.steps,
                duration_s: record.outcome.duration_s,
                mean_helpfulness: record.outcome.mean_h,
                mean_friendliness: record.outcome.mean_f,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GridResult::from_rows(sets, rows))
}
