use serde::Serialize;

use super::{csv_writer, fmt_num};
use crate::arbitration::PolicyKind;
use crate::config::UncertaintySetting;
use crate::engine::{DemoResult, DirectionSample, TrialRecord};
use crate::error::{Error, Result};
use crate::metrics::OutcomeStatus;

/// Row `k` holds the pose before step `k` and the step taken from it; the
/// last row holds the final pose, its distance and nominal target, with
/// empty step fields.
pub const TRACE_COLUMNS: [&str; 23] = [
    "step",
    "time_s",
    "x",
    "y",
    "z",
    "distance",
    "alpha",
    "conf_in",
    "conf_au",
    "human_x",
    "human_y",
    "human_z",
    "robot_x",
    "robot_y",
    "robot_z",
    "command_x",
    "command_y",
    "command_z",
    "helpfulness",
    "friendliness",
    "nominal_x",
    "nominal_y",
    "nominal_z",
];

pub fn write_trace_csv(record: &TrialRecord, dt: f64) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    let steps = record.steps.len();
    for k in 0..=steps {
        let pos = record.steps.get(k).map(|s| s.pos).unwrap_or_else(|| record.final_pos());
        let mut rec = vec![k.to_string(), fmt_num(k as f64 * dt), fmt_num(pos.x), fmt_num(pos.y), fmt_num(pos.z)];
        match record.steps.get(k) {
            Some(s) => {
                rec.extend([fmt_num(s.d), fmt_num(s.alpha), fmt_num(s.conf_in), fmt_num(s.conf_au)]);
                for v in [s.x, s.y, s.m] {
                    rec.extend([fmt_num(v.x), fmt_num(v.y), fmt_num(v.z)]);
                }
                rec.extend([fmt_num(s.helpfulness), fmt_num(s.friendliness)]);
                rec.extend([fmt_num(s.nominal.x), fmt_num(s.nominal.y), fmt_num(s.nominal.z)]);
            }
            None => {
                let meta = &record.meta;
                let nominal = if (k as u32) < meta.wrong_steps { meta.nominal_wrong } else { meta.nominal_true };
                rec.push(fmt_num(pos.distance(nominal)));
                rec.resize(TRACE_COLUMNS.len() - 3, String::new());
                rec.extend([fmt_num(nominal.x), fmt_num(nominal.y), fmt_num(nominal.z)]);
            }
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Trace CSV as text.
pub fn trace_csv(record: &TrialRecord, dt: f64) -> Result<String> {
    Ok(String::from_utf8(write_trace_csv(record, dt)?).expect("CSV output is UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub status: OutcomeStatus,
    pub steps: u32,
    pub duration_s: f64,
    pub mean_helpfulness: f64,
    pub mean_friendliness: f64,
}

/// Outcome table and direction samples of a planar demo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSummary {
    pub setting: UncertaintySetting,
    pub policies: Vec<PolicySummary>,
    pub samples: Vec<DirectionSample>,
}

pub fn demo_summary(demo: &DemoResult) -> DemoSummary {
    DemoSummary {
        setting: demo.setting,
        policies: demo
            .traces
            .iter()
            .map(|t| PolicySummary {
                policy: t.meta.policy,
                status: t.outcome.status,
                steps: t.outcome.steps,
                duration_s: t.outcome.duration_s,
                mean_helpfulness: t.outcome.mean_h,
                mean_friendliness: t.outcome.mean_f,
            })
            .collect(),
        samples: demo.samples.clone(),
    }
}
