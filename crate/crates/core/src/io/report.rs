use std::io::Read;

use serde::Serialize;

use super::{csv_writer, fmt_num};
use crate::arbitration::PolicyKind;
use crate::config::LEVELS;
use crate::engine::{CellResult, GridResult, GridRow};
use crate::error::{Error, Result};
use crate::stats::{mann_whitney, mean, summarize, BoxSummary, Thresholds, UTestResult};

pub const GRID_COLUMNS: [&str; 11] = [
    "policy",
    "intent_level",
    "autonomy_level",
    "set_id",
    "target_id",
    "seed",
    "status",
    "steps",
    "duration_s",
    "mean_helpfulness",
    "mean_friendliness",
];

const CELL_COLUMNS: [&str; 24] = [
    "policy",
    "intent_level",
    "autonomy_level",
    "trials",
    "successes",
    "success_rate",
    "time_min",
    "time_q1",
    "time_median",
    "time_q3",
    "time_max",
    "h_mean",
    "h_min",
    "h_q1",
    "h_median",
    "h_q3",
    "h_max",
    "f_mean",
    "f_min",
    "f_q1",
    "f_median",
    "f_q3",
    "f_max",
    "time_n",
];

const STAT_COLUMNS: [&str; 11] = [
    "policy",
    "baseline",
    "intent_level",
    "autonomy_level",
    "metric",
    "n_policy",
    "n_baseline",
    "u",
    "p",
    "method",
    "significance",
];

pub fn write_grid_csv(rows: &[GridRow]) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(GRID_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.policy.as_str().to_string(),
            r.intent_level.to_string(),
            r.autonomy_level.to_string(),
            r.set_id.to_string(),
            r.target_id.to_string(),
            r.seed.to_string(),
            r.status.as_str().to_string(),
            r.steps.to_string(),
            fmt_num(r.duration_s),
            fmt_num(r.mean_helpfulness),
            fmt_num(r.mean_friendliness),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<T> {
    let raw = rec.get(idx).unwrap_or_default();
    raw.parse()
        .map_err(|_| Error::Schema(format!("line {line}: column {} has invalid value {raw:?}", GRID_COLUMNS[idx])))
}

/// Parse `grid.csv`; the header must match [`GRID_COLUMNS`] exactly.
pub fn read_grid_csv<R: Read>(reader: R) -> Result<Vec<GridRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
    if header.iter().ne(GRID_COLUMNS.iter().copied()) {
        return Err(Error::Schema(format!(
            "expected columns {}, found {}",
            GRID_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let policy: PolicyKind = field(&rec, 0, line)?;
        let intent_level: u8 = field(&rec, 1, line)?;
        let autonomy_level: u8 = field(&rec, 2, line)?;
        if intent_level as usize >= LEVELS || autonomy_level as usize >= LEVELS {
            return Err(Error::Schema(format!("line {line}: level out of range")));
        }
        rows.push(GridRow {
            policy,
            intent_level,
            autonomy_level,
            set_id: field(&rec, 3, line)?,
            target_id: field(&rec, 4, line)?,
            seed: field(&rec, 5, line)?,
            status: field(&rec, 6, line)?,
            steps: field(&rec, 7, line)?,
            duration_s: field(&rec, 8, line)?,
            mean_helpfulness: field(&rec, 9, line)?,
            mean_friendliness: field(&rec, 10, line)?,
        });
    }
    Ok(rows)
}

/// Per-cell aggregates for box plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub policy: PolicyKind,
    pub intent_level: u8,
    pub autonomy_level: u8,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub time: Option<BoxSummary>,
    pub helpfulness: Option<(f64, BoxSummary)>,
    pub friendliness: Option<(f64, BoxSummary)>,
}

fn with_mean(samples: &[f64]) -> Option<(f64, BoxSummary)> {
    Some((mean(samples)?, summarize(samples).ok()?))
}

pub fn cell_rows(grid: &GridResult) -> Vec<CellRow> {
    grid.cells
        .iter()
        .map(|(key, cell)| CellRow {
            policy: key.policy,
            intent_level: key.intent_level,
            autonomy_level: key.autonomy_level,
            trials: cell.trials,
            successes: cell.successes,
            success_rate: cell.success_rate(),
            time: summarize(&cell.completion_times).ok(),
            helpfulness: with_mean(&cell.mean_h),
            friendliness: with_mean(&cell.mean_f),
        })
        .collect()
}

fn box_fields(b: Option<&BoxSummary>) -> [String; 5] {
    match b {
        Some(b) => [fmt_num(b.min), fmt_num(b.q1), fmt_num(b.median), fmt_num(b.q3), fmt_num(b.max)],
        None => Default::default(),
    }
}

pub fn write_cells_csv(rows: &[CellRow]) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(CELL_COLUMNS)?;
    for r in rows {
        let mut rec = vec![
            r.policy.as_str().to_string(),
            r.intent_level.to_string(),
            r.autonomy_level.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            fmt_num(r.success_rate),
        ];
        rec.extend(box_fields(r.time.as_ref()));
        for metric in [&r.helpfulness, &r.friendliness] {
            rec.push(metric.as_ref().map(|m| fmt_num(m.0)).unwrap_or_default());
            rec.extend(box_fields(metric.as_ref().map(|m| &m.1)));
        }
        rec.push(r.time.map(|t| t.n).unwrap_or(0).to_string());
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CompletionTime,
    Helpfulness,
    Friendliness,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::CompletionTime, Metric::Helpfulness, Metric::Friendliness];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::CompletionTime => "completion_time",
            Metric::Helpfulness => "helpfulness",
            Metric::Friendliness => "friendliness",
        }
    }

    fn samples(self, cell: &CellResult) -> &[f64] {
        match self {
            Metric::CompletionTime => &cell.completion_times,
            Metric::Helpfulness => &cell.mean_h,
            Metric::Friendliness => &cell.mean_f,
        }
    }
}

/// One pairwise U test of a baseline policy against the bell-shaped policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub policy: PolicyKind,
    pub intent_level: u8,
    pub autonomy_level: u8,
    pub metric: Metric,
    pub n_policy: usize,
    pub n_baseline: usize,
    /// `None` when either group is empty.
    pub test: Option<UTestResult>,
}

/// U tests of the positive and negative policies against the bell-shaped
/// policy, for every cell present in `grid` and every metric.
pub fn stat_rows(grid: &GridResult, thresholds: Thresholds) -> Result<Vec<StatRow>> {
    thresholds.validate()?;
    let empty = CellResult::default();
    let mut out = Vec::new();
    for i in 0..LEVELS as u8 {
        for a in 0..LEVELS as u8 {
            let Some(bell) = grid.cell(PolicyKind::BellShaped, i, a) else { continue };
            for policy in [PolicyKind::Positive, PolicyKind::Negative] {
                let cell = grid.cell(policy, i, a).unwrap_or(&empty);
                for metric in Metric::ALL {
                    let (x, y) = (metric.samples(cell), metric.samples(bell));
                    let test = if x.is_empty() || y.is_empty() { None } else { Some(mann_whitney(x, y, thresholds)?) };
                    out.push(StatRow {
                        policy,
                        intent_level: i,
                        autonomy_level: a,
                        metric,
                        n_policy: x.len(),
                        n_baseline: y.len(),
                        test,
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn write_stats_csv(rows: &[StatRow]) -> Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(STAT_COLUMNS)?;
    for r in rows {
        let (u, p, method, sig) = match &r.test {
            Some(t) => (
                fmt_num(t.u),
                fmt_num(t.p),
                match t.method {
                    crate::stats::Method::Exact => "exact",
                    crate::stats::Method::NormalApprox => "normal_approx",
                }
                .to_string(),
                t.significance.as_str().to_string(),
            ),
            None => (String::new(), String::new(), String::new(), "insufficient-n".to_string()),
        };
        w.write_record([
            r.policy.as_str().to_string(),
            PolicyKind::BellShaped.as_str().to_string(),
            r.intent_level.to_string(),
            r.autonomy_level.to_string(),
            r.metric.as_str().to_string(),
            r.n_policy.to_string(),
            r.n_baseline.to_string(),
            u,
            p,
            method,
            sig,
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}
