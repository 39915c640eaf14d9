//! C ABI over `arbiter-core`.
//!
//! Every fallible function returns an [`ArbiterStatus`] and writes its result
//! through an out pointer. On failure a message is kept per thread and can be
//! read with [`arbiter_last_error`]. Sessions are opaque handles created by
//! [`arbiter_session_new`] and released with [`arbiter_session_free`].
//! Panics never cross the boundary; they surface as `ARBITER_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use arbiter_core::arbitration::{self, ArbitrationParams, BaselineShape, PolicyKind};
use arbiter_core::config::{ArbiterConfig, Experiment};
use arbiter_core::engine::Episode;
use arbiter_core::geometry::Vec3;
use arbiter_core::metrics::OutcomeStatus;
use arbiter_core::stats::{self, Method, Significance, Thresholds};
use arbiter_core::uncertainty::{self, ConfidenceParams};
use arbiter_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArbiterStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The session has already reached a terminal outcome.
    Terminated = 3,
    EmptySample = 4,
    Config = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArbiterPolicy {
    Positive = 0,
    Negative = 1,
    Bell = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArbiterOutcome {
    Running = 0,
    Success = 1,
    StuckAtNominal = 2,
    Timeout = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArbiterVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Confidence-model parameters: range `D` (m), intent floor `a_min` and
/// autonomy level `gamma`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbiterConfidence {
    pub range_d: f64,
    pub a_min: f64,
    pub gamma: f64,
}

/// One executed session step.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArbiterStep {
    pub step: u32,
    /// Pose after the step.
    pub pos: ArbiterVec3,
    pub command: ArbiterVec3,
    pub robot: ArbiterVec3,
    pub alpha: f64,
    pub conf_in: f64,
    pub conf_au: f64,
    pub helpfulness: f64,
    pub friendliness: f64,
    /// An [`ArbiterOutcome`] value.
    pub outcome: i32,
}

/// Mann-Whitney U test result. `significance`: 0 none, 1 moderate, 2 high.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArbiterUTest {
    pub u: f64,
    pub p: f64,
    /// 1 when the exact permutation distribution was used.
    pub exact: i32,
    pub significance: i32,
}

/// Opaque live episode.
pub struct ArbiterSession {
    exp: Experiment,
    episode: Episode,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: ArbiterStatus, msg: impl Into<String>) -> ArbiterStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> ArbiterStatus {
    let status = match &e {
        Error::EmptySample => ArbiterStatus::EmptySample,
        Error::SessionTerminated(_) => ArbiterStatus::Terminated,
        Error::Config(_) => ArbiterStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => ArbiterStatus::Internal,
        _ => ArbiterStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Run `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> ArbiterStatus) -> ArbiterStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(ArbiterStatus::Internal, "internal panic"))
}

fn write<T>(out: *mut T, value: T) -> ArbiterStatus {
    if out.is_null() {
        return fail(ArbiterStatus::NullPointer, "output pointer is null");
    }
    // SAFETY: non-null; the caller guarantees it points to writable storage for T.
    unsafe { out.write(value) };
    ArbiterStatus::Ok
}

impl From<ArbiterVec3> for Vec3 {
    fn from(v: ArbiterVec3) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl From<Vec3> for ArbiterVec3 {
    fn from(v: Vec3) -> Self {
        ArbiterVec3 { x: v.x, y: v.y, z: v.z }
    }
}

impl From<ArbiterPolicy> for PolicyKind {
    fn from(p: ArbiterPolicy) -> Self {
        match p {
            ArbiterPolicy::Positive => PolicyKind::Positive,
            ArbiterPolicy::Negative => PolicyKind::Negative,
            ArbiterPolicy::Bell => PolicyKind::BellShaped,
        }
    }
}

fn policy_from_int(p: i32) -> Result<PolicyKind, ArbiterStatus> {
    match p {
        0 => Ok(ArbiterPolicy::Positive.into()),
        1 => Ok(ArbiterPolicy::Negative.into()),
        2 => Ok(ArbiterPolicy::Bell.into()),
        other => Err(fail(ArbiterStatus::InvalidArgument, format!("unknown policy {other}"))),
    }
}

fn outcome_code(s: OutcomeStatus) -> i32 {
    (match s {
        OutcomeStatus::Running => ArbiterOutcome::Running,
        OutcomeStatus::Success => ArbiterOutcome::Success,
        OutcomeStatus::StuckAtNominal => ArbiterOutcome::StuckAtNominal,
        OutcomeStatus::Timeout => ArbiterOutcome::Timeout,
    }) as i32
}

fn confidence(c: ArbiterConfidence) -> Result<ConfidenceParams, ArbiterStatus> {
    ConfidenceParams::new(c.range_d, c.a_min, c.gamma).map_err(from_error)
}

fn finite(v: f64, what: &str) -> Result<f64, ArbiterStatus> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(fail(ArbiterStatus::InvalidArgument, format!("{what} must be finite")))
    }
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn arbiter_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn arbiter_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Intent confidence at distance `d` with intent spread `sigma_n`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn arbiter_conf_in(
    d: f64,
    sigma_n: f64,
    params: ArbiterConfidence,
    out: *mut f64,
) -> ArbiterStatus {
    guard(|| {
        let p = tri!(confidence(params));
        tri!(finite(d, "d"));
        tri!(finite(sigma_n, "sigma_n"));
        write(out, uncertainty::conf_in(d, sigma_n, &p))
    })
}

/// Autonomy confidence at distance `d` with autonomy spread `sigma_a`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn arbiter_conf_au(
    d: f64,
    sigma_a: f64,
    params: ArbiterConfidence,
    out: *mut f64,
) -> ArbiterStatus {
    guard(|| {
        let p = tri!(confidence(params));
        tri!(finite(d, "d"));
        tri!(finite(sigma_a, "sigma_a"));
        write(out, uncertainty::conf_au(d, sigma_a, &p))
    })
}

/// Robot authority of `policy` (an [`ArbiterPolicy`] value) at distance `d`,
/// with the default baseline ramps.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn arbiter_alpha(
    policy: i32,
    d: f64,
    sigma_n: f64,
    sigma_a: f64,
    params: ArbiterConfidence,
    out: *mut f64,
) -> ArbiterStatus {
    guard(|| {
        let policy = tri!(policy_from_int(policy));
        let confidence = tri!(confidence(params));
        for (v, what) in [(d, "d"), (sigma_n, "sigma_n"), (sigma_a, "sigma_a")] {
            tri!(finite(v, what));
        }
        let p = ArbitrationParams { confidence, baseline: BaselineShape::default() };
        write(out, arbitration::alpha(policy, d, sigma_n, sigma_a, &p).alpha)
    })
}

/// Probability that an isotropic 3-D Gaussian endpoint with spread `sigma_a`
/// lands within `r` of its mean.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn arbiter_encounter_prob(r: f64, sigma_a: f64, out: *mut f64) -> ArbiterStatus {
    guard(|| write(out, tri!(uncertainty::encounter_prob(r, sigma_a).map_err(from_error))))
}

/// Blended command `(1 - alpha)·x + alpha·y`.
///
/// # Safety
/// `out` must be null or point to a writable `ArbiterVec3`.
#[no_mangle]
pub unsafe extern "C" fn arbiter_blend(
    x: ArbiterVec3,
    y: ArbiterVec3,
    alpha: f64,
    out: *mut ArbiterVec3,
) -> ArbiterStatus {
    guard(|| write(out, tri!(arbitration::blend(x.into(), y.into(), alpha).map_err(from_error)).into()))
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` readable doubles (they may be null
/// only when the length is 0); `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn arbiter_mann_whitney(
    a: *const f64,
    na: usize,
    b: *const f64,
    nb: usize,
    high: f64,
    moderate: f64,
    out: *mut ArbiterUTest,
) -> ArbiterStatus {
    guard(|| {
        let view = |p: *const f64, n: usize| -> Result<&[f64], ArbiterStatus> {
            match (p.is_null(), n) {
                (_, 0) => Ok(&[]),
                (true, _) => Err(fail(ArbiterStatus::NullPointer, "sample pointer is null")),
                // SAFETY: the caller guarantees `n` readable doubles at `p`.
                (false, n) => Ok(unsafe { slice::from_raw_parts(p, n) }),
            }
        };
        let (a, b) = (tri!(view(a, na)), tri!(view(b, nb)));
        let r = tri!(stats::mann_whitney(a, b, Thresholds { high, moderate }).map_err(from_error));
        write(
            out,
            ArbiterUTest {
                u: r.u,
                p: r.p,
                exact: (r.method == Method::Exact) as i32,
                significance: match r.significance {
                    Significance::NotSignificant => 0,
                    Significance::Moderate => 1,
                    Significance::High => 2,
                },
            },
        )
    })
}

/// Start a live episode at the scene's home pose.
///
/// `config_toml` is configuration text, or NULL for the defaults. `policy` is
/// an [`ArbiterPolicy`] value; levels run 0..=5.
///
/// # Safety
/// `config_toml` must be null or a NUL-terminated string; `out` must be null
/// or point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn arbiter_session_new(
    config_toml: *const c_char,
    policy: i32,
    intent_level: u8,
    autonomy_level: u8,
    target_id: usize,
    seed: u64,
    out: *mut *mut ArbiterSession,
) -> ArbiterStatus {
    guard(|| {
        if out.is_null() {
            return fail(ArbiterStatus::NullPointer, "output pointer is null");
        }
        let policy = tri!(policy_from_int(policy));
        let cfg = if config_toml.is_null() {
            ArbiterConfig::default()
        } else {
            // SAFETY: the caller guarantees a NUL-terminated string.
            let text = unsafe { CStr::from_ptr(config_toml) };
            let text = tri!(text.to_str().map_err(|_| fail(ArbiterStatus::Config, "config is not UTF-8")));
            tri!(ArbiterConfig::from_toml_str(text).map_err(from_error))
        };
        let exp = tri!(cfg.resolve().map_err(from_error));
        let setting = tri!(exp.setting(intent_level, autonomy_level).map_err(from_error));
        let episode = tri!(Episode::new(&exp, target_id, policy, setting, seed).map_err(from_error));
        write(out, Box::into_raw(Box::new(ArbiterSession { exp, episode })))
    })
}

/// Apply one human input (clamped to twice the operator speed) and advance.
///
/// # Safety
/// `session` must come from [`arbiter_session_new`] and not be freed; `out`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn arbiter_session_step(
    session: *mut ArbiterSession,
    input: ArbiterVec3,
    out: *mut ArbiterStep,
) -> ArbiterStatus {
    guard(|| {
        // SAFETY: the caller guarantees a live handle with no other references.
        let Some(s) = (unsafe { session.as_mut() }) else {
            return fail(ArbiterStatus::NullPointer, "session is null");
        };
        let x = Vec3::from(input).clamp_norm(2.0 * s.exp.sim.speed_a);
        let rec = *tri!(s.episode.step(x).map_err(from_error));
        write(
            out,
            ArbiterStep {
                step: rec.t,
                pos: s.episode.pos().into(),
                command: rec.m.into(),
                robot: rec.y.into(),
                alpha: rec.alpha,
                conf_in: rec.conf_in,
                conf_au: rec.conf_au,
                helpfulness: rec.helpfulness,
                friendliness: rec.friendliness,
                outcome: outcome_code(s.episode.status()),
            },
        )
    })
}

/// Number of accepted steps, or 0 for a null handle.
///
/// # Safety
/// `session` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn arbiter_session_steps(session: *const ArbiterSession) -> u32 {
    // SAFETY: the caller guarantees a live handle or null.
    unsafe { session.as_ref() }.map_or(0, |s| s.episode.steps().len() as u32)
}

/// Release a session. Null is ignored.
///
/// # Safety
/// `session` must be null or a handle from [`arbiter_session_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn arbiter_session_free(session: *mut ArbiterSession) {
    if !session.is_null() {
        // SAFETY: ownership returns from the caller exactly once.
        drop(unsafe { Box::from_raw(session) });
    }
}
