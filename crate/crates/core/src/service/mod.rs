//! HTTP session service: steps live shared-control episodes from external
//! human inputs.
//!
//! The service holds no model logic of its own; every step goes through
//! [`crate::engine::Episode`], so a session replays exactly like an engine run
//! with the same seed and inputs. All bodies are JSON with SI units and carry
//! a schema version field `v`.
//!
//! | Method | Path | Reply |
//! |---|---|---|
//! | `POST` | `/sessions` | [`SessionDescriptor`] (201) |
//! | `GET` | `/sessions` | list of [`SessionSummary`] |
//! | `GET` | `/sessions/{id}` | [`SessionDescriptor`] |
//! | `POST` | `/sessions/{id}/step` | [`StepReply`] |
//! | `GET` | `/sessions/{id}/trace` | [`TraceReply`], or CSV with `?format=csv` |
//! | `GET` | `/sessions/{id}/events` | server-sent `step` events carrying [`StepReply`] |
//! | `DELETE` | `/sessions/{id}` | `{"v", "id", "deleted"}`, always 200 |
//! | `GET` | `/scenes/default` | `{"v", "scene"}` |
//! | `GET` | `/healthz` | `ok` |
//!
//! Errors reply `{"v", "error": {"code", "message", "field"}}` with 400 for
//! malformed JSON, 422 for invalid fields, 404 for unknown sessions and 409
//! for steps on a terminated session.

mod http;
mod session;

pub use http::{router, serve};
pub use session::{
    CreateSession, SessionDescriptor, SessionRegistry, SessionSummary, StepReply, StepRequest, TraceReply,
};

/// Version of every reply schema.
pub const SCHEMA_VERSION: u32 = 1;
