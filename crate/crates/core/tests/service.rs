//! HTTP session API behaviour, exercised in-process through the router.

use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use arbiter_core::config::Experiment;
use arbiter_core::geometry::Vec3;
use arbiter_core::service::{router, SessionRegistry, StepReply, TraceReply};

fn app() -> Router {
    router(Arc::new(SessionRegistry::new(Experiment::default())))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (st, bytes) = call(app, method, uri, body).await;
    (st, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn create(app: &Router, body: Value) -> Value {
    let (st, v) = json_call(app, "POST", "/sessions", Some(body)).await;
    assert_eq!(st, StatusCode::CREATED, "{v}");
    v
}

async fn step(app: &Router, id: &str, input: [f64; 3]) -> (StatusCode, Value) {
    json_call(app, "POST", &format!("/sessions/{id}/step"), Some(json!({ "input": input }))).await
}

async fn trace(app: &Router, id: &str) -> TraceReply {
    let (st, bytes) = call(app, "GET", &format!("/sessions/{id}/trace"), None).await;
    assert_eq!(st, StatusCode::OK);
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::test]
async fn healthz_and_default_scene() {
    let app = app();
    let (st, body) = call(&app, "GET", "/healthz", None).await;
    assert_eq!((st, body.as_slice()), (StatusCode::OK, b"ok".as_slice()));
    let (st, v) = json_call(&app, "GET", "/scenes/default", None).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["v"], 1);
    assert_eq!(v["scene"]["targets"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn defaults_give_six_targets_and_bell_policy() {
    let app = app();
    let (st, v) = json_call(&app, "POST", "/sessions", None).await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["policy"], "bell");
    assert_eq!(v["scene"]["targets"].as_array().unwrap().len(), 6);
    assert_eq!(v["step"], 0);
    assert_eq!(v["status"], "running");
    assert_eq!(v["v"], 1);
    assert!(v["range_d"].as_f64().unwrap() > 0.0);
}

#[tokio::test]
async fn same_seed_gives_same_draws() {
    let app = app();
    let a = create(&app, json!({ "seed": 77, "autonomy_level": 3, "intent_level": 2 })).await;
    let b = create(&app, json!({ "seed": 77, "autonomy_level": 3, "intent_level": 2 })).await;
    assert_eq!(a["target_id"], b["target_id"]);
    assert_eq!(a["nominal"], b["nominal"]);
    let (ta, tb) = (trace(&app, a["id"].as_str().unwrap()).await, trace(&app, b["id"].as_str().unwrap()).await);
    assert_eq!(ta.record.meta.draws, tb.record.meta.draws);
}

#[tokio::test]
async fn validation_errors_name_the_field() {
    let app = app();
    for (body, field, code) in [
        (json!({ "autonomy_level": 7 }), "autonomy_level", StatusCode::UNPROCESSABLE_ENTITY),
        (json!({ "intent_level": 6 }), "intent_level", StatusCode::UNPROCESSABLE_ENTITY),
        (json!({ "policy": "sideways" }), "policy", StatusCode::UNPROCESSABLE_ENTITY),
        (json!({ "target_id": 99 }), "target_id", StatusCode::UNPROCESSABLE_ENTITY),
        (json!({ "seed": "abc" }), "seed", StatusCode::UNPROCESSABLE_ENTITY),
    ] {
        let (st, v) = json_call(&app, "POST", "/sessions", Some(body.clone())).await;
        assert_eq!(st, code, "{body}");
        assert_eq!(v["error"]["field"], field, "{body}: {v}");
    }
    let (st, v) = json_call(&app, "POST", "/sessions", Some(json!({ "colour": 1 }))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"]["message"].as_str().unwrap().contains("colour"));

    let req = Request::builder().method("POST").uri("/sessions").body(Body::from("{oops")).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);

    let id = create(&app, json!({})).await["id"].as_str().unwrap().to_string();
    let (st, v) = json_call(&app, "POST", &format!("/sessions/{id}/step"), Some(json!({ "input": [1, 2] }))).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["field"], "input");
}

/// A two-bolt scene whose target sits exactly at the range boundary from home.
fn boundary_scene() -> Value {
    json!({
        "targets": [
            { "label": "a", "position": [0.4, 0.0, 0.0] },
            { "label": "b", "position": [0.0, 0.4, 0.0] }
        ],
        "home": [0.0, 0.0, 0.0],
        "range_d": 0.4
    })
}

#[tokio::test]
async fn bell_at_range_boundary_passes_human_input() {
    let app = app();
    let s = create(&app, json!({ "scene": boundary_scene(), "target_id": 0, "seed": 1 })).await;
    assert_eq!(s["alpha"], 0.0);
    let id = s["id"].as_str().unwrap();
    let x = [0.0015, 0.0005, 0.0];
    let (st, v) = step(&app, id, x).await;
    assert_eq!(st, StatusCode::OK);
    let r: StepReply = serde_json::from_value(v).unwrap();
    assert_eq!(r.alpha, 0.0);
    assert_eq!(r.command, Vec3::from(x));
    assert_eq!(r.friendliness, 1.0);
}

#[tokio::test]
async fn zero_input_with_zero_alpha_holds_position() {
    let app = app();
    let s = create(&app, json!({ "scene": boundary_scene(), "target_id": 0, "seed": 2 })).await;
    let id = s["id"].as_str().unwrap();
    let (_, v) = step(&app, id, [0.0; 3]).await;
    let r: StepReply = serde_json::from_value(v).unwrap();
    assert_eq!(r.pos, Vec3::ZERO);
    assert_eq!(r.friendliness, 1.0);
    assert_eq!(r.step, 0);
}

#[tokio::test]
async fn steering_at_the_target_succeeds_then_rejects_steps() {
    let app = app();
    let s = create(&app, json!({ "seed": 3, "target_id": 1, "policy": "negative" })).await;
    let id = s["id"].as_str().unwrap().to_string();
    let target = Vec3::from(serde_json::from_value::<[f64; 3]>(s["scene"]["targets"][1]["position"].clone()).unwrap());
    let speed = s["speed_a"].as_f64().unwrap();
    let mut pos = Vec3::from(serde_json::from_value::<[f64; 3]>(s["pos"].clone()).unwrap());
    let mut last = Value::Null;
    for _ in 0..2000 {
        let dir = (target - pos).clamp_norm(speed);
        let (st, v) = step(&app, &id, [dir.x, dir.y, dir.z]).await;
        assert_eq!(st, StatusCode::OK);
        pos = Vec3::from(serde_json::from_value::<[f64; 3]>(v["pos"].clone()).unwrap());
        last = v;
        if last["status"] != "running" {
            break;
        }
    }
    assert_eq!(last["status"], "success");
    assert!(pos.distance(target) <= s["success_radius"].as_f64().unwrap());
    let (st, v) = step(&app, &id, [0.0; 3]).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "terminated");
}

#[tokio::test]
async fn trace_rows_and_identity() {
    let app = app();
    let id = create(&app, json!({ "seed": 4 })).await["id"].as_str().unwrap().to_string();
    for k in 0..25 {
        let (st, v) = step(&app, &id, [0.001, 0.0005 * (k % 3) as f64, 0.0]).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(v["step"], k);
        assert_eq!(v["v"], 1);
    }
    let t = trace(&app, &id).await;
    assert_eq!((t.step, t.record.steps.len()), (25, 25));
    assert!(t.record.steps.windows(2).all(|w| w[1].pos == w[0].pos + w[0].m));

    let (st, csv) = call(&app, "GET", &format!("/sessions/{id}/trace?format=csv"), None).await;
    assert_eq!(st, StatusCode::OK);
    // header + one row per pose
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 26);
    let (st, _) = call(&app, "GET", &format!("/sessions/{id}/trace?format=xml"), None).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn oversized_input_is_clamped_not_rejected() {
    let app = app();
    let s = create(&app, json!({ "seed": 5 })).await;
    let (st, v) = step(&app, s["id"].as_str().unwrap(), [3.0, 4.0, 0.0]).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["clamped"], true);
    let human: [f64; 3] = serde_json::from_value(v["human"].clone()).unwrap();
    assert!((Vec3::from(human).norm() - s["max_input"].as_f64().unwrap()).abs() < 1e-15);
}

#[tokio::test]
async fn blind_sessions_hide_the_nominal_target() {
    let app = app();
    let s = create(&app, json!({ "seed": 6, "blind": true })).await;
    assert!(s.get("nominal").is_none());
    let (_, v) = step(&app, s["id"].as_str().unwrap(), [0.001, 0.0, 0.0]).await;
    assert!(v.get("nominal").is_none());
    let open = create(&app, json!({ "seed": 6 })).await;
    assert!(open.get("nominal").is_some());
}

#[tokio::test]
async fn delete_list_and_unknown_ids() {
    let app = app();
    let a = create(&app, json!({})).await["id"].as_str().unwrap().to_string();
    let b = create(&app, json!({})).await["id"].as_str().unwrap().to_string();
    let (_, v) = json_call(&app, "GET", "/sessions", None).await;
    assert_eq!(v["sessions"].as_array().unwrap().len(), 2);

    for expected in [true, false] {
        let (st, v) = json_call(&app, "DELETE", &format!("/sessions/{a}"), None).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(v["deleted"], expected);
    }
    let (st, _) = step(&app, &a, [0.0; 3]).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = call(&app, "GET", &format!("/sessions/{a}/trace"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (_, v) = json_call(&app, "GET", "/sessions", None).await;
    let ids: Vec<&str> = v["sessions"].as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(ids, vec![b.as_str()]);
}

#[tokio::test]
async fn interleaved_sessions_do_not_interfere() {
    let app = app();
    let inputs: Vec<[f64; 3]> = (0..40).map(|k| [0.001, 0.0002 * (k % 5) as f64, -0.0003]).collect();
    let body = |seed: u64| json!({ "seed": seed, "autonomy_level": 2, "intent_level": 3, "policy": "bell" });

    let solo = create(&app, body(10)).await["id"].as_str().unwrap().to_string();
    for x in &inputs {
        step(&app, &solo, *x).await;
    }
    let a = create(&app, body(10)).await["id"].as_str().unwrap().to_string();
    let b = create(&app, body(11)).await["id"].as_str().unwrap().to_string();
    for x in &inputs {
        step(&app, &a, *x).await;
        step(&app, &b, [-x[0], x[1], x[2]]).await;
    }
    assert_eq!(trace(&app, &solo).await.record, trace(&app, &a).await.record);
}

#[tokio::test]
async fn event_stream_pushes_step_frames() {
    let app = app();
    let id = create(&app, json!({ "seed": 12 })).await["id"].as_str().unwrap().to_string();
    let req = Request::builder().uri(format!("/sessions/{id}/events")).body(Body::empty()).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert!(res.headers()["content-type"].to_str().unwrap().starts_with("text/event-stream"));
    let mut body = res.into_body();

    let (_, reply) = step(&app, &id, [0.001, 0.0, 0.0]).await;
    let frame = tokio::time::timeout(Duration::from_secs(5), body.frame()).await.unwrap().unwrap().unwrap();
    let text = String::from_utf8(frame.into_data().unwrap().to_vec()).unwrap();
    assert!(text.starts_with("event: step\n"), "{text}");
    let data = text.lines().find_map(|l| l.strip_prefix("data: ")).unwrap();
    assert_eq!(serde_json::from_str::<Value>(data).unwrap(), reply);

    let (st, _) = call(&app, "GET", "/sessions/nope/events", None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}
