use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chatsim_cli::config::AppConfig;
use chatsim_cli::service::{router, start_session};
use chatsim_cli::session::EventEnvelope;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const EXP1: &str = "move the BlueROV from 0,0,0 to 15,25,0";

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/fixtures/experiments.json")
        .display()
        .to_string()
}

fn app(out: &Path, frame_limit: u64) -> Router {
    let cfg = json!({
        "run": {"frame_limit": frame_limit},
        "provider": {"kind": "replay", "fixture": fixture()},
        "world": {"terrain": {"amplitude": 0.0, "lattice_spacing": 8.0, "seed": 0}},
        "output_dir": out,
    });
    let cfg = AppConfig::from_json(&cfg.to_string(), Path::new(".")).unwrap();
    let (handle, _join) = start_session(&cfg).unwrap();
    router(handle)
}

async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Vec<(String, String)>, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res
        .headers()
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_str().unwrap_or_default().to_string()))
        .collect();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, headers, bytes)
}

async fn get_json(app: &Router, uri: &str) -> Value {
    let (status, _, body) = call(app, Method::GET, uri, None).await;
    assert_eq!(
        status,
        StatusCode::OK,
        "{uri}: {}",
        String::from_utf8_lossy(&body)
    );
    serde_json::from_slice(&body).unwrap()
}

async fn post_json(
    app: &Router,
    uri: &str,
    body: Value,
) -> (StatusCode, Vec<(String, String)>, Value) {
    let (status, headers, body) = call(app, Method::POST, uri, Some(body)).await;
    (
        status,
        headers,
        serde_json::from_slice(&body).unwrap_or(Value::Null),
    )
}

#[tokio::test(flavor = "multi_thread")]
async fn fresh_scene_has_agent_at_origin() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    let scene = get_json(&app, "/api/scene").await;
    assert_eq!(scene["agent"]["position"], json!([0.0, 0.0, 0.0]));
    let status = get_json(&app, "/api/status").await;
    assert_eq!(status["frame"], 0);
    assert_eq!(status["mode"], "pause");
}

#[tokio::test(flavor = "multi_thread")]
async fn instruct_then_step_moves_the_agent() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    let (status, _, result) = post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(result["status"], "accepted");
    assert_eq!(result["script"], "set_bot_position((15, 25, 0))");

    let (status, headers, body) = post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
    assert!(headers
        .iter()
        .any(|(k, v)| k == "retry-after" && v.parse::<u64>().unwrap() >= 1));
    assert_eq!(body["pending_actions"], 1);

    let (status, _, step) = post_json(&app, "/api/step", json!({"frames": 9})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(step["frame"], 9);
    let scene = get_json(&app, "/api/scene").await;
    assert_eq!(scene["agent"]["position"], json!([15.0, 25.0, 0.0]));

    let traj = get_json(&app, "/api/trajectory?from=4").await;
    let frames: Vec<u64> = traj
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["frame"].as_u64().unwrap())
        .collect();
    assert_eq!(frames, vec![4, 5, 6, 7, 8]);
    assert_eq!(traj[0]["position"], json!([7.5, 12.5, 0.0]));

    // the queue has drained, so a new instruction is accepted again
    let (status, _, _) = post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn http_state_matches_persisted_files() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    post_json(&app, "/api/step", json!({"frames": 20})).await;

    let traj = get_json(&app, "/api/trajectory").await;
    let on_disk: Vec<Value> = std::fs::read_to_string(tmp.path().join("trajectory.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(traj, Value::Array(on_disk));

    let caps = get_json(&app, "/api/captures").await;
    let on_disk: Vec<Value> = std::fs::read_to_string(tmp.path().join("captures.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(caps, Value::Array(on_disk));
    assert_eq!(caps.as_array().unwrap().len(), 3);

    let scene = get_json(&app, "/api/scene").await;
    let file: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("scene.json")).unwrap())
            .unwrap();
    assert_eq!(scene, file);
}

#[tokio::test(flavor = "multi_thread")]
async fn capture_lookup_and_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    post_json(&app, "/api/step", json!({"frames": 10})).await;
    let rec = get_json(&app, "/api/captures/8").await;
    assert_eq!(rec["frame"], 8);
    let (status, _, _) = call(&app, Method::GET, "/api/captures/3", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, headers, ppm) = call(&app, Method::GET, "/api/snapshot.ppm?w=64&h=32", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(headers
        .iter()
        .any(|(k, v)| k == "content-type" && v == "image/x-portable-pixmap"));
    let header = b"P6\n64 32\n255\n";
    assert_eq!(&ppm[..header.len()], header);
    assert_eq!(ppm.len(), header.len() + 64 * 32 * 3);

    let (status, _, _) = call(&app, Method::GET, "/api/snapshot.ppm?w=100000&h=10", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _, _) = call(&app, Method::GET, "/api/snapshot.ppm?w=0&h=10", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_requests_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    let (status, _, _) = post_json(&app, "/api/step", json!({"frames": 0})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _, _) = post_json(&app, "/api/run", json!({"mode": "sideways"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _, _) = post_json(&app, "/api/instruct", json!({"prompt": "x"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    // an instruction the fixture does not know is a provider error, not a 5xx
    let (status, _, result) =
        post_json(&app, "/api/instruct", json!({"text": "do a barrel roll"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(result["status"], "provider_error");
}

async fn wait_for(app: &Router, what: &str, pred: impl Fn(&Value) -> bool) -> Value {
    for _ in 0..500 {
        let s = get_json(app, "/api/status").await;
        if pred(&s) {
            return s;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("timed out waiting for {what}");
}

#[tokio::test(flavor = "multi_thread")]
async fn free_run_halts_at_frame_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 50);
    let (status, _, body) = post_json(&app, "/api/run", json!({"mode": "without_input"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["mode"], "without_input");
    let s = wait_for(&app, "halt", |s| s["halted"] == true).await;
    assert_eq!(s["frame"], 50);
    assert_eq!(s["mode"], "pause");
    let (status, _, _) = post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread")]
async fn with_input_pauses_at_each_interaction_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 1000);
    post_json(&app, "/api/run", json!({"mode": "with_input"})).await;
    let s = wait_for(&app, "first boundary", |s| s["awaiting_input"] == true).await;
    assert_eq!(s["frame"], 0);
    let (status, _, _) = post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    assert_eq!(status, StatusCode::OK);
    let s = wait_for(&app, "second boundary", |s| {
        s["awaiting_input"] == true && s["frame"] != 0
    })
    .await;
    assert_eq!(s["frame"], 64);
    let scene = get_json(&app, "/api/scene").await;
    assert_eq!(scene["agent"]["position"], json!([15.0, 25.0, 0.0]));
    post_json(&app, "/api/run", json!({"mode": "pause"})).await;
}

fn parse_events(text: &str) -> Vec<(String, EventEnvelope)> {
    text.split("\n\n")
        .filter_map(|block| {
            let mut name = None;
            let mut data = None;
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("event: ") {
                    name = Some(v.to_string());
                } else if let Some(v) = line.strip_prefix("data: ") {
                    data = Some(v.to_string());
                }
            }
            Some((name?, serde_json::from_str(&data?).ok()?))
        })
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn event_stream_is_ordered_and_gapless() {
    let tmp = tempfile::tempdir().unwrap();
    let app = app(tmp.path(), 10);
    let res = app
        .clone()
        .oneshot(Request::get("/api/events").body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(res.headers()[header::CONTENT_TYPE], "text/event-stream");
    let mut body = res.into_body();

    post_json(&app, "/api/instruct", json!({"text": EXP1})).await;
    post_json(&app, "/api/step", json!({"frames": 10})).await;

    // 1 instruction, 10 frames, captures at 0 and 8, one halt
    let mut text = String::new();
    let events = loop {
        let events = parse_events(&text);
        if events.len() >= 14 {
            break events;
        }
        let frame = tokio::time::timeout(Duration::from_secs(5), body.frame())
            .await
            .expect("event stream stalled")
            .unwrap()
            .unwrap();
        if let Ok(data) = frame.into_data() {
            text.push_str(std::str::from_utf8(&data).unwrap());
        }
    };
    let seqs: Vec<u64> = events.iter().map(|(_, e)| e.seq).collect();
    assert_eq!(seqs, (0..14).collect::<Vec<_>>());
    for (name, e) in &events {
        assert_eq!(name, e.kind.as_str());
    }
    let kinds: Vec<&str> = events.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(kinds[0], "instruction_result");
    assert_eq!(kinds.iter().filter(|k| **k == "frame_advanced").count(), 10);
    assert_eq!(kinds.iter().filter(|k| **k == "capture_written").count(), 2);
    assert_eq!(kinds[13], "run_halted");
    assert_eq!(events[13].1.payload["frame"], 10);
}
