//! HTTP API over a [`Session`]: JSON state endpoints, control endpoints and
//! a server-sent event stream.

use std::convert::Infallible;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chatsim_core::capture::{render_topdown, SnapshotSettings};
use chatsim_core::scene::save_scene;
use futures::stream::{self, Stream};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::{broadcast, oneshot};

use crate::app::{build_bridge, build_simulation, io_error, CliError};
use crate::config::AppConfig;
use crate::output::RunRecorder;
use crate::session::{InstructReply, Request, RunMode, Session, SessionHandle};

/// Largest snapshot edge served by `/api/snapshot.ppm`.
pub const MAX_SNAPSHOT_EDGE: u32 = 2048;
/// Largest frame count accepted by one `/api/step` call.
pub const MAX_STEP_FRAMES: u64 = 100_000;

/// Builds the world and starts its session thread.
pub fn start_session(
    config: &AppConfig,
) -> Result<(SessionHandle, std::thread::JoinHandle<Session>), CliError> {
    let sim = build_simulation(config)?;
    let bridge = build_bridge(config)?;
    let dir = &config.output_dir;
    let recorder = RunRecorder::create(dir, config.snapshot)
        .map_err(io_error(format!("creating {}", dir.display())))?;
    let (session, _) = Session::new(
        sim,
        bridge,
        Some(recorder),
        config.snapshot,
        Duration::from_millis(config.frame_delay_ms),
    );
    Ok(session.spawn())
}

pub fn router(handle: SessionHandle) -> Router {
    Router::new()
        .route("/api/scene", get(scene))
        .route("/api/status", get(status))
        .route("/api/trajectory", get(trajectory))
        .route("/api/captures", get(captures))
        .route("/api/captures/{frame}", get(capture_at))
        .route("/api/snapshot.ppm", get(snapshot))
        .route("/api/instruct", post(instruct))
        .route("/api/step", post(step))
        .route("/api/run", post(run_mode))
        .route("/api/events", get(events))
        .with_state(handle)
}

/// Serves until ctrl-c, then writes the final run documents.
pub async fn serve(config: &AppConfig, port: u16) -> Result<(), CliError> {
    let (handle, join) = start_session(config)?;
    let app = router(handle);
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|source| CliError::Bind { port, source })?;
    log::info!("listening on http://127.0.0.1:{port}");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(io_error("serving"))?;
    // the router and its request sender are gone, so the session loop ends
    let session = tokio::task::spawn_blocking(move || join.join())
        .await
        .expect("join session")
        .expect("session thread panicked");
    session
        .finish()
        .map_err(io_error("writing final run documents"))
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

fn session_gone() -> Response {
    error(
        StatusCode::SERVICE_UNAVAILABLE,
        "simulation session has stopped",
    )
}

async fn ask<T>(
    handle: &SessionHandle,
    make: impl FnOnce(oneshot::Sender<T>) -> Request,
) -> Option<T> {
    let (tx, rx) = oneshot::channel();
    handle.requests.send(make(tx)).ok()?;
    rx.await.ok()
}

async fn scene(State(h): State<SessionHandle>) -> Response {
    let v = h.view.read().expect("view lock");
    (
        [(header::CONTENT_TYPE, "application/json")],
        save_scene(&v.scene),
    )
        .into_response()
}

async fn status(State(h): State<SessionHandle>) -> Response {
    let v = h.view.read().expect("view lock");
    Json(json!({
        "frame": v.frame,
        "halted": v.halted,
        "pending_actions": v.pending_actions,
        "mode": v.mode,
        "awaiting_input": v.awaiting_input,
    }))
    .into_response()
}

#[derive(Debug, Deserialize)]
struct FromQuery {
    #[serde(default)]
    from: u64,
}

async fn trajectory(State(h): State<SessionHandle>, Query(q): Query<FromQuery>) -> Response {
    let v = h.view.read().expect("view lock");
    let items: Vec<_> = v.trajectory.iter().filter(|r| r.frame >= q.from).collect();
    Json(items).into_response()
}

async fn captures(State(h): State<SessionHandle>, Query(q): Query<FromQuery>) -> Response {
    let v = h.view.read().expect("view lock");
    let items: Vec<_> = v.captures.iter().filter(|r| r.frame >= q.from).collect();
    Json(items).into_response()
}

async fn capture_at(State(h): State<SessionHandle>, Path(frame): Path<u64>) -> Response {
    let v = h.view.read().expect("view lock");
    match v.captures.iter().find(|r| r.frame == frame) {
        Some(r) => Json(r).into_response(),
        None => error(
            StatusCode::NOT_FOUND,
            format!("no capture at frame {frame}"),
        ),
    }
}

#[derive(Debug, Deserialize)]
struct SnapshotQuery {
    w: Option<u32>,
    h: Option<u32>,
}

async fn snapshot(State(h): State<SessionHandle>, Query(q): Query<SnapshotQuery>) -> Response {
    let (scene, base) = {
        let v = h.view.read().expect("view lock");
        (v.scene.clone(), v.snapshot)
    };
    let settings = SnapshotSettings {
        width: q.w.unwrap_or(base.width),
        height: q.h.unwrap_or(base.height),
        ..base
    };
    if settings.width > MAX_SNAPSHOT_EDGE || settings.height > MAX_SNAPSHOT_EDGE {
        return error(
            StatusCode::BAD_REQUEST,
            format!("snapshot edges are limited to {MAX_SNAPSHOT_EDGE} pixels"),
        );
    }
    match render_topdown(&scene, &settings) {
        Ok(ppm) => ([(header::CONTENT_TYPE, "image/x-portable-pixmap")], ppm).into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstructBody {
    text: String,
}

async fn instruct(State(h): State<SessionHandle>, Json(body): Json<InstructBody>) -> Response {
    let Some(reply) = ask(&h, |reply| Request::Instruct {
        text: body.text,
        reply,
    })
    .await
    else {
        return session_gone();
    };
    match reply {
        InstructReply::Done(result) => Json(result).into_response(),
        InstructReply::Busy {
            retry_after_secs,
            pending_actions,
        } => (
            StatusCode::CONFLICT,
            [(header::RETRY_AFTER, retry_after_secs.to_string())],
            Json(json!({
                "error": "earlier actions are still queued",
                "pending_actions": pending_actions,
            })),
        )
            .into_response(),
        InstructReply::Halted => error(StatusCode::CONFLICT, "the run has reached its frame limit"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepBody {
    frames: u64,
}

async fn step(State(h): State<SessionHandle>, Json(body): Json<StepBody>) -> Response {
    if body.frames == 0 || body.frames > MAX_STEP_FRAMES {
        return error(
            StatusCode::BAD_REQUEST,
            format!("frames must be between 1 and {MAX_STEP_FRAMES}"),
        );
    }
    match ask(&h, |reply| Request::Step {
        frames: body.frames,
        reply,
    })
    .await
    {
        Some(r) => Json(r).into_response(),
        None => session_gone(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunBody {
    mode: RunMode,
}

async fn run_mode(State(h): State<SessionHandle>, Json(body): Json<RunBody>) -> Response {
    match ask(&h, |reply| Request::Run {
        mode: body.mode,
        reply,
    })
    .await
    {
        Some(mode) => Json(json!({ "mode": mode })).into_response(),
        None => session_gone(),
    }
}

fn event_stream(
    rx: broadcast::Receiver<crate::session::EventEnvelope>,
) -> impl Stream<Item = Result<Event, Infallible>> {
    stream::unfold(rx, |mut rx| async move {
        let event = match rx.recv().await {
            Ok(env) => Event::default()
                .event(env.kind.as_str())
                .id(env.seq.to_string())
                .json_data(&env)
                .expect("envelope serializes"),
            // the client fell behind; it can resync from the state endpoints
            Err(broadcast::error::RecvError::Lagged(n)) => {
                Event::default().event("lagged").data(n.to_string())
            }
            Err(broadcast::error::RecvError::Closed) => return None,
        };
        Some((Ok(event), rx))
    })
}

async fn events(State(h): State<SessionHandle>) -> impl IntoResponse {
    Sse::new(event_stream(h.events.subscribe())).keep_alive(KeepAlive::default())
}
