//! HTTP/JSON service for the designer front end.
//!
//! | route | |
//! |-------|-|
//! | `GET /deal` | current draft deal file |
//! | `PUT /deal` | validate and store a draft; `400` with violations when invalid |
//! | `POST /simulate` | `{scenarios?, seed?, alpha?, dump?}`; returns `{run_id}` |
//! | `GET /runs/{id}/status` | `{state, progress, error?}` |
//! | `GET /runs/{id}/tranching` `features` `ndm` `cva` | run reports |

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::deal_service::deal_file::{parse_deal_str, ParsedDeal};
use crate::deal_service::pipeline::Progress;
use crate::deal_service::runs::RunStore;
use crate::deal_service::{run_pipeline, RunOverrides};
use crate::error::PealError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum RunState {
    Running,
    Done,
    Failed,
}

struct RunStatus {
    state: Mutex<(RunState, Option<String>)>,
    progress: Progress,
}

struct Inner {
    store: RunStore,
    draft: RwLock<Option<(String, ParsedDeal)>>,
    runs: Mutex<HashMap<String, Arc<RunStatus>>>,
}

/// Shared service state.
#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// State over `store`, picking up a stored draft if one is valid.
    pub fn new(store: RunStore) -> Self {
        let draft = std::fs::read_to_string(store.draft_path())
            .ok()
            .and_then(|text| parse_deal_str(&text).ok().map(|p| (text, p)));
        Self(Arc::new(Inner { store, draft: RwLock::new(draft), runs: Mutex::new(HashMap::new()) }))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/deal", get(get_deal).put(put_deal))
        .route("/simulate", post(simulate))
        .route("/runs/{id}/status", get(status))
        .route("/runs/{id}/{report}", get(run_report))
        .with_state(state)
}

/// Serve on `addr` until the process ends.
pub async fn serve(addr: std::net::SocketAddr, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn error(status: StatusCode, e: &PealError) -> Response {
    let body = match e.violations() {
        Some(v) => json!({ "error": e.to_string(), "violations": v }),
        None => json!({ "error": e.to_string() }),
    };
    (status, Json(body)).into_response()
}

fn message(status: StatusCode, msg: &str) -> Response {
    (status, Json(json!({ "error": msg }))).into_response()
}

fn raw_json(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

async fn get_deal(State(s): State<AppState>) -> Response {
    match s.0.draft.read().expect("draft lock").as_ref() {
        Some((text, _)) => raw_json(text.clone().into_bytes()),
        None => message(StatusCode::NOT_FOUND, "no deal has been stored"),
    }
}

async fn put_deal(State(s): State<AppState>, body: String) -> Response {
    match parse_deal_str(&body) {
        Err(e) => error(StatusCode::BAD_REQUEST, &e),
        Ok(parsed) => {
            let compliance = parsed.compliance.clone();
            if let Err(e) = std::fs::create_dir_all(s.0.store.root()).and_then(|_| std::fs::write(s.0.store.draft_path(), &body)) {
                return message(StatusCode::INTERNAL_SERVER_ERROR, &e.to_string());
            }
            *s.0.draft.write().expect("draft lock") = Some((body, parsed));
            Json(json!({ "valid": true, "compliance": compliance })).into_response()
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    scenarios: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
    #[serde(default)]
    dump: bool,
}

async fn simulate(State(s): State<AppState>, body: Option<Json<SimulateRequest>>) -> Response {
    let req = body.map(|Json(r)| r).unwrap_or_default();
    let Some(parsed) = s.0.draft.read().expect("draft lock").as_ref().map(|(_, p)| p.clone()) else {
        return message(StatusCode::CONFLICT, "PUT /deal first");
    };
    let cfg = RunOverrides { scenarios: req.scenarios, seed: req.seed, alpha: req.alpha }.resolve(&parsed);
    if cfg.scenarios == 0 {
        return error(StatusCode::BAD_REQUEST, &PealError::NoScenarios);
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return error(StatusCode::BAD_REQUEST, &PealError::InvalidAlpha(cfg.alpha));
    }
    let id = crate::deal_service::runs::run_id(&parsed.canonical_json(), &cfg);
    let status = {
        let mut runs = s.0.runs.lock().expect("runs lock");
        if let Some(existing) = runs.get(&id) {
            if existing.state.lock().expect("state lock").0 != RunState::Failed {
                return (StatusCode::ACCEPTED, Json(json!({ "run_id": id }))).into_response();
            }
        }
        let status = Arc::new(RunStatus { state: Mutex::new((RunState::Running, None)), progress: Progress::default() });
        runs.insert(id.clone(), status.clone());
        status
    };
    let store = s.0.store.clone();
    tokio::task::spawn_blocking(move || {
        let result = run_pipeline(&parsed, &cfg, &store, req.dump, Some(&status.progress));
        let mut st = status.state.lock().expect("state lock");
        *st = match result {
            Ok(_) => (RunState::Done, None),
            Err(e) => {
                log::warn!("run failed: {e}");
                (RunState::Failed, Some(e.to_string()))
            }
        };
    });
    (StatusCode::ACCEPTED, Json(json!({ "run_id": id }))).into_response()
}

async fn status(State(s): State<AppState>, Path(id): Path<String>) -> Response {
    if let Some(st) = s.0.runs.lock().expect("runs lock").get(&id).cloned() {
        let (state, err) = st.state.lock().expect("state lock").clone();
        let progress = if state == RunState::Done { 1.0 } else { st.progress.fraction() };
        return Json(json!({ "run_id": id, "state": state, "progress": progress, "error": err })).into_response();
    }
    match s.0.store.record(&id) {
        Ok(Some(r)) => Json(json!({ "run_id": id, "state": RunState::Done, "progress": 1.0, "digest": r.report_digest() })).into_response(),
        Ok(None) => message(StatusCode::NOT_FOUND, "unknown run"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e),
    }
}

async fn run_report(State(s): State<AppState>, Path((id, report)): Path<(String, String)>) -> Response {
    let file = match report.as_str() {
        "tranching" | "features" | "ndm" | "cva" => format!("{report}.json"),
        _ => return message(StatusCode::NOT_FOUND, "unknown report"),
    };
    let running = s
        .0
        .runs
        .lock()
        .expect("runs lock")
        .get(&id)
        .map(|st| st.state.lock().expect("state lock").0)
        .filter(|&st| st != RunState::Done);
    if let Some(state) = running {
        return (StatusCode::CONFLICT, Json(json!({ "run_id": id, "state": state }))).into_response();
    }
    match s.0.store.read_artifact(&id, &file) {
        Ok(Some(bytes)) => raw_json(bytes),
        Ok(None) => message(StatusCode::NOT_FOUND, "unknown run"),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, &e),
    }
}
