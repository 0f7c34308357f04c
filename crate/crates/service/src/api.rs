use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use nemoloc::algorithms::{Algorithm, Problem, RunConfig};
use nemoloc::instance::{
    binomial, compute_bounds, distances, generate_instance, BoundsBudget, BoundsMethod, GeneratorConfig,
    EXHAUSTIVE_CAP,
};
use nemoloc::preference::Verdict;
use nemoloc::{Instance, Solution};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ApiError;
use crate::session::{self, AnswerRejected, Launch, RunState, Session};
use crate::ServiceConfig;

fn default_period() -> usize {
    10
}

fn default_max_generations() -> usize {
    1000
}

fn default_pop_size() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub q: usize,
    pub m: usize,
    pub seed: u64,
    #[serde(default)]
    pub config: GeneratorConfig,
}

/// Body of `POST /sessions`. Exactly one of `instance` (an inline instance
/// document) and `generate` is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateSpec>,
    pub p: usize,
    #[serde(default = "default_period")]
    pub interaction_period: usize,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default = "default_pop_size")]
    pub pop_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Stop as soon as this subset enters the population.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<usize>>,
    /// Defaults to exhaustive when the subsets can be enumerated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsMethod>,
    /// Id of a logged session to restart by replaying its answers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBody {
    query_id: u64,
    verdict: Verdict,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<Mutex<HashMap<String, Arc<Session>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            config: Arc::new(config),
            sessions: Arc::default(),
        }
    }

    fn sessions(&self) -> std::sync::MutexGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn get(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.sessions().get(id).cloned().ok_or_else(|| ApiError::NotFound(id.into()))
    }

    fn log_path(&self, id: &str) -> Option<PathBuf> {
        self.config.log_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")))
    }
}

pub fn routes(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/query", get(get_query))
        .route("/sessions/{id}/answer", post(post_answer))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/result", get(get_result))
        .with_state(state)
}

fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))
}

fn build_launch(req: &CreateSession, cfg: &ServiceConfig) -> Result<Launch, ApiError> {
    let instance = match (&req.instance, &req.generate) {
        (Some(doc), None) => Instance::from_json(&doc.to_string())?,
        (None, Some(g)) => generate_instance(g.q, g.m, g.seed, &g.config)?,
        _ => return Err(ApiError::BadRequest("give exactly one of `instance` and `generate`".into())),
    };
    if req.p == 0 || req.p > instance.m() {
        return Err(ApiError::BadRequest(format!("p must lie in 1..={} (got {})", instance.m(), req.p)));
    }
    let method = req.bounds.unwrap_or(if binomial(instance.m(), req.p) <= EXHAUSTIVE_CAP {
        BoundsMethod::Exhaustive
    } else {
        BoundsMethod::Evolutionary
    });
    let bounds = compute_bounds(&instance, &distances(&instance), req.p, method, &BoundsBudget::default())?;
    let target = match &req.target {
        Some(sites) => Some(Solution::new(sites.clone(), instance.m())?),
        None => None,
    };
    let config = RunConfig {
        algorithm: Algorithm::Nemo2ch,
        interaction_period: req.interaction_period,
        p: req.p,
        max_generations: req.max_generations,
        pop_size: req.pop_size,
        seed: req.seed,
        target,
        ..RunConfig::default()
    };
    config.validate(instance.m())?;
    let instance = Arc::new(instance);
    Ok(Launch {
        problem: Problem::new((*instance).clone(), bounds),
        instance,
        config,
        request: CreateSession { resume: None, ..req.clone() },
        answer_timeout: cfg.answer_timeout,
        log_path: None,
        replay: Vec::new(),
    })
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let req: CreateSession = parse(&body)?;
    if app.sessions().len() >= app.config.max_sessions {
        return Err(ApiError::Conflict(format!("session limit of {} reached", app.config.max_sessions)));
    }

    let (id, replay) = match &req.resume {
        None => (uuid::Uuid::new_v4().simple().to_string(), Vec::new()),
        Some(old) => {
            let path = app
                .log_path(old)
                .ok_or_else(|| ApiError::BadRequest("resuming needs a session log directory".into()))?;
            if app.sessions().contains_key(old) {
                return Err(ApiError::Conflict(format!("session `{old}` is still live")));
            }
            if !path.is_file() {
                return Err(ApiError::NotFound(old.clone()));
            }
            let (logged, answers) = session::read_log(&path)?;
            if logged.seed != req.seed {
                return Err(ApiError::Conflict(format!(
                    "cannot resume `{old}`: it ran with seed {}, not {}",
                    logged.seed, req.seed
                )));
            }
            (old.clone(), answers)
        }
    };

    let cfg = Arc::clone(&app.config);
    let req2 = req.clone();
    let mut launch = tokio::task::spawn_blocking(move || build_launch(&req2, &cfg))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    launch.log_path = app.log_path(&id);
    launch.replay = replay;

    let mut sessions = app.sessions();
    if sessions.len() >= app.config.max_sessions {
        return Err(ApiError::Conflict(format!("session limit of {} reached", app.config.max_sessions)));
    }
    if sessions.contains_key(&id) {
        return Err(ApiError::Conflict(format!("session `{id}` is still live")));
    }
    let session = session::start(id.clone(), launch)?;
    sessions.insert(id.clone(), session);
    log::info!("session {id} started");
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "state": RunState::Running }))))
}

async fn get_query(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let session = app.get(&id)?;
    let state = session.state();
    Ok(Json(match session.pending() {
        Some(q) => json!({ "pending": true, "state": state, "query": q }),
        None if state == RunState::Finished => {
            json!({ "pending": false, "state": state, "result": format!("/sessions/{id}/result") })
        }
        None => json!({ "pending": false, "state": state }),
    }))
}

async fn post_answer(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let session = app.get(&id)?;
    let answer: AnswerBody = parse(&body)?;
    match session.answer(answer.query_id, answer.verdict) {
        Ok(stored) => Ok(Json(json!({
            "query_id": answer.query_id,
            "state": RunState::Running,
            "comparisons": stored,
        }))),
        Err(AnswerRejected::NothingPending) => Err(ApiError::Conflict("no query is pending".into())),
        Err(AnswerRejected::NotPending { query_id }) => {
            Err(ApiError::Conflict(format!("query {query_id} is not pending")))
        }
    }
}

async fn get_state(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(app.get(&id)?.view()))
}

async fn get_result(State(app): State<AppState>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let session = app.get(&id)?;
    match session.result() {
        Some(record) => Ok(Json(record)),
        None => Err(ApiError::Conflict(format!("session `{id}` has not finished"))),
    }
}

async fn delete_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let session = app.sessions().remove(&id).ok_or_else(|| ApiError::NotFound(id.clone()))?;
    session.close();
    log::info!("session {} closed", session.id());
    Ok(StatusCode::NO_CONTENT)
}
