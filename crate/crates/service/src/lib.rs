//! HTTP session service for interactive runs.
//!
//! Each session owns a worker thread running the preference-learning
//! algorithm. When the algorithm wants a pairwise comparison the worker
//! parks the query and blocks; clients poll `GET /sessions/{id}/query` and
//! unblock it with `POST /sessions/{id}/answer`.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create, 201 with `{id}` |
//! | GET | `/sessions/{id}/query` | pending query or `{"pending": false}` |
//! | POST | `/sessions/{id}/answer` | `{query_id, verdict}` |
//! | GET | `/sessions/{id}/state` | generation, model, fronts, history |
//! | GET | `/sessions/{id}/result` | final run record once finished |
//! | DELETE | `/sessions/{id}` | stop and forget |

mod api;
mod error;
mod session;

use std::path::PathBuf;
use std::time::Duration;

use axum::Router;

pub use api::{AppState, CreateSession, GenerateSpec};
pub use error::ApiError;
pub use session::{AnswerRecord, CandidateView, MemberView, QueryView, RunState, StateView};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub max_sessions: usize,
    /// After this long without an answer a session reports `paused`; it
    /// keeps waiting.
    pub answer_timeout: Duration,
    /// Where per-session answer logs go; no logs when absent.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            max_sessions: 16,
            answer_timeout: Duration::from_secs(3600),
            log_dir: None,
        }
    }
}

pub fn router(config: ServiceConfig) -> Router {
    api::routes(AppState::new(config))
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}
