//! One interactive run: a worker thread driving the engine, and the shared
//! state the HTTP handlers read and answer through.

use std::collections::VecDeque;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::time::Duration;

use chrono::{DateTime, Utc};
use nemoloc::algorithms::{run_observed, Problem, RunConfig, RunObserver, RunRecord, Snapshot};
use nemoloc::dm::{DecisionMaker, Query, QueryCandidate};
use nemoloc::preference::{ModelKind, Verdict};
use nemoloc::{Error, Instance, ObjectiveVector};
use serde::{Deserialize, Serialize};

use crate::api::CreateSession;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    AwaitingAnswer,
    /// Still waiting for an answer after the answer timeout.
    Paused,
    Finished,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateView {
    pub sites: Vec<usize>,
    pub coordinates: Vec<[f64; 2]>,
    pub objectives: [f64; 5],
    pub normalized: [f64; 5],
}

impl CandidateView {
    fn new(c: &QueryCandidate, instance: &Instance) -> Self {
        let sites = c.solution.sites().to_vec();
        let coordinates = sites
            .iter()
            .map(|&s| {
                let site = &instance.sites()[s - 1];
                [site.x, site.y]
            })
            .collect();
        CandidateView {
            sites,
            coordinates,
            objectives: c.objectives.0,
            normalized: c.normalized.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub query_id: u64,
    pub generation: usize,
    pub left: CandidateView,
    pub right: CandidateView,
    pub asked_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub query_id: u64,
    pub verdict: Verdict,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub answered_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberView {
    pub sites: Vec<usize>,
    pub objectives: [f64; 5],
}

impl MemberView {
    fn new(sites: &[usize], objectives: &ObjectiveVector) -> Self {
        MemberView {
            sites: sites.to_vec(),
            objectives: objectives.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub id: String,
    pub state: RunState,
    pub created_at: DateTime<Utc>,
    pub generation: usize,
    pub model: Option<ModelKind>,
    pub comparisons_asked: usize,
    /// Current population by front, best first.
    pub fronts: Vec<Vec<MemberView>>,
    pub best: Option<MemberView>,
    pub history: Vec<AnswerRecord>,
    pub error: Option<String>,
}

struct Inner {
    state: RunState,
    pending: Option<QueryView>,
    answer: Option<Verdict>,
    history: Vec<AnswerRecord>,
    generation: usize,
    model: Option<ModelKind>,
    comparisons_asked: usize,
    fronts: Vec<Vec<MemberView>>,
    result: Option<RunRecord>,
    error: Option<String>,
    closed: bool,
}

struct Shared {
    inner: Mutex<Inner>,
    wake: Condvar,
}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Why an answer was not accepted.
#[derive(Debug, Clone, PartialEq)]
pub enum AnswerRejected {
    NothingPending,
    NotPending { query_id: u64 },
}

pub struct Session {
    id: String,
    created_at: DateTime<Utc>,
    shared: Arc<Shared>,
}

impl Session {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> RunState {
        self.shared.lock().state
    }

    pub fn pending(&self) -> Option<QueryView> {
        self.shared.lock().pending.clone()
    }

    pub fn result(&self) -> Option<RunRecord> {
        self.shared.lock().result.clone()
    }

    pub fn view(&self) -> StateView {
        let g = self.shared.lock();
        StateView {
            id: self.id.clone(),
            state: g.state,
            created_at: self.created_at,
            generation: g.generation,
            model: g.model,
            comparisons_asked: g.comparisons_asked,
            fronts: g.fronts.clone(),
            best: g.fronts.first().and_then(|f| f.first()).cloned(),
            history: g.history.clone(),
            error: g.error.clone(),
        }
    }

    /// Hands `verdict` to the waiting worker if `query_id` is the pending
    /// query. Returns the number of stored answers.
    pub fn answer(&self, query_id: u64, verdict: Verdict) -> Result<usize, AnswerRejected> {
        let mut g = self.shared.lock();
        let pending = g.pending.as_ref().ok_or(AnswerRejected::NothingPending)?;
        if pending.query_id != query_id {
            return Err(AnswerRejected::NotPending { query_id });
        }
        let q = g.pending.take().expect("checked above");
        g.history.push(AnswerRecord {
            query_id,
            verdict,
            left: q.left.sites,
            right: q.right.sites,
            answered_at: Utc::now(),
        });
        g.answer = Some(verdict);
        g.state = RunState::Running;
        self.shared.wake.notify_all();
        Ok(g.history.len())
    }

    /// Stops waiting for answers; a worker blocked on a query ends its run.
    pub fn close(&self) {
        let mut g = self.shared.lock();
        g.closed = true;
        self.shared.wake.notify_all();
    }
}

/// What a session needs besides its id.
pub struct Launch {
    pub instance: Arc<Instance>,
    pub problem: Problem,
    pub config: RunConfig,
    pub request: CreateSession,
    pub answer_timeout: Duration,
    pub log_path: Option<PathBuf>,
    pub replay: Vec<AnswerRecord>,
}

pub fn start(id: String, launch: Launch) -> std::io::Result<Arc<Session>> {
    let shared = Arc::new(Shared {
        inner: Mutex::new(Inner {
            state: RunState::Running,
            pending: None,
            answer: None,
            history: Vec::new(),
            generation: 0,
            model: None,
            comparisons_asked: 0,
            fronts: Vec::new(),
            result: None,
            error: None,
            closed: false,
        }),
        wake: Condvar::new(),
    });
    let log = match &launch.log_path {
        Some(path) => Some(AnswerLog::create(path, &launch.request)?),
        None => None,
    };
    let session = Arc::new(Session {
        id: id.clone(),
        created_at: Utc::now(),
        shared: Arc::clone(&shared),
    });
    let Launch {
        instance,
        problem,
        config,
        answer_timeout,
        replay,
        ..
    } = launch;
    std::thread::Builder::new().name(format!("session-{id}")).spawn(move || {
        let mut dm = InteractiveDm {
            shared: Arc::clone(&shared),
            instance,
            timeout: answer_timeout,
            replay: replay.into(),
            log,
        };
        let mut observer = Observer {
            shared: Arc::clone(&shared),
        };
        let outcome = run_observed(&problem, &config, &mut dm, &mut observer);
        let mut g = shared.lock();
        g.pending = None;
        match outcome {
            Ok(record) => {
                g.generation = record.generations_used;
                g.result = Some(record);
                g.state = RunState::Finished;
            }
            Err(e) => {
                if !g.closed {
                    log::warn!("session {id} failed: {e}");
                }
                g.error = Some(e.to_string());
                g.state = RunState::Failed;
            }
        }
    })?;
    Ok(session)
}

struct Observer {
    shared: Arc<Shared>,
}

impl RunObserver for Observer {
    fn observe(&mut self, snap: &Snapshot<'_>) {
        let mut fronts: Vec<Vec<MemberView>> = Vec::new();
        let mut last = None;
        for ind in snap.population {
            if last != Some(ind.front) {
                fronts.push(Vec::new());
                last = Some(ind.front);
            }
            fronts
                .last_mut()
                .expect("pushed above")
                .push(MemberView::new(ind.solution.sites(), &ind.objectives));
        }
        let mut g = self.shared.lock();
        g.generation = snap.generation;
        g.model = snap.model;
        g.comparisons_asked = snap.comparisons_asked;
        g.fronts = fronts;
    }
}

/// Decision maker that parks each query in the shared state and blocks
/// until an HTTP client answers it. Recorded answers are replayed first.
struct InteractiveDm {
    shared: Arc<Shared>,
    instance: Arc<Instance>,
    timeout: Duration,
    replay: VecDeque<AnswerRecord>,
    log: Option<AnswerLog>,
}

impl InteractiveDm {
    fn replayed(&mut self, view: &QueryView) -> Option<AnswerRecord> {
        let next = self.replay.front()?;
        if next.query_id == view.query_id && next.left == view.left.sites && next.right == view.right.sites {
            return self.replay.pop_front();
        }
        log::warn!(
            "recorded answer to query {} does not match query {}; continuing interactively",
            next.query_id,
            view.query_id
        );
        self.replay.clear();
        None
    }

    fn record(&mut self, answer: &AnswerRecord) -> nemoloc::Result<()> {
        if let Some(log) = &mut self.log {
            log.append(answer)?;
        }
        Ok(())
    }
}

impl DecisionMaker for InteractiveDm {
    fn compare(&mut self, query: &Query) -> nemoloc::Result<Verdict> {
        let view = QueryView {
            query_id: query.generation as u64,
            generation: query.generation,
            left: CandidateView::new(&query.left, &self.instance),
            right: CandidateView::new(&query.right, &self.instance),
            asked_at: Utc::now(),
        };
        if let Some(answer) = self.replayed(&view) {
            self.shared.lock().history.push(answer.clone());
            self.record(&answer)?;
            return Ok(answer.verdict);
        }

        let mut g = self.shared.lock();
        g.pending = Some(view);
        g.answer = None;
        g.state = RunState::AwaitingAnswer;
        let verdict = loop {
            if g.closed {
                g.pending = None;
                return Err(Error::DecisionMaker("session closed".into()));
            }
            if let Some(v) = g.answer.take() {
                break v;
            }
            let (next, wait) = self.shared.wake.wait_timeout(g, self.timeout).unwrap_or_else(|e| e.into_inner());
            g = next;
            if wait.timed_out() && g.state == RunState::AwaitingAnswer {
                g.state = RunState::Paused;
            }
        };
        let answer = g.history.last().cloned().expect("answer was stored with the verdict");
        drop(g);
        self.record(&answer)?;
        Ok(verdict)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum LogLine {
    Header { request: Box<CreateSession> },
    Answer(AnswerRecord),
}

/// Per-session JSON-lines file: the creation request, then every answer.
struct AnswerLog {
    file: File,
}

impl AnswerLog {
    fn create(path: &Path, request: &CreateSession) -> std::io::Result<Self> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
        let header = LogLine::Header {
            request: Box::new(request.clone()),
        };
        writeln!(file, "{}", serde_json::to_string(&header)?)?;
        Ok(AnswerLog { file })
    }

    fn append(&mut self, answer: &AnswerRecord) -> std::io::Result<()> {
        writeln!(self.file, "{}", serde_json::to_string(&LogLine::Answer(answer.clone()))?)?;
        self.file.flush()
    }
}

/// Reads a session log back: the creation request and the answers.
pub fn read_log(path: &Path) -> nemoloc::Result<(CreateSession, Vec<AnswerRecord>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut header = None;
    let mut answers = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))? {
            LogLine::Header { request } if header.is_none() => header = Some(*request),
            LogLine::Header { .. } => return Err(Error::Parse(format!("{}: repeated header", path.display()))),
            LogLine::Answer(a) => answers.push(a),
        }
    }
    let header = header.ok_or_else(|| Error::Parse(format!("{}: missing header", path.display())))?;
    Ok((header, answers))
}
