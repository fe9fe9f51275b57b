//! HTTP JSON API for the judgement survey.
//!
//! | method | path                      | body / response                          |
//! |--------|---------------------------|------------------------------------------|
//! | GET    | `/api/session/{judge_id}` | this judge's triple order and progress   |
//! | GET    | `/api/triple/{id}`        | the triple, guidelines and criteria      |
//! | POST   | `/api/judgement`          | `{judge_id, triple_id, scores}`; 422 if invalid |
//! | GET    | `/api/export`             | every stored record, one JSON per line   |
//!
//! Records are appended to the store file one line at a time under a single
//! lock and synced before the response is sent.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{Duration, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::Mutex;

use super::survey::{
    judge_order, read_eval_triples, EvalTriple, JudgementRecord, ScoreError, GUIDELINES_EN,
    GUIDELINES_SV,
};
use super::{input_err, CliError};
use crate::metrics::Criterion;

struct Store {
    file: File,
    records: Vec<JudgementRecord>,
}

pub struct SurveyState {
    triples: Vec<EvalTriple>,
    by_id: HashMap<String, usize>,
    ids: Vec<String>,
    seed: u64,
    store: Mutex<Store>,
}

fn load_store(path: &Path, known: &HashMap<String, usize>) -> Result<Vec<JudgementRecord>, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => {
            return Err(CliError::Io {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    if !text.is_empty() && !text.ends_with('\n') {
        let line = text.lines().count();
        return Err(input_err(path, line, "corrupt store: truncated last record"));
    }
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |msg: String| input_err(path, i + 1, format!("corrupt store: {msg}"));
        let r: JudgementRecord = serde_json::from_str(line).map_err(|e| corrupt(e.to_string()))?;
        r.validate().map_err(|e| corrupt(e.to_string()))?;
        if !known.contains_key(&r.triple_id) {
            return Err(corrupt(format!("unknown triple {:?}", r.triple_id)));
        }
        records.push(r);
    }
    Ok(records)
}

impl SurveyState {
    /// Loads the evaluation triples and replays the store. A store that does
    /// not parse, or that names unknown triples, is an error.
    pub fn open(triples: &Path, store: &Path, seed: u64) -> Result<Self, CliError> {
        let triples = read_eval_triples(triples)?;
        if triples.is_empty() {
            return Err(CliError::Failed("no evaluation triples".into()));
        }
        let by_id: HashMap<String, usize> = triples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.triple_id.clone(), i))
            .collect();
        let records = load_store(store, &by_id)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(store)
            .map_err(|source| CliError::Io {
                path: store.to_path_buf(),
                source,
            })?;
        let ids = triples.iter().map(|t| t.triple_id.clone()).collect();
        Ok(SurveyState {
            triples,
            by_id,
            ids,
            seed,
            store: Mutex::new(Store { file, records }),
        })
    }

    pub fn order_for(&self, judge_id: &str) -> Vec<String> {
        judge_order(&self.ids, self.seed, judge_id)
    }

    pub async fn records(&self) -> Vec<JudgementRecord> {
        self.store.lock().await.records.clone()
    }

    /// Appends a validated record. Timestamps are strictly increasing in
    /// store order. Returns the stored record and whether it replaces an
    /// earlier one of the same judge and triple.
    async fn append(
        &self,
        judge_id: &str,
        triple_id: &str,
        scores: &BTreeMap<String, i64>,
    ) -> Result<(JudgementRecord, bool), AppendError> {
        if !self.by_id.contains_key(triple_id) {
            return Err(ScoreError::UnknownTriple(triple_id.to_string()).into());
        }
        let mut store = self.store.lock().await;
        let mut ts = Utc::now();
        if let Some(last) = store.records.last() {
            if ts <= last.timestamp {
                ts = last.timestamp + Duration::microseconds(1);
            }
        }
        let record = JudgementRecord::from_raw(judge_id, triple_id, scores, ts)?;
        let mut line = serde_json::to_string(&record).expect("record serializes");
        line.push('\n');
        store.file.write_all(line.as_bytes())?;
        store.file.sync_data()?;
        let replaces = store
            .records
            .iter()
            .any(|r| r.judge_id == record.judge_id && r.triple_id == record.triple_id);
        store.records.push(record.clone());
        Ok((record, replaces))
    }
}

enum AppendError {
    Invalid(ScoreError),
    Io(std::io::Error),
}

impl From<ScoreError> for AppendError {
    fn from(e: ScoreError) -> Self {
        AppendError::Invalid(e)
    }
}

impl From<std::io::Error> for AppendError {
    fn from(e: std::io::Error) -> Self {
        AppendError::Io(e)
    }
}

fn error(status: StatusCode, msg: impl ToString) -> Response {
    (status, Json(json!({ "error": msg.to_string() }))).into_response()
}

#[derive(Serialize)]
struct Session {
    judge_id: String,
    triple_ids: Vec<String>,
    completed: Vec<String>,
    next: Option<String>,
}

async fn session(State(st): State<Arc<SurveyState>>, UrlPath(judge_id): UrlPath<String>) -> Response {
    let order = st.order_for(&judge_id);
    let done: HashSet<String> = st
        .store
        .lock()
        .await
        .records
        .iter()
        .filter(|r| r.judge_id == judge_id)
        .map(|r| r.triple_id.clone())
        .collect();
    let completed: Vec<String> = order.iter().filter(|id| done.contains(*id)).cloned().collect();
    let next = order.iter().find(|id| !done.contains(*id)).cloned();
    Json(Session {
        judge_id,
        triple_ids: order,
        completed,
        next,
    })
    .into_response()
}

#[derive(Serialize)]
struct CriterionInfo {
    id: Criterion,
    statement: &'static str,
    direction: &'static str,
}

async fn triple(State(st): State<Arc<SurveyState>>, UrlPath(id): UrlPath<String>) -> Response {
    let Some(&i) = st.by_id.get(&id) else {
        return error(StatusCode::NOT_FOUND, format!("unknown triple {id:?}"));
    };
    let criteria: Vec<CriterionInfo> = Criterion::ALL
        .iter()
        .map(|&c| CriterionInfo {
            id: c,
            statement: c.statement(),
            direction: c.arrow(),
        })
        .collect();
    Json(json!({
        "triple": st.triples[i],
        "guidelines": { "sv": GUIDELINES_SV, "en": GUIDELINES_EN },
        "criteria": criteria,
    }))
    .into_response()
}

#[derive(Deserialize)]
struct Submission {
    judge_id: String,
    triple_id: String,
    scores: BTreeMap<String, i64>,
}

async fn judgement(State(st): State<Arc<SurveyState>>, body: Result<Json<Submission>, axum::extract::rejection::JsonRejection>) -> Response {
    let Json(sub) = match body {
        Ok(b) => b,
        Err(rej) => return error(StatusCode::UNPROCESSABLE_ENTITY, rej.body_text()),
    };
    match st.append(&sub.judge_id, &sub.triple_id, &sub.scores).await {
        Ok((record, superseded_earlier)) => (
            StatusCode::CREATED,
            Json(json!({ "record": record, "replaces_earlier": superseded_earlier })),
        )
            .into_response(),
        Err(AppendError::Invalid(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e),
        Err(AppendError::Io(e)) => {
            log::error!("store write failed: {e}");
            error(StatusCode::INTERNAL_SERVER_ERROR, "store write failed")
        }
    }
}

#[derive(Serialize)]
struct ExportLine<'a> {
    #[serde(flatten)]
    record: &'a JudgementRecord,
    superseded: bool,
}

async fn export(State(st): State<Arc<SurveyState>>) -> Response {
    let store = st.store.lock().await;
    let mut latest: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, r) in store.records.iter().enumerate() {
        latest.insert((&r.judge_id, &r.triple_id), i);
    }
    let mut body = String::new();
    for (i, r) in store.records.iter().enumerate() {
        let line = ExportLine {
            record: r,
            superseded: latest[&(r.judge_id.as_str(), r.triple_id.as_str())] != i,
        };
        body.push_str(&serde_json::to_string(&line).expect("record serializes"));
        body.push('\n');
    }
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

pub fn router(state: Arc<SurveyState>) -> Router {
    Router::new()
        .route("/api/session/{judge_id}", get(session))
        .route("/api/triple/{id}", get(triple))
        .route("/api/judgement", post(judgement))
        .route("/api/export", get(export))
        .with_state(state)
}

/// Serves on an already bound listener until the process is interrupted.
pub async fn serve_on(listener: TcpListener, state: Arc<SurveyState>) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

pub async fn serve_survey(triples: &Path, store: &Path, bind: &str, seed: u64) -> Result<(), CliError> {
    let state = Arc::new(SurveyState::open(triples, store, seed)?);
    let listener = TcpListener::bind(bind)
        .await
        .map_err(|e| CliError::Failed(format!("cannot bind {bind}: {e}")))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Failed(e.to_string()))?;
    log::info!("survey listening on http://{addr}");
    serve_on(listener, state)
        .await
        .map_err(|e| CliError::Failed(format!("server error: {e}")))
}
