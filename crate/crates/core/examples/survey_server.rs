//! The judgement survey API, driven in-process. With `--serve ADDR` the same
//! router listens on a real socket instead (e.g. for the web front end).
//!
//! cargo run --example survey_server
//! cargo run --example survey_server -- --serve 127.0.0.1:8080

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request};
use depqg::cli::{router, serve_on, EvalSet, EvalTriple, Origin, SurveyState};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: Method, uri: &str, body: Option<Value>) -> anyhow::Result<(u16, String)> {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body)?).await?;
    let status = resp.status().as_u16();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await?;
    Ok((status, String::from_utf8(bytes.to_vec())?))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let triples_path = dir.path().join("triples.ndjson");
    let mut lines = String::new();
    for (i, (q, a, origin)) in [
        ("När tog John examen ?", "2010", Origin::Gold),
        ("när tog john examen ?", "in 2010", Origin::Generated),
        ("Vem besökte Rom ?", "Peter", Origin::Gold),
    ]
    .into_iter()
    .enumerate()
    {
        let t = EvalTriple {
            triple_id: format!("t{:03}", i + 1),
            sent_id: format!("s{}", i / 2 + 1),
            source_sentence: "John tog examen 2010.".into(),
            question: q.into(),
            answer: a.into(),
            origin,
            set: EvalSet::Dev,
        };
        lines.push_str(&serde_json::to_string(&t)?);
        lines.push('\n');
    }
    std::fs::write(&triples_path, lines)?;
    let store = dir.path().join("store.ndjson");
    let state = Arc::new(SurveyState::open(&triples_path, &store, 42)?);

    let args: Vec<String> = std::env::args().collect();
    if let Some(addr) = args.iter().position(|a| a == "--serve").and_then(|i| args.get(i + 1)) {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        println!("listening on http://{}", listener.local_addr()?);
        serve_on(listener, state).await?;
        return Ok(());
    }

    let app = router(state);
    let (_, session) = call(&app, Method::GET, "/api/session/judge-a", None).await?;
    println!("session: {session}");
    let first: Value = serde_json::from_str(&session)?;
    let id = first["next"].as_str().unwrap_or("t001").to_string();

    let (status, body) = call(&app, Method::GET, &format!("/api/triple/{id}"), None).await?;
    let v: Value = serde_json::from_str(&body)?;
    println!("GET triple {id}: {status}, question {}", v["triple"]["question"]);

    let scores: serde_json::Map<String, Value> = (1..=9).map(|c| (format!("C{c}"), json!(3))).collect();
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/judgement",
        Some(json!({"judge_id": "judge-a", "triple_id": id, "scores": scores})),
    )
    .await?;
    println!("POST judgement: {status} {body}");

    let mut bad = scores.clone();
    bad.insert("C4".into(), json!(5));
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/judgement",
        Some(json!({"judge_id": "judge-a", "triple_id": id, "scores": bad})),
    )
    .await?;
    println!("POST out of range: {status} {body}");

    let (_, export) = call(&app, Method::GET, "/api/export", None).await?;
    print!("export:\n{export}");
    Ok(())
}
