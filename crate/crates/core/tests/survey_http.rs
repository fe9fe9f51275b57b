//! Drives the `serve` subcommand over real HTTP.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};

use depqg::cli::{cmd_iaa, EvalSet, EvalTriple, Origin};
use depqg::metrics::{Criterion, Gamma};
use serde_json::{json, Value};
use tempfile::TempDir;

const SEED: u64 = 7;

fn eval_triples(n: usize) -> Vec<EvalTriple> {
    (0..n)
        .map(|i| EvalTriple {
            triple_id: format!("t{i:03}"),
            sent_id: format!("s{}", i / 2),
            source_sentence: format!("Mening nummer {i} handlar om något."),
            question: format!("Vad handlar mening {i} om ?"),
            answer: "något".into(),
            origin: if i % 2 == 0 { Origin::Gold } else { Origin::Generated },
            set: if i < n / 2 { EvalSet::Dev } else { EvalSet::Test },
        })
        .collect()
}

fn write_triples(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("triples.ndjson");
    let body: String = eval_triples(n)
        .iter()
        .map(|t| serde_json::to_string(t).unwrap() + "\n")
        .collect();
    std::fs::write(&path, body).unwrap();
    path
}

struct Server {
    child: Child,
    base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn spawn(triples: &Path, store: &Path) -> Result<Server, String> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_depqg"))
        .args(["serve", "--bind", "127.0.0.1:0", "--seed", &SEED.to_string()])
        .arg("--triples")
        .arg(triples)
        .arg("--store")
        .arg(store)
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut seen = String::new();
    loop {
        let mut line = String::new();
        if stderr.read_line(&mut line).unwrap() == 0 {
            let status = child.wait().unwrap();
            return Err(format!("server exited ({status}): {seen}"));
        }
        if let Some(url) = line.split("listening on ").nth(1) {
            let base = url.trim().to_string();
            // keep draining so the child never blocks on a full pipe
            std::thread::spawn(move || for _ in stderr.lines() {});
            return Ok(Server { child, base });
        }
        seen.push_str(&line);
    }
}

fn all_scores(v: u8) -> Value {
    let m: BTreeMap<String, u8> = Criterion::ALL.iter().map(|c| (c.to_string(), v)).collect();
    json!(m)
}

async fn post(base: &str, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new()
        .post(format!("{base}/api/judgement"))
        .json(&body)
        .send()
        .await
        .unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap_or(Value::Null))
}

async fn get_json(url: String) -> (u16, Value) {
    let r = reqwest::get(url).await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap_or(Value::Null))
}

async fn export(base: &str) -> Vec<Value> {
    reqwest::get(format!("{base}/api/export"))
        .await
        .unwrap()
        .text()
        .await
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn ids_of(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn every_judge_gets_a_full_permutation() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 106);
    let s = spawn(&triples, &dir.path().join("store.ndjson")).unwrap();
    let sorted: Vec<String> = eval_triples(106).into_iter().map(|t| t.triple_id).collect();
    let mut orders = BTreeSet::new();
    for judge in ["anna", "bo", "cecilia", "david"] {
        let (status, v) = get_json(format!("{}/api/session/{judge}", s.base)).await;
        assert_eq!(status, 200);
        let order = ids_of(&v["triple_ids"]);
        let mut check = order.clone();
        check.sort();
        assert_eq!(check, sorted);
        assert_eq!(v["next"], json!(order[0]));
        // same judge, same order
        let (_, again) = get_json(format!("{}/api/session/{judge}", s.base)).await;
        assert_eq!(ids_of(&again["triple_ids"]), order);
        orders.insert(order);
    }
    assert_eq!(orders.len(), 4, "orders should differ between judges");
}

#[tokio::test]
async fn triple_view_carries_guidelines_and_criteria() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 4);
    let s = spawn(&triples, &dir.path().join("store.ndjson")).unwrap();
    let (status, v) = get_json(format!("{}/api/triple/t001", s.base)).await;
    assert_eq!(status, 200);
    assert_eq!(v["triple"]["question"], json!("Vad handlar mening 1 om ?"));
    assert!(!v["guidelines"]["sv"].as_str().unwrap().is_empty());
    assert!(!v["guidelines"]["en"].as_str().unwrap().is_empty());
    assert_eq!(v["criteria"].as_array().unwrap().len(), 9);
    let (status, _) = get_json(format!("{}/api/triple/nope", s.base)).await;
    assert_eq!(status, 404);
}

#[tokio::test]
async fn invalid_judgements_are_rejected() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 4);
    let store = dir.path().join("store.ndjson");
    let s = spawn(&triples, &store).unwrap();

    let mut five = all_scores(3);
    five["C4"] = json!(5);
    let mut zero = all_scores(3);
    zero["C9"] = json!(0);
    let mut missing = all_scores(3);
    missing.as_object_mut().unwrap().remove("C2");
    let mut extra = all_scores(3);
    extra["C10"] = json!(1);

    for (body, why) in [
        (json!({"judge_id": "a", "triple_id": "t000", "scores": five}), "score 5"),
        (json!({"judge_id": "a", "triple_id": "t000", "scores": zero}), "score 0"),
        (json!({"judge_id": "a", "triple_id": "t000", "scores": missing}), "missing criterion"),
        (json!({"judge_id": "a", "triple_id": "t000", "scores": extra}), "unknown criterion"),
        (json!({"judge_id": "a", "triple_id": "t999", "scores": all_scores(2)}), "unknown triple"),
        (json!({"judge_id": " ", "triple_id": "t000", "scores": all_scores(2)}), "empty judge"),
        (json!({"judge_id": "a", "scores": all_scores(2)}), "no triple id"),
        (json!({"judge_id": "a", "triple_id": "t000", "scores": "x"}), "scores not a map"),
    ] {
        let (status, _) = post(&s.base, body).await;
        assert_eq!(status, 422, "{why}");
    }
    assert!(export(&s.base).await.is_empty());
    assert_eq!(std::fs::read_to_string(&store).unwrap(), "");

    let (status, v) = post(
        &s.base,
        json!({"judge_id": "a", "triple_id": "t000", "scores": all_scores(4)}),
    )
    .await;
    assert_eq!(status, 201);
    assert_eq!(v["replaces_earlier"], json!(false));
}

#[tokio::test]
async fn resubmission_supersedes_in_export() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 4);
    let s = spawn(&triples, &dir.path().join("store.ndjson")).unwrap();
    for (judge, triple, v) in [("a", "t000", 1), ("a", "t001", 2), ("a", "t000", 3), ("b", "t000", 4)] {
        let (status, body) = post(
            &s.base,
            json!({"judge_id": judge, "triple_id": triple, "scores": all_scores(v)}),
        )
        .await;
        assert_eq!(status, 201);
        assert_eq!(body["replaces_earlier"], json!(judge == "a" && v == 3));
    }
    let lines = export(&s.base).await;
    let flags: Vec<bool> = lines.iter().map(|l| l["superseded"].as_bool().unwrap()).collect();
    assert_eq!(flags, [true, false, false, false]);
    let stamps: Vec<&str> = lines.iter().map(|l| l["timestamp"].as_str().unwrap()).collect();
    let parsed: Vec<chrono::DateTime<chrono::Utc>> = stamps.iter().map(|t| t.parse().unwrap()).collect();
    assert!(parsed.windows(2).all(|w| w[0] < w[1]));

    let (_, session) = get_json(format!("{}/api/session/a", s.base)).await;
    let mut done = ids_of(&session["completed"]);
    done.sort();
    assert_eq!(done, ["t000", "t001"]);
}

#[tokio::test]
async fn judgements_survive_a_hard_kill() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 10);
    let store = dir.path().join("store.ndjson");
    let mut s = spawn(&triples, &store).unwrap();
    let (_, before) = get_json(format!("{}/api/session/anna", s.base)).await;
    for t in ["t002", "t005", "t007"] {
        let (status, _) = post(&s.base, json!({"judge_id": "anna", "triple_id": t, "scores": all_scores(2)})).await;
        assert_eq!(status, 201);
    }
    // SIGKILL: no graceful shutdown, no flush at exit
    s.child.kill().unwrap();
    s.child.wait().unwrap();
    drop(s);

    let s = spawn(&triples, &store).unwrap();
    let lines = export(&s.base).await;
    assert_eq!(lines.len(), 3);
    let (_, after) = get_json(format!("{}/api/session/anna", s.base)).await;
    assert_eq!(after["triple_ids"], before["triple_ids"]);
    assert_eq!(ids_of(&after["completed"]).len(), 3);
    let (status, v) = post(&s.base, json!({"judge_id": "anna", "triple_id": "t005", "scores": all_scores(4)})).await;
    assert_eq!(status, 201);
    assert_eq!(v["replaces_earlier"], json!(true));
}

#[test]
fn corrupt_store_refuses_to_start() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 4);
    let store = dir.path().join("store.ndjson");
    let good = json!({
        "judge_id": "a", "triple_id": "t000", "scores": all_scores(2),
        "timestamp": "2024-01-01T00:00:00Z"
    })
    .to_string();

    let cases = [
        format!("{good}\n{}", &good[..good.len() / 2]),
        format!("{good}\nnot json\n"),
        format!("{}\n", good.replace("t000", "t999")),
        format!("{}\n", good.replace("\"C3\":2", "\"C3\":7")),
    ];
    for body in cases {
        std::fs::write(&store, &body).unwrap();
        let err = spawn(&triples, &store).err().expect("startup should fail");
        assert!(err.contains("corrupt store"), "{err}");
        // the file is left as it was
        assert_eq!(std::fs::read_to_string(&store).unwrap(), body);
    }
    std::fs::write(&store, format!("{good}\n")).unwrap();
    assert!(spawn(&triples, &store).is_ok());
}

#[tokio::test]
async fn export_feeds_agreement() {
    let dir = TempDir::new().unwrap();
    let triples = write_triples(dir.path(), 8);
    let s = spawn(&triples, &dir.path().join("store.ndjson")).unwrap();
    // dev/gold holds t000 and t002; judge b is constant on every criterion
    // there, and judge a first submits a score it later revises
    let a_first = [1, 4, 2, 3, 1, 2, 3, 4];
    let a_final = [1, 4, 2, 3, 4, 3, 2, 1];
    let b = [2, 2, 2, 2, 1, 2, 3, 4];
    for (i, v) in a_first.iter().enumerate() {
        post(&s.base, json!({"judge_id": "a", "triple_id": format!("t{i:03}"), "scores": all_scores(*v)})).await;
    }
    for (i, (va, vb)) in a_final.iter().zip(&b).enumerate() {
        let t = format!("t{i:03}");
        if va != &a_first[i] {
            post(&s.base, json!({"judge_id": "a", "triple_id": t, "scores": all_scores(*va)})).await;
        }
        post(&s.base, json!({"judge_id": "b", "triple_id": t, "scores": all_scores(*vb)})).await;
    }
    let body = reqwest::get(format!("{}/api/export", s.base)).await.unwrap().text().await.unwrap();
    let exported = dir.path().join("export.ndjson");
    std::fs::write(&exported, body).unwrap();

    let table = cmd_iaa(&exported, Some(&triples), None).unwrap();
    assert_eq!(table.judges, ["a", "b"]);
    assert_eq!(table.slices, ["dev/gold", "dev/gen", "test/gold", "test/gen"]);
    for c in Criterion::ALL {
        // dev/gold: a = (1, 2), b = (2, 2)
        let r = table.cell(c, "dev/gold").unwrap().result.unwrap();
        assert_eq!(r.gamma, Gamma::NotAvailable(2));
        // dev/gen: a = (4, 3), b = (2, 2)
        assert_eq!(table.cell(c, "dev/gen").unwrap().result.unwrap().gamma, Gamma::NotAvailable(2));
        // test/gold: a = (4, 2), b = (1, 3) is discordant
        assert_eq!(table.cell(c, "test/gold").unwrap().result.unwrap().gamma, Gamma::Value(-1.0));
        // test/gen: a = (3, 1), b = (2, 4)
        let r = table.cell(c, "test/gen").unwrap().result.unwrap();
        assert_eq!(r.gamma, Gamma::Value(-1.0));
        // no item agrees, so observed agreement is 0 and kappa = -1/3
        assert!((r.kappa + 1.0 / 3.0).abs() < 1e-12);
    }
    let tsv = table.to_tsv();
    assert!(tsv.contains("NA/2"), "{tsv}");
}
