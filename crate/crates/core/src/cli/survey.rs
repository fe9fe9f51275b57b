use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{input_err, read_file, tsv_rows, write_file, CliError};
use crate::generate::GenCandidate;
use crate::metrics::{Criterion, LIKERT_POINTS};

/// Instructions shown to judges, in the survey language.
pub const GUIDELINES_SV: &str = include_str!("../../data/guidelines_sv.txt");
pub const GUIDELINES_EN: &str = include_str!("../../data/guidelines_en.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Gold,
    Generated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSet {
    Dev,
    Test,
}

impl fmt::Display for EvalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalSet::Dev => "dev",
            EvalSet::Test => "test",
        })
    }
}

impl std::str::FromStr for EvalSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_lowercase().as_str() {
            "dev" => Ok(EvalSet::Dev),
            "test" => Ok(EvalSet::Test),
            other => Err(format!("unknown set {other:?} (expected dev or test)")),
        }
    }
}

/// A sentence with one QA-pair, as shown to a judge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTriple {
    pub triple_id: String,
    pub sent_id: String,
    pub source_sentence: String,
    pub question: String,
    pub answer: String,
    pub origin: Origin,
    pub set: EvalSet,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoreError {
    #[error("judge_id is empty")]
    EmptyJudge,
    #[error("unknown triple {0:?}")]
    UnknownTriple(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("missing score for {0}")]
    Missing(Criterion),
    #[error("{criterion}: score {score} outside 1..={max}", max = LIKERT_POINTS)]
    OutOfRange { criterion: Criterion, score: i64 },
}

/// One judge's scores for one triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgementRecord {
    pub judge_id: String,
    pub triple_id: String,
    pub scores: BTreeMap<Criterion, u8>,
    pub timestamp: DateTime<Utc>,
}

impl JudgementRecord {
    /// Validates raw scores keyed by criterion name.
    pub fn from_raw(
        judge_id: &str,
        triple_id: &str,
        raw: &BTreeMap<String, i64>,
        timestamp: DateTime<Utc>,
    ) -> Result<Self, ScoreError> {
        if judge_id.trim().is_empty() {
            return Err(ScoreError::EmptyJudge);
        }
        let mut scores = BTreeMap::new();
        for (k, &v) in raw {
            let criterion: Criterion = k
                .parse()
                .map_err(|_| ScoreError::UnknownCriterion(k.clone()))?;
            if !(1..=LIKERT_POINTS as i64).contains(&v) {
                return Err(ScoreError::OutOfRange { criterion, score: v });
            }
            scores.insert(criterion, v as u8);
        }
        if let Some(c) = Criterion::ALL.into_iter().find(|c| !scores.contains_key(c)) {
            return Err(ScoreError::Missing(c));
        }
        Ok(JudgementRecord {
            judge_id: judge_id.to_string(),
            triple_id: triple_id.to_string(),
            scores,
            timestamp,
        })
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        let raw: BTreeMap<String, i64> = self
            .scores
            .iter()
            .map(|(c, s)| (c.to_string(), *s as i64))
            .collect();
        Self::from_raw(&self.judge_id, &self.triple_id, &raw, self.timestamp).map(|_| ())
    }
}

/// Presentation order for one judge: a permutation of the sorted ids driven
/// by a ChaCha stream keyed on SHA-256 of (seed, judge_id).
pub fn judge_order(triple_ids: &[String], seed: u64, judge_id: &str) -> Vec<String> {
    let mut ids = triple_ids.to_vec();
    ids.sort();
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(judge_id.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    ids.shuffle(&mut ChaCha20Rng::from_seed(key));
    ids
}

/// One row of the gold TSV: `sent_id`, `set`, `sentence`, `question`, `answer`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldRow {
    pub sent_id: String,
    pub set: EvalSet,
    pub sentence: String,
    pub question: String,
    pub answer: String,
}

pub fn read_gold_tsv(path: &Path) -> Result<Vec<GoldRow>, CliError> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (line, cols) in tsv_rows(&text, "sent_id\t") {
        if cols.len() != 5 {
            return Err(input_err(
                path,
                line,
                format!(
                    "expected 5 columns (sent_id, set, sentence, question, answer), got {}",
                    cols.len()
                ),
            ));
        }
        rows.push(GoldRow {
            sent_id: cols[0].to_string(),
            set: cols[1].parse().map_err(|e: String| input_err(path, line, e))?,
            sentence: cols[2].to_string(),
            question: cols[3].to_string(),
            answer: cols[4].to_string(),
        });
    }
    Ok(rows)
}

fn read_ndjson<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| input_err(path, i + 1, e.to_string())))
        .collect()
}

/// Reads an evaluation set written by [`cmd_export_survey`]; ids must be unique.
pub fn read_eval_triples(path: &Path) -> Result<Vec<EvalTriple>, CliError> {
    let triples: Vec<EvalTriple> = read_ndjson(path)?;
    let mut seen = HashMap::new();
    for (i, t) in triples.iter().enumerate() {
        if let Some(prev) = seen.insert(t.triple_id.as_str(), i) {
            return Err(CliError::Failed(format!(
                "{}: triple id {:?} on records {} and {}",
                path.display(),
                t.triple_id,
                prev + 1,
                i + 1
            )));
        }
    }
    Ok(triples)
}

/// Pairs the top-ranked generated QA of every sentence with the first gold
/// QA of the same sentence, shuffles the pairs' members with `seed` and
/// numbers them in that order.
pub fn cmd_export_survey(
    gold_tsv: &Path,
    generated: &Path,
    seed: u64,
    out: &Path,
) -> Result<Vec<EvalTriple>, CliError> {
    let gold = read_gold_tsv(gold_tsv)?;
    let mut gold_by_id: HashMap<&str, &GoldRow> = HashMap::new();
    for g in &gold {
        gold_by_id.entry(g.sent_id.as_str()).or_insert(g);
    }

    let candidates: Vec<GenCandidate> = read_ndjson(generated)?;
    let mut order: Vec<&str> = Vec::new();
    let mut best: HashMap<&str, &GenCandidate> = HashMap::new();
    for c in &candidates {
        let score = c.score.unwrap_or(f64::NEG_INFINITY);
        match best.get(c.sent_id.as_str()) {
            None => {
                order.push(&c.sent_id);
                best.insert(&c.sent_id, c);
            }
            Some(b) if score > b.score.unwrap_or(f64::NEG_INFINITY) => {
                best.insert(&c.sent_id, c);
            }
            Some(_) => {}
        }
    }

    let mut triples = Vec::new();
    for sent_id in order {
        let Some(g) = gold_by_id.get(sent_id) else {
            log::warn!("generated sent_id {sent_id:?} has no gold QA-pair; skipped");
            continue;
        };
        let c = best[sent_id];
        for (origin, question, answer) in [
            (Origin::Gold, g.question.as_str(), g.answer.as_str()),
            (Origin::Generated, c.question.as_str(), c.answer.as_str()),
        ] {
            triples.push(EvalTriple {
                triple_id: String::new(),
                sent_id: sent_id.to_string(),
                source_sentence: g.sentence.clone(),
                question: question.to_string(),
                answer: answer.to_string(),
                origin,
                set: g.set,
            });
        }
    }
    triples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let width = triples.len().to_string().len().max(3);
    let mut ndjson = String::new();
    for (i, t) in triples.iter_mut().enumerate() {
        t.triple_id = format!("t{:0width$}", i + 1);
        ndjson.push_str(&serde_json::to_string(t).expect("triple serializes"));
        ndjson.push('\n');
    }
    write_file(out, &ndjson)?;
    Ok(triples)
}
