use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::survey::{read_eval_triples, EvalSet, Origin};
use super::{input_err, read_file, write_file, CliError};
use crate::metrics::{agreement, AgreementResult, Criterion, RatingMatrix, LIKERT_POINTS};

/// One line of a judgements file: either a full record with all nine
/// scores (as written by the survey store or export) or a single cell.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum JudgementInput {
    Record {
        judge_id: String,
        triple_id: String,
        scores: BTreeMap<Criterion, u8>,
        #[serde(default)]
        timestamp: Option<DateTime<Utc>>,
    },
    Cell {
        judge_id: String,
        triple_id: String,
        criterion: Criterion,
        score: u8,
        #[serde(default)]
        timestamp: Option<DateTime<Utc>>,
    },
}

type CellKey = (String, String, Criterion);

/// Reads a judgements file and resolves resubmissions: per judge, triple
/// and criterion the score with the latest timestamp wins (untimed lines
/// count as oldest, then later lines win).
pub fn read_judgements(path: &Path) -> Result<BTreeMap<CellKey, u8>, CliError> {
    let text = read_file(path)?;
    let mut best: HashMap<CellKey, (Option<DateTime<Utc>>, usize, u8)> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JudgementInput =
            serde_json::from_str(line).map_err(|e| input_err(path, i + 1, e.to_string()))?;
        let (judge, triple, cells, ts) = match rec {
            JudgementInput::Record {
                judge_id,
                triple_id,
                scores,
                timestamp,
            } => (judge_id, triple_id, scores.into_iter().collect::<Vec<_>>(), timestamp),
            JudgementInput::Cell {
                judge_id,
                triple_id,
                criterion,
                score,
                timestamp,
            } => (judge_id, triple_id, vec![(criterion, score)], timestamp),
        };
        for (c, s) in cells {
            if !(1..=LIKERT_POINTS).contains(&s) {
                return Err(input_err(path, i + 1, format!("{c}: score {s} outside 1..={LIKERT_POINTS}")));
            }
            let key = (judge.clone(), triple.clone(), c);
            let cand = (ts, i, s);
            match best.get(&key) {
                Some(prev) if (prev.0, prev.1) > (cand.0, cand.1) => {}
                _ => {
                    best.insert(key, cand);
                }
            }
        }
    }
    Ok(best.into_iter().map(|(k, (_, _, s))| (k, s)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaaCell {
    /// Items scored by every judge in this slice.
    pub items: usize,
    /// Absent when fewer than two items are shared.
    pub result: Option<AgreementResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaaRow {
    pub criterion: Criterion,
    pub cells: Vec<IaaCell>,
}

/// Per-criterion kappa and gamma, one column per slice of the evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaaTable {
    pub judges: Vec<String>,
    pub slices: Vec<String>,
    pub rows: Vec<IaaRow>,
}

impl IaaTable {
    pub fn cell(&self, criterion: Criterion, slice: &str) -> Option<&IaaCell> {
        let col = self.slices.iter().position(|s| s == slice)?;
        self.rows
            .iter()
            .find(|r| r.criterion == criterion)
            .map(|r| &r.cells[col])
    }

    /// Two lines per criterion (kappa, gamma); `-` marks slices without
    /// enough shared items.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("criterion\tstatistic\t{}\n", self.slices.join("\t"));
        for row in &self.rows {
            let label = format!("{} {}", row.criterion, row.criterion.arrow());
            let kappa: Vec<String> = row
                .cells
                .iter()
                .map(|c| c.result.map_or("-".into(), |r| format!("{:.2}", r.kappa)))
                .collect();
            let gamma: Vec<String> = row
                .cells
                .iter()
                .map(|c| c.result.map_or("-".into(), |r| r.gamma.to_string()))
                .collect();
            let _ = writeln!(out, "{label}\tkappa\t{}", kappa.join("\t"));
            let _ = writeln!(out, "{label}\tgamma\t{}", gamma.join("\t"));
        }
        out
    }
}

fn slice_name(set: EvalSet, origin: Origin) -> String {
    let o = match origin {
        Origin::Gold => "gold",
        Origin::Generated => "gen",
    };
    format!("{set}/{o}")
}

/// Agreement per criterion over the judgements in `store`. With `triples`,
/// items are split into dev/test by gold/generated columns; otherwise a
/// single `all` column is reported.
pub fn cmd_iaa(store: &Path, triples: Option<&Path>, out: Option<&Path>) -> Result<IaaTable, CliError> {
    let cells = read_judgements(store)?;
    let judges: Vec<String> = cells
        .keys()
        .map(|(j, _, _)| j.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if judges.len() < 2 {
        return Err(CliError::Failed(format!(
            "need judgements from at least two judges, found {}",
            judges.len()
        )));
    }
    let judged: BTreeSet<&str> = cells.keys().map(|(_, t, _)| t.as_str()).collect();

    let mut slices: Vec<(String, BTreeSet<String>)> = Vec::new();
    match triples {
        Some(path) => {
            let ts = read_eval_triples(path)?;
            for set in [EvalSet::Dev, EvalSet::Test] {
                for origin in [Origin::Gold, Origin::Generated] {
                    let ids = ts
                        .iter()
                        .filter(|t| t.set == set && t.origin == origin)
                        .map(|t| t.triple_id.clone())
                        .collect();
                    slices.push((slice_name(set, origin), ids));
                }
            }
            let known: BTreeSet<&str> = ts.iter().map(|t| t.triple_id.as_str()).collect();
            for id in judged.iter().filter(|id| !known.contains(*id)) {
                log::warn!("judged triple {id:?} is not in the evaluation set; ignored");
            }
        }
        None => slices.push(("all".into(), judged.iter().map(|s| s.to_string()).collect())),
    }

    let mut rows = Vec::new();
    let mut any_complete = false;
    for criterion in Criterion::ALL {
        let mut row = IaaRow {
            criterion,
            cells: Vec::new(),
        };
        for (_, ids) in &slices {
            let matrix: Vec<Vec<u8>> = ids
                .iter()
                .filter_map(|id| {
                    judges
                        .iter()
                        .map(|j| cells.get(&(j.clone(), id.clone(), criterion)).copied())
                        .collect::<Option<Vec<u8>>>()
                })
                .collect();
            let items = matrix.len();
            any_complete |= items > 0;
            let result = if items >= 2 {
                Some(agreement(&RatingMatrix::likert(matrix)?)?)
            } else {
                None
            };
            row.cells.push(IaaCell { items, result });
        }
        rows.push(row);
    }
    if !any_complete {
        return Err(CliError::Failed(
            "no item was scored by every judge; fewer than two complete raters".into(),
        ));
    }
    let table = IaaTable {
        judges,
        slices: slices.into_iter().map(|(n, _)| n).collect(),
        rows,
    };
    if let Some(out) = out {
        write_file(out, &table.to_tsv())?;
    }
    Ok(table)
}
