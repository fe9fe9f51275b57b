//! Command implementations behind the `depqg` binary, plus the survey service.
//!
//! Every `cmd_*` function is a plain library call: it reads its inputs from
//! disk, writes its outputs, and returns a report the caller can print.

mod iaa;
mod pipeline;
mod server;
mod survey;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ConfigError;
use crate::conllu::{parse_conllu, ConlluError, DepTree};
use crate::induce::{IdfError, TrainingTriple};
use crate::metrics::{AgreementError, MetricError};
use crate::rank::RankError;
use crate::template::TemplateFileError;

pub use iaa::{cmd_iaa, read_judgements, IaaCell, IaaRow, IaaTable, JudgementInput};
pub use pipeline::{
    cmd_build_models, cmd_generate, cmd_induce, cmd_metrics, cmd_stats, generate_for_tree,
    load_models, BuildModelsReport, GenerateReport, InduceReport, MetricsReport, SentenceOutput,
};
pub use server::{router, serve_on, serve_survey, SurveyState};
pub use survey::{
    cmd_export_survey, judge_order, read_eval_triples, read_gold_tsv, EvalSet, EvalTriple,
    GoldRow, JudgementRecord, Origin, ScoreError, GUIDELINES_EN, GUIDELINES_SV,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Conllu {
        path: PathBuf,
        #[source]
        source: ConlluError,
    },
    #[error("{path}: {source}")]
    Template {
        path: PathBuf,
        #[source]
        source: TemplateFileError,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: RankError,
    },
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Idf(#[from] IdfError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error("{path}:{line}: {msg}")]
    Input {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Failed(String),
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn input_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn load_conllu(path: &Path) -> Result<Vec<DepTree>, CliError> {
    parse_conllu(&read_file(path)?).map_err(|source| CliError::Conllu {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-blank, non-`#` lines of a TSV file with their 1-based line numbers.
/// A first line starting with `header` (case-insensitive) is skipped.
pub(crate) fn tsv_rows<'a>(text: &'a str, header: &str) -> Vec<(usize, Vec<&'a str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .filter(|(i, l)| !(*i == 1 && l.to_lowercase().starts_with(header)))
        .map(|(i, l)| (i, l.split('\t').collect()))
        .collect()
}

/// Outcome of pairing a triples TSV (`sent_id`, `question`, `answer`) with trees.
#[derive(Debug, Clone, Default)]
pub struct LoadedTriples {
    pub triples: Vec<TrainingTriple>,
    /// Rows whose sent_id has no tree.
    pub missing_trees: usize,
}

pub fn load_triples(triples_tsv: &Path, trees: &[DepTree]) -> Result<LoadedTriples, CliError> {
    let mut by_id: HashMap<&str, &DepTree> = HashMap::new();
    for t in trees {
        if by_id.contains_key(t.sent_id()) {
            log::warn!("duplicate sent_id {:?}; using the first tree", t.sent_id());
        } else {
            by_id.insert(t.sent_id(), t);
        }
    }
    let text = read_file(triples_tsv)?;
    let mut out = LoadedTriples::default();
    for (line, cols) in tsv_rows(&text, "sent_id\t") {
        if cols.len() != 3 {
            return Err(input_err(
                triples_tsv,
                line,
                format!("expected 3 columns (sent_id, question, answer), got {}", cols.len()),
            ));
        }
        match by_id.get(cols[0]) {
            Some(tree) => out
                .triples
                .push(TrainingTriple::new((*tree).clone(), cols[1], cols[2])),
            None => {
                log::warn!("{}:{line}: no tree for sent_id {:?}", triples_tsv.display(), cols[0]);
                out.missing_trees += 1;
            }
        }
    }
    Ok(out)
}
