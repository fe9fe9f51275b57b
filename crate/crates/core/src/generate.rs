//! Overgeneration: fire every template at a sentence tree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{DepTree, PathError};
use crate::template::{eval_expr, Template, TemplateExpr, TemplateSet};
use crate::text::fold;

/// One generated QA-pair with its provenance and ranking information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenCandidate {
    pub sent_id: String,
    pub template_id: usize,
    pub question: String,
    pub answer: String,
    /// Lower-cased forms of the source sentence joined by spaces.
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub score: Option<f64>,
    #[serde(default)]
    pub score_parts: BTreeMap<String, f64>,
}

impl GenCandidate {
    pub fn question_tokens(&self) -> impl Iterator<Item = &str> {
        self.question.split_whitespace()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error(transparent)]
    NoMatch(#[from] PathError),
    #[error("template produced an empty answer")]
    EmptyAnswer,
    #[error("template produced an empty question")]
    EmptyQuestion,
}

/// True iff every guarded path resolves and the root UPOS (if recorded) matches.
pub fn guard_matches(t: &Template, tree: &DepTree) -> bool {
    if let Some(upos) = &t.guard.root_upos {
        if &tree.root().upos != upos {
            return false;
        }
    }
    t.guard
        .required
        .iter()
        .all(|p| tree.resolve_path(p, None).is_ok())
}

fn eval_side(exprs: &[TemplateExpr], tree: &DepTree) -> Result<String, PathError> {
    let parts = exprs
        .iter()
        .map(|e| eval_expr(e, tree))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fold(&parts.join(" ")))
}

/// Evaluates both sides of `t` on `tree`; output is lower-cased and space-joined.
pub fn apply_template(
    t: &Template,
    template_id: usize,
    tree: &DepTree,
) -> Result<GenCandidate, ApplyError> {
    let question = eval_side(&t.question, tree)?;
    let answer = eval_side(&t.answer, tree)?;
    if question.trim().is_empty() {
        return Err(ApplyError::EmptyQuestion);
    }
    if answer.trim().is_empty() {
        return Err(ApplyError::EmptyAnswer);
    }
    let source = fold(
        &tree
            .tokens()
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" "),
    );
    Ok(GenCandidate {
        sent_id: tree.sent_id().to_string(),
        template_id,
        question,
        answer,
        source,
        score: None,
        score_parts: BTreeMap::new(),
    })
}

/// Result of firing a whole template set at one tree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overgeneration {
    pub candidates: Vec<GenCandidate>,
    /// Templates whose guard held but whose evaluation failed.
    pub dropped: usize,
}

pub fn overgenerate_counted(ts: &TemplateSet, tree: &DepTree) -> Overgeneration {
    let mut out = Overgeneration::default();
    for (id, t) in ts.iter().enumerate() {
        if !guard_matches(t, tree) {
            continue;
        }
        match apply_template(t, id, tree) {
            Ok(c) => out.candidates.push(c),
            Err(e) => {
                log::debug!("template {id} on {}: {e}", tree.sent_id());
                out.dropped += 1;
            }
        }
    }
    out
}

/// All successful applications in template order; duplicates kept.
pub fn overgenerate(ts: &TemplateSet, tree: &DepTree) -> Vec<GenCandidate> {
    overgenerate_counted(ts, tree).candidates
}
