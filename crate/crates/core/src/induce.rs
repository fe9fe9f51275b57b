//! Template induction from (sentence tree, question, answer) triples.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::conllu::DepTree;
use crate::stats::Summary;
use crate::template::{is_reserved, Attr, Template, TemplateExpr, TemplateSet};
use crate::text::{fold, is_punct, tokenize};

/// Default IDF ceiling above which an unmatched question word blocks induction.
pub const DEFAULT_THETA_CONTENT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTriple {
    pub tree: DepTree,
    pub question: String,
    pub answer: String,
}

impl TrainingTriple {
    pub fn new(tree: DepTree, question: &str, answer: &str) -> Self {
        TrainingTriple {
            tree,
            question: question.to_string(),
            answer: answer.to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdfError {
    #[error("cannot build IDF from an empty corpus")]
    EmptyCorpus,
}

/// Document frequencies keyed by case-folded lemma and form.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfModel {
    doc_freq: BTreeMap<String, u32>,
    doc_count: u32,
}

impl IdfModel {
    pub fn from_counts(doc_freq: BTreeMap<String, u32>, doc_count: u32) -> Result<Self, IdfError> {
        if doc_count == 0 {
            return Err(IdfError::EmptyCorpus);
        }
        Ok(IdfModel {
            doc_freq,
            doc_count,
        })
    }

    pub fn doc_count(&self) -> u32 {
        self.doc_count
    }

    pub fn doc_freq(&self) -> &BTreeMap<String, u32> {
        &self.doc_freq
    }

    /// `ln(N / df)`; unseen words get `ln(N / 0.5)`.
    pub fn idf(&self, word: &str) -> f64 {
        let n = self.doc_count as f64;
        match self.doc_freq.get(&fold(word)) {
            Some(&df) if df > 0 => (n / df as f64).ln(),
            _ => (n / 0.5).ln(),
        }
    }
}

/// Builds the IDF table; each inner slice is one document.
pub fn build_idf<D: AsRef<[T]>, T: AsRef<DepTree>>(documents: &[D]) -> Result<IdfModel, IdfError> {
    if documents.is_empty() {
        return Err(IdfError::EmptyCorpus);
    }
    let mut doc_freq: BTreeMap<String, u32> = BTreeMap::new();
    for doc in documents {
        let mut seen = std::collections::BTreeSet::new();
        for tree in doc.as_ref() {
            for tok in tree.as_ref().tokens() {
                seen.insert(fold(&tok.lemma));
                seen.insert(fold(&tok.form));
            }
        }
        for w in seen {
            *doc_freq.entry(w).or_default() += 1;
        }
    }
    IdfModel::from_counts(doc_freq, documents.len() as u32)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerLocation {
    /// Token ids covered by the answer, inclusive.
    pub span: RangeInclusive<u32>,
    /// Node whose subtree yield is exactly the span.
    pub covering: Option<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InductionError {
    #[error("answer {0:?} not found as a contiguous token sequence")]
    AlignmentFailure(String),
    #[error("question word {0:?} would be baked into the template as a literal")]
    ContentLiteral(String),
    #[error("question word {0:?} cannot be written as a literal")]
    Unrepresentable(String),
    #[error("empty question")]
    EmptyQuestion,
}

impl InductionError {
    pub fn is_alignment(&self) -> bool {
        matches!(self, InductionError::AlignmentFailure(_))
    }
}

/// Finds the leftmost case-insensitive occurrence of `answer` among the tree's forms.
pub fn locate_answer(tree: &DepTree, answer: &str) -> Result<AnswerLocation, InductionError> {
    let needle: Vec<String> = tokenize(answer).iter().map(|t| fold(t)).collect();
    let forms: Vec<String> = tree.tokens().iter().map(|t| fold(&t.form)).collect();
    if needle.is_empty() || needle.len() > forms.len() {
        return Err(InductionError::AlignmentFailure(answer.to_string()));
    }
    let start = forms
        .windows(needle.len())
        .position(|w| w == needle.as_slice())
        .ok_or_else(|| InductionError::AlignmentFailure(answer.to_string()))?;
    let first = start as u32 + 1;
    let last = first + needle.len() as u32 - 1;
    let covering = (first..=last).find(|&id| {
        let y = tree.subtree_yield(id);
        y.tokens.len() == needle.len()
            && y.tokens.first().map(|t| t.id) == Some(first)
            && !y.discontinuous
    });
    Ok(AnswerLocation {
        span: first..=last,
        covering,
    })
}

fn hint_for(tree: &DepTree, id: u32) -> Option<u32> {
    (tree.root().id != id).then_some(id)
}

fn subtree_expr(tree: &DepTree, id: u32) -> TemplateExpr {
    TemplateExpr::subtree(tree.path_to(id), hint_for(tree, id))
}

fn node_expr(tree: &DepTree, id: u32, attr: Attr) -> TemplateExpr {
    TemplateExpr::node(tree.path_to(id), attr, hint_for(tree, id))
}

/// Expresses one triple in terms of its source tree.
///
/// The question is covered left to right: the longest span (two or more
/// tokens) equal to a complete subtree yield becomes `<...>`, a single token
/// matching a tree token by form (then by lemma) becomes `[...]`, anything else
/// stays a literal. Non-punctuation literals with IDF above `theta_content`
/// abort the induction.
pub fn induce_pair(
    triple: &TrainingTriple,
    idf: &IdfModel,
    theta_content: f64,
) -> Result<Template, InductionError> {
    let tree = &triple.tree;
    let q_raw = tokenize(&triple.question);
    if q_raw.is_empty() {
        return Err(InductionError::EmptyQuestion);
    }
    let q: Vec<String> = q_raw.iter().map(|t| fold(t)).collect();
    let location = locate_answer(tree, &triple.answer)?;

    let yields: Vec<(u32, Vec<String>)> = tree
        .tokens()
        .iter()
        .map(|t| {
            let y = tree.subtree_yield(t.id);
            (t.id, y.tokens.iter().map(|x| fold(&x.form)).collect())
        })
        .filter(|(_, forms): &(u32, Vec<String>)| forms.len() >= 2)
        .collect();

    let mut question = Vec::new();
    let mut i = 0;
    while i < q.len() {
        let best = yields
            .iter()
            .filter(|(_, forms)| i + forms.len() <= q.len() && q[i..i + forms.len()] == forms[..])
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)));
        if let Some((id, forms)) = best {
            question.push(subtree_expr(tree, *id));
            i += forms.len();
            continue;
        }
        let word = &q[i];
        if let Some(t) = tree.tokens().iter().find(|t| fold(&t.form) == *word) {
            question.push(node_expr(tree, t.id, Attr::Form));
        } else if let Some(t) = tree.tokens().iter().find(|t| fold(&t.lemma) == *word) {
            question.push(node_expr(tree, t.id, Attr::Lemma));
        } else {
            let raw = &q_raw[i];
            if raw.chars().any(is_reserved) {
                return Err(InductionError::Unrepresentable(raw.clone()));
            }
            if !is_punct(raw) && idf.idf(raw) > theta_content {
                return Err(InductionError::ContentLiteral(raw.clone()));
            }
            question.push(TemplateExpr::Literal(raw.clone()));
        }
        i += 1;
    }

    let answer = match location.covering {
        Some(id) => vec![subtree_expr(tree, id)],
        None => location
            .span
            .map(|id| node_expr(tree, id, Attr::Form))
            .collect(),
    };

    Ok(Template::new(question, answer)
        .with_root_upos(Some(tree.root().upos.clone()))
        .with_source(tree.sent_id()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InductionReport {
    pub triples: usize,
    pub successes: usize,
    pub alignment_failures: usize,
    pub induction_failures: usize,
}

/// Induces templates over all triples (in parallel) and merges them in input
/// order; failures are counted, not raised.
pub fn induce_all(
    triples: &[TrainingTriple],
    idf: &IdfModel,
    theta_content: f64,
) -> (TemplateSet, InductionReport) {
    let mut set = TemplateSet::new();
    let mut report = InductionReport {
        triples: triples.len(),
        ..Default::default()
    };
    let results: Vec<_> = triples
        .par_iter()
        .map(|t| induce_pair(t, idf, theta_content))
        .collect();
    for (triple, result) in triples.iter().zip(results) {
        match result {
            Ok(t) => {
                report.successes += 1;
                set.insert(t);
            }
            Err(e) if e.is_alignment() => report.alignment_failures += 1,
            Err(e) => {
                log::debug!("{}: {e}", triple.tree.sent_id());
                report.induction_failures += 1;
            }
        }
    }
    (set, report)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TemplateStats {
    pub count: usize,
    pub support: Summary,
}

pub fn template_stats(ts: &TemplateSet) -> TemplateStats {
    let support = Summary::of_counts(ts.iter().map(|t| t.support as usize));
    TemplateStats {
        count: ts.len(),
        support,
    }
}
