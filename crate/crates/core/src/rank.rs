//! Ranking and filtering of overgenerated candidates.
//!
//! Two count-based models score a question: a morphological n-gram model over
//! `UPOS|FEATS` signatures and a question-word model conditioned on the
//! relation of the answer node. Both use additive smoothing. The score is
//!
//! ```text
//! w_morph * mean_i log P(sig_i | sig_{i-n+1..i-1}) + w_qword * log P(first word | answer relation)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{DepTree, Token};
use crate::generate::GenCandidate;
use crate::induce::{locate_answer, IdfModel, TrainingTriple};
use crate::stats::Summary;
use crate::template::{Template, TemplateExpr};
use crate::text::{fold, tokenize};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const OOV: &str = "<unk>";
/// Condition used when an answer has no tree-backed expression.
pub const NO_CONDITION: &str = "<none>";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("cannot build a model from an empty treebank")]
    EmptyTreebank,
    #[error("n-gram order must be at least 2, got {0}")]
    BadOrder(usize),
    #[error("smoothing constant must be positive, got {0}")]
    BadAlpha(f64),
    #[error("ranking weights must be non-negative and not both zero")]
    BadWeights,
    #[error("cannot score an empty question")]
    EmptyQuestion,
    #[error("candidate does not come from this tree: {0}")]
    Evaluation(String),
    #[error("model file line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// Additively smoothed n-gram model over morphological signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphNgramModel {
    order: usize,
    alpha: f64,
    ngrams: BTreeMap<Vec<String>, u64>,
    contexts: BTreeMap<Vec<String>, u64>,
    /// Predictable events: observed signatures plus the end marker.
    vocab: BTreeSet<String>,
    /// Case-folded form to signature counts, used to tag literal words.
    lexicon: BTreeMap<String, BTreeMap<String, u64>>,
}

impl MorphNgramModel {
    fn from_parts(
        order: usize,
        alpha: f64,
        ngrams: BTreeMap<Vec<String>, u64>,
        lexicon: BTreeMap<String, BTreeMap<String, u64>>,
    ) -> Self {
        let mut contexts = BTreeMap::new();
        let mut vocab = BTreeSet::new();
        for (g, c) in &ngrams {
            *contexts.entry(g[..g.len() - 1].to_vec()).or_insert(0) += c;
            vocab.insert(g[g.len() - 1].clone());
        }
        MorphNgramModel {
            order,
            alpha,
            ngrams,
            contexts,
            vocab,
            lexicon,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn ngram_count(&self, gram: &[&str]) -> u64 {
        let key: Vec<String> = gram.iter().map(|s| s.to_string()).collect();
        self.ngrams.get(&key).copied().unwrap_or(0)
    }

    pub fn ngrams(&self) -> &BTreeMap<Vec<String>, u64> {
        &self.ngrams
    }

    /// Number of outcomes the distribution ranges over, the OOV symbol included.
    pub fn outcome_count(&self) -> usize {
        self.vocab.len() + 1
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    /// `P(event | history)`; `history` must hold `order - 1` symbols.
    pub fn prob(&self, history: &[&str], event: &str) -> f64 {
        let event = if self.vocab.contains(event) { event } else { OOV };
        let mut key: Vec<String> = history.iter().map(|s| s.to_string()).collect();
        let ctx = self.contexts.get(&key).copied().unwrap_or(0) as f64;
        key.push(event.to_string());
        let c = self.ngrams.get(&key).copied().unwrap_or(0) as f64;
        (c + self.alpha) / (ctx + self.alpha * self.outcome_count() as f64)
    }

    /// Log-probability of each signature given its padded history (no end marker).
    pub fn log_probs(&self, sigs: &[String]) -> Vec<f64> {
        let mut padded: Vec<&str> = vec![BOS; self.order - 1];
        padded.extend(sigs.iter().map(String::as_str));
        (0..sigs.len())
            .map(|i| {
                let hist = &padded[i..i + self.order - 1];
                self.prob(hist, padded[i + self.order - 1]).ln()
            })
            .collect()
    }

    /// Signature a literal word most often carries in the treebank.
    pub fn literal_signature(&self, word: &str) -> String {
        self.lexicon
            .get(&fold(word))
            .and_then(|m| m.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))))
            .map(|(s, _)| s.clone())
            .unwrap_or_else(|| OOV.to_string())
    }
}

/// Counts signature n-grams with `n - 1` begin markers and one end marker per sentence.
pub fn build_morph_model<T: AsRef<DepTree>>(
    treebank: &[T],
    n: usize,
    alpha: f64,
) -> Result<MorphNgramModel, RankError> {
    if n < 2 {
        return Err(RankError::BadOrder(n));
    }
    if !(alpha > 0.0) {
        return Err(RankError::BadAlpha(alpha));
    }
    if treebank.is_empty() {
        return Err(RankError::EmptyTreebank);
    }
    let mut ngrams: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    let mut lexicon: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for tree in treebank {
        let tree = tree.as_ref();
        let mut seq: Vec<String> = vec![BOS.to_string(); n - 1];
        for tok in tree.tokens() {
            let sig = tok.morph_signature();
            *lexicon
                .entry(fold(&tok.form))
                .or_default()
                .entry(sig.clone())
                .or_insert(0) += 1;
            seq.push(sig);
        }
        seq.push(EOS.to_string());
        for w in seq.windows(n) {
            *ngrams.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(MorphNgramModel::from_parts(n, alpha, ngrams, lexicon))
}

/// Smoothed distribution of a question's first word given the answer's relation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionWordModel {
    alpha: f64,
    counts: BTreeMap<String, BTreeMap<String, u64>>,
    totals: BTreeMap<String, u64>,
    vocab: BTreeSet<String>,
}

impl QuestionWordModel {
    pub fn from_counts(counts: BTreeMap<String, BTreeMap<String, u64>>, alpha: f64) -> Self {
        let totals = counts
            .iter()
            .map(|(c, m)| (c.clone(), m.values().sum()))
            .collect();
        let vocab = counts.values().flat_map(|m| m.keys().cloned()).collect();
        QuestionWordModel {
            alpha,
            counts,
            totals,
            vocab,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn counts(&self) -> &BTreeMap<String, BTreeMap<String, u64>> {
        &self.counts
    }

    /// Observed first words plus the OOV symbol.
    pub fn outcome_count(&self) -> usize {
        self.vocab.len() + 1
    }

    pub fn prob(&self, word: &str, condition: &str) -> f64 {
        let word = fold(word);
        let c = self
            .counts
            .get(condition)
            .and_then(|m| m.get(&word))
            .copied()
            .unwrap_or(0) as f64;
        let total = self.totals.get(condition).copied().unwrap_or(0) as f64;
        (c + self.alpha) / (total + self.alpha * self.outcome_count() as f64)
    }
}

/// Relation of the answer node in a training triple: the covering node's,
/// else the leftmost answer token's.
pub fn answer_condition(tree: &DepTree, answer: &str) -> Option<String> {
    let loc = locate_answer(tree, answer).ok()?;
    let id = loc.covering.unwrap_or(*loc.span.start());
    tree.token(id).map(|t| t.deprel.clone())
}

pub fn build_qword_model(triples: &[TrainingTriple], alpha: f64) -> Result<QuestionWordModel, RankError> {
    if !(alpha > 0.0) {
        return Err(RankError::BadAlpha(alpha));
    }
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for tr in triples {
        let Some(first) = tokenize(&tr.question).into_iter().next() else {
            continue;
        };
        let Some(cond) = answer_condition(&tr.tree, &tr.answer) else {
            continue;
        };
        *counts
            .entry(cond)
            .or_default()
            .entry(fold(&first))
            .or_insert(0) += 1;
    }
    Ok(QuestionWordModel::from_counts(counts, alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub morph: f64,
    pub qword: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            morph: 1.0,
            qword: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankModels {
    pub idf: Option<IdfModel>,
    pub morph: MorphNgramModel,
    pub qword: QuestionWordModel,
    weights: Weights,
}

impl RankModels {
    pub fn new(
        idf: Option<IdfModel>,
        morph: MorphNgramModel,
        qword: QuestionWordModel,
        weights: Weights,
    ) -> Result<Self, RankError> {
        let valid = weights.morph >= 0.0
            && weights.qword >= 0.0
            && (weights.morph > 0.0 || weights.qword > 0.0);
        if !valid {
            return Err(RankError::BadWeights);
        }
        Ok(RankModels {
            idf,
            morph,
            qword,
            weights,
        })
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }
}

/// Signature of every question token: tree-backed tokens carry their own,
/// literals take their most frequent treebank signature.
pub fn question_signatures(
    t: &Template,
    tree: &DepTree,
    morph: &MorphNgramModel,
) -> Result<Vec<String>, RankError> {
    let mut sigs = Vec::new();
    for e in &t.question {
        match e {
            TemplateExpr::Literal(w) => sigs.push(morph.literal_signature(w)),
            _ => {
                let toks: Vec<&Token> = e
                    .tokens(tree)
                    .map_err(|err| RankError::Evaluation(err.to_string()))?;
                sigs.extend(toks.iter().map(|t| t.morph_signature()));
            }
        }
    }
    Ok(sigs)
}

/// Relation of the node behind the first tree-backed answer expression.
pub fn template_answer_condition(t: &Template, tree: &DepTree) -> String {
    t.answer
        .iter()
        .find_map(|e| {
            let toks = e.tokens(tree).ok()?;
            match e {
                TemplateExpr::Subtree { path, hint } => {
                    tree.resolve_path(path, *hint).ok().map(|n| n.deprel.clone())
                }
                _ => toks.first().map(|t| t.deprel.clone()),
            }
        })
        .unwrap_or_else(|| NO_CONDITION.to_string())
}

/// Scores `c` in place and returns the score.
pub fn score_candidate(
    c: &mut GenCandidate,
    tree: &DepTree,
    t: &Template,
    m: &RankModels,
) -> Result<f64, RankError> {
    let sigs = question_signatures(t, tree, &m.morph)?;
    let first = c.question_tokens().next().ok_or(RankError::EmptyQuestion)?;
    if sigs.is_empty() {
        return Err(RankError::EmptyQuestion);
    }
    let lps = m.morph.log_probs(&sigs);
    let morph = lps.iter().sum::<f64>() / lps.len() as f64;
    let cond = template_answer_condition(t, tree);
    let qword = m.qword.prob(first, &cond).ln();
    let w = m.weights;
    let score = w.morph * morph + w.qword * qword;
    c.score_parts.insert("morph".into(), morph);
    c.score_parts.insert("qword".into(), qword);
    c.score = Some(score);
    Ok(score)
}

/// Individually switchable rules of the basic filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterToggles {
    pub min_question_tokens: bool,
    pub degenerate_answer: bool,
    pub answer_in_question: bool,
    pub dedup: bool,
}

impl Default for FilterToggles {
    fn default() -> Self {
        FilterToggles {
            min_question_tokens: true,
            degenerate_answer: true,
            answer_in_question: true,
            dedup: true,
        }
    }
}

const MIN_QUESTION_TOKENS: usize = 3;

fn contains_tokens(haystack: &str, needle: &str) -> bool {
    let h: Vec<&str> = haystack.split_whitespace().collect();
    let n: Vec<&str> = needle.split_whitespace().collect();
    !n.is_empty() && n.len() <= h.len() && h.windows(n.len()).any(|w| w == n.as_slice())
}

fn score_of(c: &GenCandidate) -> f64 {
    c.score.unwrap_or(f64::NEG_INFINITY)
}

/// Basic filtering with every rule enabled.
pub fn basic_filter(cs: Vec<GenCandidate>) -> Vec<GenCandidate> {
    basic_filter_with(cs, FilterToggles::default())
}

/// Drops short questions, empty or whole-sentence answers, questions that
/// contain their answer, and duplicate pairs (keeping the best scored).
pub fn basic_filter_with(cs: Vec<GenCandidate>, rules: FilterToggles) -> Vec<GenCandidate> {
    let kept: Vec<GenCandidate> = cs
        .into_iter()
        .filter(|c| {
            if rules.min_question_tokens && c.question_tokens().count() < MIN_QUESTION_TOKENS {
                return false;
            }
            if rules.degenerate_answer
                && (c.answer.trim().is_empty() || c.answer.trim() == c.source.trim())
            {
                return false;
            }
            !(rules.answer_in_question && contains_tokens(&c.question, &c.answer))
        })
        .collect();
    if !rules.dedup {
        return kept;
    }
    let mut best: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (i, c) in kept.iter().enumerate() {
        best.entry((c.question.as_str(), c.answer.as_str()))
            .and_modify(|b| {
                if score_of(c) > score_of(&kept[*b]) {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let survivors: BTreeSet<usize> = best.into_values().collect();
    kept.into_iter()
        .enumerate()
        .filter(|(i, _)| survivors.contains(i))
        .map(|(_, c)| c)
        .collect()
}

/// Keeps candidates scoring at least the mean score of the group.
pub fn mean_filter(cs: Vec<GenCandidate>) -> Vec<GenCandidate> {
    if cs.is_empty() {
        return cs;
    }
    let scores: Vec<f64> = cs.iter().map(|c| c.score.unwrap_or(0.0)).collect();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // rounding can push the computed mean outside [min, max]
    let mean = (scores.iter().sum::<f64>() / scores.len() as f64).clamp(lo, hi);
    cs.into_iter()
        .zip(scores)
        .filter(|(_, s)| *s >= mean)
        .map(|(c, _)| c)
        .collect()
}

/// Candidate counts of one source sentence at each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub generated: usize,
    pub after_basic: usize,
    pub after_mean: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageSummary {
    pub total: usize,
    /// Source sentences with at least one candidate at this stage.
    pub sentences_with_any: usize,
    pub per_sentence: Summary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GenerationStats {
    pub sentences: usize,
    pub set_size: usize,
    pub generated: StageSummary,
    pub after_basic: StageSummary,
    pub after_mean: StageSummary,
    /// Sentences surviving mean filtering as a percentage of the set.
    pub after_mean_pct: f64,
}

fn stage(counts: &[usize]) -> StageSummary {
    StageSummary {
        total: counts.iter().sum(),
        sentences_with_any: counts.iter().filter(|&&c| c > 0).count(),
        per_sentence: Summary::of_counts(counts.iter().copied()),
    }
}

/// Table-style statistics over the per-sentence stage counts. `set_size`
/// defaults to the number of sentences.
pub fn generation_stats(
    per_sentence: &BTreeMap<String, StageCounts>,
    set_size: Option<usize>,
) -> GenerationStats {
    let g: Vec<usize> = per_sentence.values().map(|s| s.generated).collect();
    let b: Vec<usize> = per_sentence.values().map(|s| s.after_basic).collect();
    let m: Vec<usize> = per_sentence.values().map(|s| s.after_mean).collect();
    let set_size = set_size.unwrap_or(per_sentence.len());
    let after_mean = stage(&m);
    let after_mean_pct = if set_size == 0 {
        0.0
    } else {
        100.0 * after_mean.sentences_with_any as f64 / set_size as f64
    };
    GenerationStats {
        sentences: per_sentence.len(),
        set_size,
        generated: stage(&g),
        after_basic: stage(&b),
        after_mean,
        after_mean_pct,
    }
}

// ---- model files ----

const IDF_HEADER: &str = "#depqg-idf v1";
const MORPH_HEADER: &str = "#depqg-morph v1";
const QWORD_HEADER: &str = "#depqg-qword v1";

fn format_err(line: usize, msg: impl Into<String>) -> RankError {
    RankError::Format {
        line,
        msg: msg.into(),
    }
}

fn body_lines<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>, RankError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(header) {
        return Err(format_err(1, format!("expected header {header:?}")));
    }
    Ok(lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| (i + 2, l.split('\t').collect())))
}

fn parse_count(s: &str, line: usize) -> Result<u64, RankError> {
    s.parse()
        .map_err(|_| format_err(line, format!("bad count {s:?}")))
}

pub fn write_idf(m: &IdfModel) -> String {
    let mut out = format!("{IDF_HEADER}\ndocs\t{}\n", m.doc_count());
    for (w, df) in m.doc_freq() {
        let _ = writeln!(out, "df\t{w}\t{df}");
    }
    out
}

pub fn read_idf(text: &str) -> Result<IdfModel, RankError> {
    let mut docs = None;
    let mut df = BTreeMap::new();
    for (line, cols) in body_lines(text, IDF_HEADER)? {
        match cols.as_slice() {
            ["docs", n] => docs = Some(parse_count(n, line)? as u32),
            ["df", w, n] => {
                df.insert(w.to_string(), parse_count(n, line)? as u32);
            }
            _ => return Err(format_err(line, "unexpected record")),
        }
    }
    let docs = docs.ok_or_else(|| format_err(1, "missing docs record"))?;
    IdfModel::from_counts(df, docs).map_err(|e| format_err(1, e.to_string()))
}

pub fn write_morph(m: &MorphNgramModel) -> String {
    let mut out = format!("{MORPH_HEADER}\norder\t{}\n", m.order);
    for (g, c) in &m.ngrams {
        let _ = writeln!(out, "ngram\t{}\t{c}", g.join("\t"));
    }
    for (form, sigs) in &m.lexicon {
        for (s, c) in sigs {
            let _ = writeln!(out, "lex\t{form}\t{s}\t{c}");
        }
    }
    out
}

pub fn read_morph(text: &str, alpha: f64) -> Result<MorphNgramModel, RankError> {
    let mut order = None;
    let mut ngrams = BTreeMap::new();
    let mut lexicon: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for (line, cols) in body_lines(text, MORPH_HEADER)? {
        match cols.as_slice() {
            ["order", n] => order = Some(parse_count(n, line)? as usize),
            ["ngram", rest @ ..] => {
                let n = order.ok_or_else(|| format_err(line, "ngram before order"))?;
                if rest.len() != n + 1 {
                    return Err(format_err(line, format!("expected {n} symbols and a count")));
                }
                let count = parse_count(rest[n], line)?;
                ngrams.insert(rest[..n].iter().map(|s| s.to_string()).collect(), count);
            }
            ["lex", form, sig, n] => {
                lexicon
                    .entry(form.to_string())
                    .or_default()
                    .insert(sig.to_string(), parse_count(n, line)?);
            }
            _ => return Err(format_err(line, "unexpected record")),
        }
    }
    let order = order.ok_or_else(|| format_err(1, "missing order record"))?;
    if order < 2 {
        return Err(RankError::BadOrder(order));
    }
    Ok(MorphNgramModel::from_parts(order, alpha, ngrams, lexicon))
}

pub fn write_qword(m: &QuestionWordModel) -> String {
    let mut out = format!("{QWORD_HEADER}\n");
    for (cond, words) in &m.counts {
        for (w, c) in words {
            let _ = writeln!(out, "event\t{cond}\t{w}\t{c}");
        }
    }
    out
}

pub fn read_qword(text: &str, alpha: f64) -> Result<QuestionWordModel, RankError> {
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for (line, cols) in body_lines(text, QWORD_HEADER)? {
        match cols.as_slice() {
            ["event", cond, w, n] => {
                counts
                    .entry(cond.to_string())
                    .or_default()
                    .insert(w.to_string(), parse_count(n, line)?);
            }
            _ => return Err(format_err(line, "unexpected record")),
        }
    }
    Ok(QuestionWordModel::from_counts(counts, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{parse_conllu, Token};
    use crate::template::parse_template_line;
    use approx::assert_relative_eq;

    fn toy(sigs: &[&str]) -> DepTree {
        let toks = sigs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let id = i as u32 + 1;
                let (head, rel) = if id == 1 { (0, "root") } else { (1, "dep") };
                Token::new(id, &format!("w{id}"), "x", s, head, rel)
            })
            .collect();
        DepTree::new("toy", "", toks).unwrap()
    }

    #[test]
    fn two_token_sentence_gives_three_trigrams() {
        let m = build_morph_model(&[toy(&["A", "B"])], 3, 1.0).unwrap();
        let total: u64 = m.ngrams().values().sum();
        assert_eq!(total, 3);
        assert_eq!(m.ngram_count(&[BOS, BOS, "A|_"]), 1);
        assert_eq!(m.ngram_count(&[BOS, "A|_", "B|_"]), 1);
        assert_eq!(m.ngram_count(&["A|_", "B|_", EOS]), 1);
    }

    #[test]
    fn builder_rejects_bad_input() {
        let empty: Vec<DepTree> = Vec::new();
        assert_eq!(build_morph_model(&empty, 3, 1.0), Err(RankError::EmptyTreebank));
        assert_eq!(build_morph_model(&[toy(&["A"])], 1, 1.0), Err(RankError::BadOrder(1)));
        assert_eq!(build_morph_model(&[toy(&["A"])], 3, 0.0), Err(RankError::BadAlpha(0.0)));
    }

    #[test]
    fn observed_beats_unobserved() {
        let m = build_morph_model(&[toy(&["A", "B"])], 3, 1.0).unwrap();
        let seen = m.prob(&[BOS, "A|_"], "B|_");
        let unseen = m.prob(&[BOS, "A|_"], "A|_");
        assert!(seen > unseen);
        assert_relative_eq!(m.prob(&[BOS, "A|_"], "C|_"), unseen);
    }

    #[test]
    fn distribution_sums_to_one() {
        let m = build_morph_model(&[toy(&["A", "B", "A"]), toy(&["B"])], 3, 0.5).unwrap();
        let outcomes: Vec<String> = m.vocab().map(str::to_string).chain([OOV.to_string()]).collect();
        for hist in [[BOS, BOS], [BOS, "A|_"], ["A|_", "B|_"], ["Z|_", "Z|_"]] {
            let s: f64 = outcomes.iter().map(|o| m.prob(&hist, o)).sum();
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn training_sentence_is_most_probable() {
        // brute force over every length-2 sequence of a two-signature vocabulary
        let m = build_morph_model(&[toy(&["A", "B"])], 3, 1.0).unwrap();
        let seq_lp = |s: &[&str]| -> f64 {
            let v: Vec<String> = s.iter().map(|x| format!("{x}|_")).collect();
            m.log_probs(&v).iter().sum()
        };
        let target = seq_lp(&["A", "B"]);
        for a in ["A", "B"] {
            for b in ["A", "B"] {
                if (a, b) != ("A", "B") {
                    assert!(seq_lp(&[a, b]) < target);
                }
            }
        }
    }

    fn triple(tree: &DepTree, q: &str, a: &str) -> TrainingTriple {
        TrainingTriple::new(tree.clone(), q, a)
    }

    fn graduated() -> DepTree {
        parse_conllu(
            "1\tJohn\tJohn\tPROPN\t_\t_\t2\tnsubj\t_\t_\n\
2\tgraduated\tgraduate\tVERB\t_\tTense=Past\t0\troot\t_\t_\n\
3\tin\tin\tADP\t_\t_\t4\tcase\t_\t_\n\
4\t2010\t2010\tNUM\t_\t_\t2\tobl\t_\t_\n",
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn qword_formula() {
        let t = graduated();
        let m = build_qword_model(&[triple(&t, "When did John graduate?", "in 2010")], 1.0).unwrap();
        assert!(m.prob("when", "obl") > m.prob("who", "obl"));

        let m = build_qword_model(
            &[
                triple(&t, "When did John graduate?", "in 2010"),
                triple(&t, "Where did John graduate?", "in 2010"),
            ],
            0.5,
        )
        .unwrap();
        let w = 3.0; // two observed words + OOV
        let expected = (1.0 + 0.5) / (2.0 + 0.5 * w);
        assert_relative_eq!(m.prob("When", "obl"), expected);
        assert_relative_eq!(m.prob("where", "obl"), expected);
        // unseen condition is uniform
        assert_relative_eq!(m.prob("when", "nsubj"), 1.0 / w);
        assert_relative_eq!(m.prob("zzz", "nsubj"), 1.0 / w);
    }

    #[test]
    fn qword_condition_falls_back_to_leftmost_token() {
        let t = graduated();
        assert_eq!(answer_condition(&t, "in 2010").as_deref(), Some("obl"));
        assert_eq!(answer_condition(&t, "2010").as_deref(), Some("obl"));
        assert_eq!(answer_condition(&t, "graduated in").as_deref(), Some("root"));
        assert_eq!(answer_condition(&t, "nowhere"), None);
    }

    fn models(weights: Weights) -> RankModels {
        let t = graduated();
        let morph = build_morph_model(std::slice::from_ref(&t), 3, 1.0).unwrap();
        let qword = build_qword_model(&[triple(&t, "When did John graduate?", "in 2010")], 1.0).unwrap();
        RankModels::new(None, morph, qword, weights).unwrap()
    }

    #[test]
    fn weights_validated() {
        let t = graduated();
        let morph = build_morph_model(std::slice::from_ref(&t), 3, 1.0).unwrap();
        let qword = build_qword_model(&[], 1.0).unwrap();
        let zero = Weights { morph: 0.0, qword: 0.0 };
        assert!(matches!(RankModels::new(None, morph, qword, zero), Err(RankError::BadWeights)));
    }

    #[test]
    fn score_matches_hand_computation() {
        let tree = graduated();
        let m = models(Weights::default());
        let t = parse_template_line("[r.nsubj#1] graduated ?\t<r.obl#4>").unwrap();
        let mut c = crate::generate::apply_template(&t, 0, &tree).unwrap();
        let s = score_candidate(&mut c, &tree, &t, &m).unwrap();
        // counts: <s><s>PROPN, <s>PROPN VERB, PROPN VERB ADP, VERB ADP NUM, ADP NUM </s>; 6 outcomes
        // "graduated" has lexicon signature VERB|Tense=Past, "?" is unknown
        let v: f64 = 6.0;
        let p1 = (1.0 + 1.0) / (1.0 + v);
        let p2 = (1.0 + 1.0) / (1.0 + v);
        let p3 = (0.0 + 1.0) / (1.0 + v); // history (PROPN, VERB) seen once, never before OOV
        let morph = (p1.ln() + p2.ln() + p3.ln()) / 3.0;
        // qword: condition obl, vocab {when}; "john" unseen -> 1 / (1 + 2)
        let qword = (1.0f64 / 3.0).ln();
        assert_relative_eq!(c.score_parts["morph"], morph, epsilon = 1e-12);
        assert_relative_eq!(c.score_parts["qword"], qword, epsilon = 1e-12);
        assert_relative_eq!(s, morph + qword, epsilon = 1e-12);
        assert_eq!(c.score, Some(s));
    }

    #[test]
    fn observed_question_word_scores_higher() {
        let tree = graduated();
        let m = models(Weights::default());
        let a = parse_template_line("when did [r.nsubj#1] [r.lemma] ?\t<r.obl#4>").unwrap();
        let b = parse_template_line("why did [r.nsubj#1] [r.lemma] ?\t<r.obl#4>").unwrap();
        let mut ca = crate::generate::apply_template(&a, 0, &tree).unwrap();
        let mut cb = crate::generate::apply_template(&b, 1, &tree).unwrap();
        // both literals are unknown to the treebank, so only the qword part differs
        let sa = score_candidate(&mut ca, &tree, &a, &m).unwrap();
        let sb = score_candidate(&mut cb, &tree, &b, &m).unwrap();
        assert_eq!(ca.score_parts["morph"], cb.score_parts["morph"]);
        assert!(sa > sb);
        let morph_only = models(Weights { morph: 1.0, qword: 0.0 });
        let sa = score_candidate(&mut ca, &tree, &a, &morph_only).unwrap();
        let sb = score_candidate(&mut cb, &tree, &b, &morph_only).unwrap();
        assert_eq!(sa, sb);
    }

    fn cand(q: &str, a: &str, score: f64) -> GenCandidate {
        GenCandidate {
            sent_id: "s".into(),
            template_id: 0,
            question: q.into(),
            answer: a.into(),
            source: "john graduated in 2010".into(),
            score: Some(score),
            score_parts: BTreeMap::new(),
        }
    }

    #[test]
    fn basic_filter_rules() {
        let out = basic_filter(vec![
            cand("when did john graduate in 2010 ?", "in 2010", 0.0),
            cand("when ?", "in 2010", 0.0),
            cand("what did john do ?", "john graduated in 2010", 0.0),
            cand("what did john do ?", " ", 0.0),
            cand("when did john graduate ?", "in 2010", 0.2),
            cand("who graduated ?", "john", 0.1),
            cand("when did john graduate ?", "in 2010", 0.5),
        ]);
        let kept: Vec<(&str, f64)> = out.iter().map(|c| (c.question.as_str(), c.score.unwrap())).collect();
        assert_eq!(kept, [("who graduated ?", 0.1), ("when did john graduate ?", 0.5)]);
        assert!(basic_filter(Vec::new()).is_empty());
    }

    #[test]
    fn answer_containment_is_token_based() {
        let out = basic_filter(vec![cand("vad gör han ?", "a", 0.0)]);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn rules_can_be_switched_off() {
        let rules = FilterToggles { min_question_tokens: false, ..Default::default() };
        assert_eq!(basic_filter_with(vec![cand("när ?", "x", 0.0)], rules).len(), 1);
    }

    #[test]
    fn mean_filter_examples() {
        let out = mean_filter(vec![cand("a", "x", -1.0), cand("b", "x", -2.0), cand("c", "x", -3.0)]);
        assert_eq!(out.iter().map(|c| c.question.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(mean_filter(vec![cand("a", "x", 0.3)]).len(), 1);
        let eq = vec![cand("a", "x", 0.1), cand("b", "x", 0.1), cand("c", "x", 0.1)];
        assert_eq!(mean_filter(eq).len(), 3);
        assert!(mean_filter(Vec::new()).is_empty());
    }

    #[test]
    fn generation_stats_example() {
        let per: BTreeMap<String, StageCounts> = [0usize, 2, 3, 23]
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                (format!("s{i}"), StageCounts { generated: g, after_basic: g.min(2), after_mean: g.min(1) })
            })
            .collect();
        let st = generation_stats(&per, Some(8));
        assert_eq!(st.generated.per_sentence.mean, 7.0);
        assert_eq!(st.generated.per_sentence.median, 2.5);
        assert_eq!(st.generated.per_sentence.max, 23.0);
        assert_eq!(st.generated.total, 28);
        assert_eq!(st.generated.sentences_with_any, 3);
        assert_eq!(st.after_mean.sentences_with_any, 3);
        assert_relative_eq!(st.after_mean_pct, 37.5);

        let zeros: BTreeMap<String, StageCounts> =
            [("a".to_string(), StageCounts::default())].into_iter().collect();
        let z = generation_stats(&zeros, None);
        assert_eq!(z.generated.total, 0);
        assert_eq!(z.after_mean_pct, 0.0);
        assert_eq!(z.generated.per_sentence.mean, 0.0);
    }

    #[test]
    fn model_files_round_trip_byte_exact() {
        let t = graduated();
        let morph = build_morph_model(std::slice::from_ref(&t), 3, 1.0).unwrap();
        let text = write_morph(&morph);
        let back = read_morph(&text, 1.0).unwrap();
        assert_eq!(back, morph);
        assert_eq!(write_morph(&back), text);

        let qword = build_qword_model(&[triple(&t, "When did John graduate?", "in 2010")], 1.0).unwrap();
        let text = write_qword(&qword);
        assert_eq!(read_qword(&text, 1.0).unwrap(), qword);

        let idf = crate::induce::build_idf(&[vec![&t]]).unwrap();
        let text = write_idf(&idf);
        assert_eq!(read_idf(&text).unwrap(), idf);
        assert!(read_idf("nonsense").is_err());
        assert!(matches!(read_qword("#depqg-qword v1\nevent\ta\n", 1.0), Err(RankError::Format { line: 2, .. })));
    }
}
