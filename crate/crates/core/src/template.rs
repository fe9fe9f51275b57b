//! The template expression language.
//!
//! A template line is a question and an answer separated by a tab. Each side is
//! a space-separated sequence of expressions:
//!
//! * `[r.nsubj#1]` picks the surface form of the node reached by `nsubj` from the root,
//! * `[r.lemma]`, `[r.obj.lemma#3]` pick the lemma instead,
//! * `<r.obl#4>` takes the whole subtree yield of the node,
//! * anything else is a literal word copied verbatim.
//!
//! `#N` is the surface position the node had in the training sentence. It is
//! only a tie-breaker when applying the template to another tree.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::conllu::{DepTree, PathError, RelPath, RelPathParseError, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attr {
    Form,
    Lemma,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateExpr {
    Literal(String),
    Node {
        path: RelPath,
        attr: Attr,
        hint: Option<u32>,
    },
    Subtree {
        path: RelPath,
        hint: Option<u32>,
    },
}

impl TemplateExpr {
    pub fn literal(text: &str) -> Self {
        TemplateExpr::Literal(text.to_string())
    }

    pub fn node(path: RelPath, attr: Attr, hint: Option<u32>) -> Self {
        TemplateExpr::Node { path, attr, hint }
    }

    pub fn subtree(path: RelPath, hint: Option<u32>) -> Self {
        TemplateExpr::Subtree { path, hint }
    }

    pub fn path(&self) -> Option<&RelPath> {
        match self {
            TemplateExpr::Literal(_) => None,
            TemplateExpr::Node { path, .. } | TemplateExpr::Subtree { path, .. } => Some(path),
        }
    }

    fn hint(&self) -> Option<u32> {
        match self {
            TemplateExpr::Literal(_) => None,
            TemplateExpr::Node { hint, .. } | TemplateExpr::Subtree { hint, .. } => *hint,
        }
    }

    /// Tokens of `tree` the expression draws from; empty for literals.
    pub fn tokens<'t>(&self, tree: &'t DepTree) -> Result<Vec<&'t Token>, PathError> {
        match self {
            TemplateExpr::Literal(_) => Ok(Vec::new()),
            TemplateExpr::Node { path, hint, .. } => Ok(vec![tree.resolve_path(path, *hint)?]),
            TemplateExpr::Subtree { path, hint } => {
                let node = tree.resolve_path(path, *hint)?;
                Ok(tree.subtree_yield(node.id).tokens)
            }
        }
    }
}

/// Characters a literal may not contain.
pub(crate) fn is_reserved(c: char) -> bool {
    matches!(c, '[' | ']' | '<' | '>') || c.is_whitespace()
}

impl fmt::Display for TemplateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateExpr::Literal(s) => f.write_str(s),
            TemplateExpr::Node { path, attr, hint } => {
                write!(f, "[{path}")?;
                if *attr == Attr::Lemma {
                    f.write_str(".lemma")?;
                }
                if let Some(h) = hint {
                    write!(f, "#{h}")?;
                }
                f.write_str("]")
            }
            TemplateExpr::Subtree { path, hint } => {
                write!(f, "<{path}")?;
                if let Some(h) = hint {
                    write!(f, "#{h}")?;
                }
                f.write_str(">")
            }
        }
    }
}

/// Applicability condition checked before a template is fired.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    /// Paths that must all resolve in the target tree.
    pub required: BTreeSet<RelPath>,
    pub root_upos: Option<String>,
}

impl Guard {
    fn from_exprs<'a>(exprs: impl Iterator<Item = &'a TemplateExpr>) -> Self {
        Guard {
            required: exprs.filter_map(|e| e.path().cloned()).collect(),
            root_upos: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub question: Vec<TemplateExpr>,
    pub answer: Vec<TemplateExpr>,
    pub guard: Guard,
    pub support: u32,
    pub sources: Vec<String>,
}

impl Template {
    /// Builds a template whose guard covers every path it uses.
    pub fn new(question: Vec<TemplateExpr>, answer: Vec<TemplateExpr>) -> Self {
        let guard = Guard::from_exprs(question.iter().chain(answer.iter()));
        Template {
            question,
            answer,
            guard,
            support: 1,
            sources: Vec::new(),
        }
    }

    pub fn with_root_upos(mut self, upos: Option<String>) -> Self {
        self.guard.root_upos = upos;
        self
    }

    pub fn with_source(mut self, sent_id: &str) -> Self {
        self.sources = vec![sent_id.to_string()];
        self.support = 1;
        self
    }

    /// Identity used when merging: the two expression sequences.
    pub fn key(&self) -> (&[TemplateExpr], &[TemplateExpr]) {
        (&self.question, &self.answer)
    }

    pub fn question_text(&self) -> String {
        join_exprs(&self.question)
    }

    pub fn answer_text(&self) -> String {
        join_exprs(&self.answer)
    }
}

fn join_exprs(exprs: &[TemplateExpr]) -> String {
    exprs
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Templates deduplicated by their expression sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Template> {
        self.templates.iter()
    }

    /// Adds a template, merging support and sources into an existing member
    /// with the same expressions. Conflicting root UPOS constraints are dropped.
    pub fn insert(&mut self, t: Template) {
        match self.templates.iter_mut().find(|m| m.key() == t.key()) {
            Some(m) => {
                m.support += t.support;
                m.sources.extend(t.sources);
                if m.guard.root_upos != t.guard.root_upos {
                    m.guard.root_upos = None;
                }
            }
            None => self.templates.push(t),
        }
    }

    /// Appends without merging; used to build deliberately redundant sets.
    pub fn push_unmerged(&mut self, t: Template) {
        self.templates.push(t);
    }
}

impl FromIterator<Template> for TemplateSet {
    fn from_iter<I: IntoIterator<Item = Template>>(iter: I) -> Self {
        let mut set = TemplateSet::new();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {column}: {kind}")]
pub struct TemplateSyntaxError {
    /// 0-based character offset into the line.
    pub column: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    #[error("unbalanced brackets")]
    Unbalanced,
    #[error("empty path step")]
    EmptyStep,
    #[error("path must start with `r`")]
    MissingRoot,
    #[error("non-numeric hint {0:?}")]
    BadHint(String),
    #[error("empty expression (double space?)")]
    EmptyToken,
    #[error("missing tab between question and answer")]
    MissingAnswer,
    #[error("{0} side is empty")]
    EmptySide(&'static str),
    #[error("invalid support {0:?}")]
    BadSupport(String),
    #[error("too many columns")]
    TooManyColumns,
}

fn syntax(column: usize, kind: SyntaxErrorKind) -> TemplateSyntaxError {
    TemplateSyntaxError { column, kind }
}

fn parse_path_body(body: &str, column: usize) -> Result<(RelPath, Attr, Option<u32>), TemplateSyntaxError> {
    let (path_part, hint) = match body.split_once('#') {
        Some((p, h)) => {
            let hint_col = column + p.chars().count() + 1;
            let n = h
                .parse::<u32>()
                .map_err(|_| syntax(hint_col, SyntaxErrorKind::BadHint(h.to_string())))?;
            (p, Some(n))
        }
        None => (body, None),
    };
    let mut path: RelPath = path_part.parse().map_err(|e| match e {
        RelPathParseError::MissingRoot => syntax(column, SyntaxErrorKind::MissingRoot),
        RelPathParseError::EmptyStep(_) => syntax(column, SyntaxErrorKind::EmptyStep),
    })?;
    let attr = if path.0.last().map(String::as_str) == Some("lemma") {
        path.0.pop();
        Attr::Lemma
    } else {
        Attr::Form
    };
    Ok((path, attr, hint))
}

fn parse_expr(token: &str, column: usize) -> Result<TemplateExpr, TemplateSyntaxError> {
    if token.is_empty() {
        return Err(syntax(column, SyntaxErrorKind::EmptyToken));
    }
    let (open, close) = match token.chars().next() {
        Some('[') => ('[', ']'),
        Some('<') => ('<', '>'),
        _ => {
            if let Some(pos) = token.chars().position(|c| matches!(c, '[' | ']' | '<' | '>')) {
                return Err(syntax(column + pos, SyntaxErrorKind::Unbalanced));
            }
            return Ok(TemplateExpr::Literal(token.to_string()));
        }
    };
    let inner = token[1..]
        .strip_suffix(close)
        .ok_or_else(|| syntax(column + token.chars().count(), SyntaxErrorKind::Unbalanced))?;
    if let Some(pos) = inner.chars().position(|c| matches!(c, '[' | ']' | '<' | '>')) {
        return Err(syntax(column + 1 + pos, SyntaxErrorKind::Unbalanced));
    }
    let (path, attr, hint) = parse_path_body(inner, column + 1)?;
    if open == '<' {
        if attr == Attr::Lemma {
            // a subtree has no single lemma; treat `.lemma` as a path step typo
            return Err(syntax(column + 1, SyntaxErrorKind::Unbalanced));
        }
        Ok(TemplateExpr::Subtree { path, hint })
    } else {
        Ok(TemplateExpr::Node { path, attr, hint })
    }
}

fn parse_side(
    text: &str,
    offset: usize,
    side: &'static str,
) -> Result<Vec<TemplateExpr>, TemplateSyntaxError> {
    if text.is_empty() {
        return Err(syntax(offset, SyntaxErrorKind::EmptySide(side)));
    }
    let mut exprs = Vec::new();
    let mut col = offset;
    for tok in text.split(' ') {
        exprs.push(parse_expr(tok, col)?);
        col += tok.chars().count() + 1;
    }
    Ok(exprs)
}

/// Parses `question TAB answer [TAB support TAB sources [TAB root_upos]]`.
pub fn parse_template_line(text: &str) -> Result<Template, TemplateSyntaxError> {
    let cols: Vec<&str> = text.split('\t').collect();
    if cols.len() < 2 {
        return Err(syntax(text.chars().count(), SyntaxErrorKind::MissingAnswer));
    }
    if cols.len() > 5 {
        return Err(syntax(0, SyntaxErrorKind::TooManyColumns));
    }
    let mut offsets = Vec::with_capacity(cols.len());
    let mut acc = 0;
    for c in &cols {
        offsets.push(acc);
        acc += c.chars().count() + 1;
    }
    let question = parse_side(cols[0], offsets[0], "question")?;
    let answer = parse_side(cols[1], offsets[1], "answer")?;
    let mut t = Template::new(question, answer);
    if let Some(s) = cols.get(2) {
        t.support = s
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| syntax(offsets[2], SyntaxErrorKind::BadSupport(s.to_string())))?;
    }
    if let Some(s) = cols.get(3) {
        t.sources = s
            .split(',')
            .filter(|x| !x.is_empty())
            .map(str::to_string)
            .collect();
    }
    if let Some(u) = cols.get(4) {
        if !u.is_empty() && *u != "_" {
            t.guard.root_upos = Some(u.to_string());
        }
    }
    Ok(t)
}

/// Canonical text of a template. Metadata columns are emitted only when they
/// differ from what a bare `question TAB answer` line parses to.
pub fn render_template(t: &Template) -> String {
    let mut line = format!("{}\t{}", t.question_text(), t.answer_text());
    let bare = t.support == 1 && t.sources.is_empty() && t.guard.root_upos.is_none();
    if !bare {
        line.push_str(&format!("\t{}\t{}", t.support, t.sources.join(",")));
        if let Some(u) = &t.guard.root_upos {
            line.push('\t');
            line.push_str(u);
        }
    }
    line
}

/// Evaluates one expression against a tree. Literals come back verbatim.
pub fn eval_expr(e: &TemplateExpr, tree: &DepTree) -> Result<String, PathError> {
    match e {
        TemplateExpr::Literal(s) => Ok(s.clone()),
        TemplateExpr::Node { path, attr, .. } => {
            let tok = tree.resolve_path(path, e.hint())?;
            Ok(match attr {
                Attr::Form => tok.form.clone(),
                Attr::Lemma => tok.lemma.clone(),
            })
        }
        TemplateExpr::Subtree { path, hint } => {
            let tok = tree.resolve_path(path, *hint)?;
            Ok(tree.subtree_yield(tok.id).text())
        }
    }
}

#[derive(Debug, Error)]
pub enum TemplateFileError {
    #[error("template line {line}: {source}")]
    Syntax {
        line: usize,
        #[source]
        source: TemplateSyntaxError,
    },
}

/// Reads a template file; `#` lines and blank lines are skipped. Members are
/// kept in file order without re-merging.
pub fn read_template_file(text: &str) -> Result<TemplateSet, TemplateFileError> {
    let mut set = TemplateSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let t = parse_template_line(line).map_err(|source| TemplateFileError::Syntax {
            line: i + 1,
            source,
        })?;
        set.push_unmerged(t);
    }
    Ok(set)
}

pub fn write_template_file(set: &TemplateSet) -> String {
    let mut out = String::from("# question\tanswer\tsupport\tsources\troot_upos\n");
    for t in set.iter() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            t.question_text(),
            t.answer_text(),
            t.support,
            t.sources.join(","),
            t.guard.root_upos.as_deref().unwrap_or("_"),
        ));
    }
    out
}
