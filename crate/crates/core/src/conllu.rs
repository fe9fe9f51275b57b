//! CoNLL-U ingestion and dependency-tree navigation.
//!
//! Only basic UD arcs are used. Multiword-token ranges (`3-4`) and empty
//! nodes (`5.1`) carry no head, so they are kept verbatim for serialization
//! but never become part of the tree.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ConlluError {
    pub line: usize,
    pub kind: ConlluErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConlluErrorKind {
    #[error("expected 10 tab-separated fields, found {0}")]
    ColumnCount(usize),
    #[error("invalid token id {0:?}")]
    BadId(String),
    #[error("non-integer head {0:?}")]
    BadHead(String),
    #[error("malformed FEATS {0:?}")]
    BadFeats(String),
    #[error("token ids must be 1..n in order, found {found} at position {expected}")]
    OutOfOrder { expected: u32, found: u32 },
    #[error("token {0} is its own head")]
    SelfLoop(u32),
    #[error("head {head} of token {id} does not exist")]
    DanglingHead { id: u32, head: u32 },
    #[error("token {id} has deprel {deprel:?} inconsistent with head {head}")]
    RootLabel { id: u32, head: u32, deprel: String },
    #[error("no root")]
    NoRoot,
    #[error("multiple roots")]
    MultipleRoots,
    #[error("cyclic arcs through token {0}")]
    Cycle(u32),
    #[error("empty sentence")]
    EmptySentence,
}

/// A syntactic word of a parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub id: u32,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    /// `Name=Value` pairs in file order; empty when the column is `_`.
    pub feats: Vec<(String, String)>,
    pub head: u32,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Convenience constructor for the fields the template language looks at.
    pub fn new(id: u32, form: &str, lemma: &str, upos: &str, head: u32, deprel: &str) -> Self {
        Token {
            id,
            form: form.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            xpos: "_".to_string(),
            feats: Vec::new(),
            head,
            deprel: deprel.to_string(),
            deps: "_".to_string(),
            misc: "_".to_string(),
        }
    }

    pub fn with_feats(mut self, feats: &[(&str, &str)]) -> Self {
        self.feats = feats
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        self
    }

    /// FEATS column text, `_` when empty.
    pub fn feats_string(&self) -> String {
        if self.feats.is_empty() {
            "_".to_string()
        } else {
            self.feats
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("|")
        }
    }

    /// Morphological signature: UPOS plus canonical FEATS.
    pub fn morph_signature(&self) -> String {
        format!("{}|{}", self.upos, self.feats_string())
    }

    fn to_line(&self) -> String {
        [
            self.id.to_string(),
            self.form.clone(),
            self.lemma.clone(),
            self.upos.clone(),
            self.xpos.clone(),
            self.feats_string(),
            self.head.to_string(),
            self.deprel.clone(),
            self.deps.clone(),
            self.misc.clone(),
        ]
        .join("\t")
    }
}

/// Relation path from the root symbol `r`, e.g. `r.obl.case`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelPath(pub Vec<String>);

impl RelPath {
    pub fn root() -> Self {
        RelPath(Vec::new())
    }

    pub fn new<S: AsRef<str>>(steps: &[S]) -> Self {
        RelPath(steps.iter().map(|s| s.as_ref().to_string()).collect())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[String] {
        &self.0
    }

    /// Relation label of the node the path ends at (`root` for the empty path).
    pub fn last_label(&self) -> &str {
        self.0.last().map(String::as_str).unwrap_or("root")
    }
}

impl fmt::Display for RelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("r")?;
        for step in &self.0 {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelPathParseError {
    #[error("path must start with `r`")]
    MissingRoot,
    #[error("empty step at position {0}")]
    EmptyStep(usize),
}

impl FromStr for RelPath {
    type Err = RelPathParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        if parts.next() != Some("r") {
            return Err(RelPathParseError::MissingRoot);
        }
        let mut steps = Vec::new();
        for (i, p) in parts.enumerate() {
            if p.is_empty() {
                return Err(RelPathParseError::EmptyStep(i + 1));
            }
            steps.push(p.to_string());
        }
        Ok(RelPath(steps))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("no child labelled {label:?} at step {step} of {path}")]
    NoMatch {
        path: String,
        step: usize,
        label: String,
    },
}

/// Tokens dominated by a node, in surface order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeYield<'a> {
    pub tokens: Vec<&'a Token>,
    /// Set when the dominated tokens are not contiguous (non-projective arc).
    pub discontinuous: bool,
}

impl SubtreeYield<'_> {
    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    pub fn text(&self) -> String {
        self.forms().join(" ")
    }
}

/// A validated dependency tree. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    sent_id: String,
    text: String,
    tokens: Vec<Token>,
    /// Comment lines without the newline, in file order.
    comments: Vec<String>,
    /// Raw multiword/empty-node lines with the number of tokens preceding them.
    extra_lines: Vec<(usize, String)>,
    children: Vec<Vec<u32>>,
    root: u32,
}

impl DepTree {
    /// Validates arcs and builds the tree. `text` defaults to the space-joined forms
    /// when empty.
    pub fn new(sent_id: &str, text: &str, tokens: Vec<Token>) -> Result<Self, ConlluErrorKind> {
        if tokens.is_empty() {
            return Err(ConlluErrorKind::EmptySentence);
        }
        let n = tokens.len() as u32;
        for (i, t) in tokens.iter().enumerate() {
            let expected = i as u32 + 1;
            if t.id != expected {
                return Err(ConlluErrorKind::OutOfOrder {
                    expected,
                    found: t.id,
                });
            }
            if t.head == t.id {
                return Err(ConlluErrorKind::SelfLoop(t.id));
            }
            if t.head > n {
                return Err(ConlluErrorKind::DanglingHead {
                    id: t.id,
                    head: t.head,
                });
            }
            if (t.head == 0) != (t.deprel == "root") {
                return Err(ConlluErrorKind::RootLabel {
                    id: t.id,
                    head: t.head,
                    deprel: t.deprel.clone(),
                });
            }
        }
        let roots: Vec<u32> = tokens.iter().filter(|t| t.head == 0).map(|t| t.id).collect();
        let root = match roots.as_slice() {
            [] => return Err(ConlluErrorKind::NoRoot),
            [r] => *r,
            _ => return Err(ConlluErrorKind::MultipleRoots),
        };
        // every token must reach the root within n steps
        for t in &tokens {
            let mut cur = t.id;
            let mut steps = 0;
            while cur != 0 {
                cur = tokens[cur as usize - 1].head;
                steps += 1;
                if steps > n {
                    return Err(ConlluErrorKind::Cycle(t.id));
                }
            }
        }
        let mut children = vec![Vec::new(); tokens.len() + 1];
        for t in &tokens {
            children[t.head as usize].push(t.id);
        }
        let text = if text.is_empty() {
            tokens
                .iter()
                .map(|t| t.form.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        } else {
            text.to_string()
        };
        Ok(DepTree {
            sent_id: sent_id.to_string(),
            text,
            tokens,
            comments: Vec::new(),
            extra_lines: Vec::new(),
            children,
            root,
        })
    }

    pub fn sent_id(&self) -> &str {
        &self.sent_id
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn token(&self, id: u32) -> Option<&Token> {
        if id == 0 {
            return None;
        }
        self.tokens.get(id as usize - 1)
    }

    pub fn root(&self) -> &Token {
        &self.tokens[self.root as usize - 1]
    }

    /// Dependents of `id` (0 = the virtual root) in surface order.
    pub fn children(&self, id: u32) -> impl Iterator<Item = &Token> {
        self.children
            .get(id as usize)
            .into_iter()
            .flatten()
            .map(move |&c| &self.tokens[c as usize - 1])
    }

    /// True when `ancestor` dominates `node` (reflexively).
    pub fn dominates(&self, ancestor: u32, node: u32) -> bool {
        let mut cur = node;
        while cur != 0 {
            if cur == ancestor {
                return true;
            }
            cur = match self.token(cur) {
                Some(t) => t.head,
                None => return false,
            };
        }
        false
    }

    /// Walks `path` down from the root. When several nodes complete the path,
    /// the one whose route dominates `hint` for the most leading steps wins,
    /// then the leftmost route. A label that is present but leads nowhere is
    /// backtracked over.
    pub fn resolve_path(&self, path: &RelPath, hint: Option<u32>) -> Result<&Token, PathError> {
        let mut best: Option<(usize, &Token)> = None;
        let mut deepest = 0;
        let mut route = Vec::with_capacity(path.steps().len());
        self.walk(self.root(), path.steps(), hint, &mut route, &mut best, &mut deepest);
        match best {
            Some((_, t)) => Ok(t),
            None => Err(PathError::NoMatch {
                path: path.to_string(),
                step: deepest + 1,
                label: path.steps()[deepest].clone(),
            }),
        }
    }

    fn walk<'a>(
        &'a self,
        cur: &'a Token,
        rest: &[String],
        hint: Option<u32>,
        route: &mut Vec<u32>,
        best: &mut Option<(usize, &'a Token)>,
        deepest: &mut usize,
    ) {
        *deepest = (*deepest).max(route.len());
        let Some((label, tail)) = rest.split_first() else {
            let score = match hint {
                Some(h) => route.iter().take_while(|&&n| self.dominates(n, h)).count(),
                None => 0,
            };
            // children are visited left to right, so ties keep the first route
            if best.is_none_or(|(s, _)| score > s) {
                *best = Some((score, cur));
            }
            return;
        };
        for child in self.children(cur.id).filter(|c| &c.deprel == label) {
            route.push(child.id);
            self.walk(child, tail, hint, route, best, deepest);
            route.pop();
        }
    }

    /// Relation path from the root to `id`.
    pub fn path_to(&self, id: u32) -> RelPath {
        let mut steps = Vec::new();
        let mut cur = id;
        while let Some(t) = self.token(cur) {
            if t.head == 0 {
                break;
            }
            steps.push(t.deprel.clone());
            cur = t.head;
        }
        steps.reverse();
        RelPath(steps)
    }

    pub fn subtree_yield(&self, id: u32) -> SubtreeYield<'_> {
        let mut ids = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if self.token(n).is_none() {
                continue;
            }
            ids.push(n);
            stack.extend(self.children[n as usize].iter().copied());
        }
        ids.sort_unstable();
        let discontinuous = ids.windows(2).any(|w| w[1] != w[0] + 1);
        SubtreeYield {
            tokens: ids.iter().map(|&i| &self.tokens[i as usize - 1]).collect(),
            discontinuous,
        }
    }

    /// Serializes back to CoNLL-U, including the trailing blank line.
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        if self.comments.is_empty() {
            if !self.sent_id.is_empty() {
                out.push_str(&format!("# sent_id = {}\n", self.sent_id));
            }
            out.push_str(&format!("# text = {}\n", self.text));
        } else {
            for c in &self.comments {
                out.push_str(c);
                out.push('\n');
            }
        }
        let mut extras = self.extra_lines.iter().peekable();
        for (i, t) in self.tokens.iter().enumerate() {
            while let Some((_, line)) = extras.next_if(|(pos, _)| *pos == i) {
                out.push_str(line);
                out.push('\n');
            }
            out.push_str(&t.to_line());
            out.push('\n');
        }
        for (_, line) in extras {
            out.push_str(line);
            out.push('\n');
        }
        out.push('\n');
        out
    }
}

impl AsRef<DepTree> for DepTree {
    fn as_ref(&self) -> &DepTree {
        self
    }
}

/// Serializes a sequence of trees into one CoNLL-U document.
pub fn write_conllu(trees: &[DepTree]) -> String {
    trees.iter().map(DepTree::to_conllu).collect()
}

fn parse_feats(raw: &str) -> Result<Vec<(String, String)>, ConlluErrorKind> {
    if raw == "_" {
        return Ok(Vec::new());
    }
    raw.split('|')
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(ConlluErrorKind::BadFeats(raw.to_string())),
        })
        .collect()
}

struct Block {
    start_line: usize,
    comments: Vec<String>,
    tokens: Vec<(usize, Token)>,
    extras: Vec<(usize, String)>,
}

impl Block {
    fn new(start_line: usize) -> Self {
        Block {
            start_line,
            comments: Vec::new(),
            tokens: Vec::new(),
            extras: Vec::new(),
        }
    }

    fn finish(self) -> Result<DepTree, ConlluError> {
        let mut sent_id = String::new();
        let mut text = String::new();
        for c in &self.comments {
            let body = c.trim_start_matches('#').trim();
            if let Some(v) = body.strip_prefix("sent_id") {
                if let Some(v) = v.trim_start().strip_prefix('=') {
                    sent_id = v.trim().to_string();
                }
            } else if let Some(v) = body.strip_prefix("text") {
                if let Some(v) = v.trim_start().strip_prefix('=') {
                    text = v.trim().to_string();
                }
            }
        }
        let line_of = |id: u32| {
            self.tokens
                .iter()
                .find(|(_, t)| t.id == id)
                .map(|(l, _)| *l)
                .unwrap_or(self.start_line)
        };
        let tokens: Vec<Token> = self.tokens.iter().map(|(_, t)| t.clone()).collect();
        let mut tree = DepTree::new(&sent_id, &text, tokens).map_err(|kind| {
            let line = match &kind {
                ConlluErrorKind::OutOfOrder { expected, .. } => self
                    .tokens
                    .get(*expected as usize - 1)
                    .map(|(l, _)| *l)
                    .unwrap_or(self.start_line),
                ConlluErrorKind::SelfLoop(id)
                | ConlluErrorKind::Cycle(id)
                | ConlluErrorKind::DanglingHead { id, .. }
                | ConlluErrorKind::RootLabel { id, .. } => line_of(*id),
                ConlluErrorKind::MultipleRoots => self
                    .tokens
                    .iter()
                    .filter(|(_, t)| t.head == 0)
                    .nth(1)
                    .map(|(l, _)| *l)
                    .unwrap_or(self.start_line),
                _ => self.start_line,
            };
            ConlluError { line, kind }
        })?;
        tree.comments = self.comments;
        tree.extra_lines = self.extras;
        Ok(tree)
    }
}

/// Parses a CoNLL-U document into trees, one per sentence block.
pub fn parse_conllu(text: &str) -> Result<Vec<DepTree>, ConlluError> {
    let mut trees = Vec::new();
    let mut block: Option<Block> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                trees.push(b.finish()?);
            }
            continue;
        }
        let b = block.get_or_insert_with(|| Block::new(line_no));
        if line.starts_with('#') {
            b.comments.push(line.to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ConlluError {
                line: line_no,
                kind: ConlluErrorKind::ColumnCount(cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            b.extras.push((b.tokens.len(), line.to_string()));
            continue;
        }
        let err = |kind| ConlluError {
            line: line_no,
            kind,
        };
        let id: u32 = cols[0]
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| err(ConlluErrorKind::BadId(cols[0].to_string())))?;
        let head: u32 = cols[6]
            .parse()
            .map_err(|_| err(ConlluErrorKind::BadHead(cols[6].to_string())))?;
        let feats = parse_feats(cols[5]).map_err(err)?;
        b.tokens.push((
            line_no,
            Token {
                id,
                form: cols[1].to_string(),
                lemma: cols[2].to_string(),
                upos: cols[3].to_string(),
                xpos: cols[4].to_string(),
                feats,
                head,
                deprel: cols[7].to_string(),
                deps: cols[8].to_string(),
                misc: cols[9].to_string(),
            },
        ));
    }
    if let Some(b) = block.take() {
        trees.push(b.finish()?);
    }
    Ok(trees)
}

/// Groups trees into documents using `# newdoc` comments. Without any such
/// marker every sentence is its own document.
pub fn group_documents(trees: &[DepTree]) -> Vec<Vec<&DepTree>> {
    let has_markers = trees
        .iter()
        .any(|t| t.comments().iter().any(|c| is_newdoc(c)));
    if !has_markers {
        return trees.iter().map(|t| vec![t]).collect();
    }
    let mut docs: Vec<Vec<&DepTree>> = Vec::new();
    for t in trees {
        if docs.is_empty() || t.comments().iter().any(|c| is_newdoc(c)) {
            docs.push(Vec::new());
        }
        docs.last_mut().expect("pushed above").push(t);
    }
    docs
}

fn is_newdoc(comment: &str) -> bool {
    comment.trim_start_matches('#').trim_start().starts_with("newdoc")
}
