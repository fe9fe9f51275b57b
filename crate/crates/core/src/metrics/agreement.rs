//! Inter-annotator agreement on ordinal Likert judgements.
//!
//! Randolph's free-marginal kappa measures agreement on absolute scores;
//! Goodman-Kruskal's gamma measures agreement on the relative ordering of
//! items. Both are computed on raw scores, whatever the criterion direction.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of points on the rating scale.
pub const LIKERT_POINTS: u8 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgreementError {
    #[error("no items to compare")]
    NoItems,
    #[error("need at least two raters, got {0}")]
    TooFewRaters(usize),
    #[error("score sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two items for gamma, got {0}")]
    TooFewItems(usize),
    #[error("item {item} rater {rater}: score {score} outside 1..={k}")]
    OutOfRange {
        item: usize,
        rater: usize,
        score: u8,
        k: u8,
    },
    #[error("item {0} does not have a score from every rater")]
    Ragged(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Higher scores are better.
    Up,
    /// Lower scores are better.
    Down,
}

/// The nine questionnaire criteria, C1-C5 about the question and C6-C9 about the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
    C7,
    C8,
    C9,
}

impl Criterion {
    pub const ALL: [Criterion; 9] = [
        Criterion::C1,
        Criterion::C2,
        Criterion::C3,
        Criterion::C4,
        Criterion::C5,
        Criterion::C6,
        Criterion::C7,
        Criterion::C8,
        Criterion::C9,
    ];

    pub fn direction(self) -> Direction {
        match self {
            Criterion::C1 | Criterion::C2 | Criterion::C5 | Criterion::C6 => Direction::Up,
            _ => Direction::Down,
        }
    }

    /// English statement the judge agrees or disagrees with.
    pub fn statement(self) -> &'static str {
        match self {
            Criterion::C1 => "The question is grammatically correct",
            Criterion::C2 => "The question makes sense",
            Criterion::C3 => "The question would be clearer if more information were provided",
            Criterion::C4 => "The question would be clearer if less information were provided",
            Criterion::C5 => "The question is relevant to the given sentence",
            Criterion::C6 => "The suggested answer correctly answers the question",
            Criterion::C7 => "The suggested answer would be clearer if phrased differently",
            Criterion::C8 => "The suggested answer would be clearer if more information were provided",
            Criterion::C9 => "The suggested answer would be clearer if less information were provided",
        }
    }

    pub fn arrow(self) -> &'static str {
        match self.direction() {
            Direction::Up => "↑",
            Direction::Down => "↓",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown criterion {s:?}"))
    }
}

/// Items x raters scores on a 1..=k scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    rows: Vec<Vec<u8>>,
    raters: usize,
    k: u8,
}

impl RatingMatrix {
    pub fn new(rows: Vec<Vec<u8>>, k: u8) -> Result<Self, AgreementError> {
        if rows.is_empty() {
            return Err(AgreementError::NoItems);
        }
        let raters = rows[0].len();
        for (item, row) in rows.iter().enumerate() {
            if row.len() != raters {
                return Err(AgreementError::Ragged(item));
            }
            for (rater, &score) in row.iter().enumerate() {
                if score < 1 || score > k {
                    return Err(AgreementError::OutOfRange {
                        item,
                        rater,
                        score,
                        k,
                    });
                }
            }
        }
        Ok(RatingMatrix { rows, raters, k })
    }

    pub fn likert(rows: Vec<Vec<u8>>) -> Result<Self, AgreementError> {
        Self::new(rows, LIKERT_POINTS)
    }

    /// Builds a matrix from one score sequence per rater.
    pub fn from_raters(raters: &[Vec<u8>], k: u8) -> Result<Self, AgreementError> {
        let n = raters.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = raters.iter().find(|r| r.len() != n) {
            return Err(AgreementError::LengthMismatch(n, bad.len()));
        }
        let rows = (0..n).map(|i| raters.iter().map(|r| r[i]).collect()).collect();
        Self::new(rows, k)
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn categories(&self) -> u8 {
        self.k
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn rater_scores(&self, rater: usize) -> Vec<u8> {
        self.rows.iter().map(|r| r[rater]).collect()
    }
}

/// Randolph's free-marginal multirater kappa.
pub fn randolph_kappa(m: &RatingMatrix) -> Result<f64, AgreementError> {
    let r = m.raters();
    if r < 2 {
        return Err(AgreementError::TooFewRaters(r));
    }
    let n = m.items();
    let k = m.categories() as usize;
    let mut agreeing_pairs = 0u64;
    let mut per_cat = vec![0u64; k + 1];
    for row in m.rows() {
        per_cat.iter_mut().for_each(|c| *c = 0);
        for &s in row {
            per_cat[s as usize] += 1;
        }
        agreeing_pairs += per_cat.iter().map(|&c| c * c.saturating_sub(1)).sum::<u64>();
    }
    let p_obs = agreeing_pairs as f64 / (n * r * (r - 1)) as f64;
    let p_exp = 1.0 / k as f64;
    Ok((p_obs - p_exp) / (1.0 - p_exp))
}

/// Gamma value, or `NotAvailable(x)` when no untied pair exists because a
/// rater gave the same score `x` to every item.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gamma {
    Value(f64),
    NotAvailable(u8),
}

impl Gamma {
    pub fn value(self) -> Option<f64> {
        match self {
            Gamma::Value(v) => Some(v),
            Gamma::NotAvailable(_) => None,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Value(v) => write!(f, "{v:.2}"),
            Gamma::NotAvailable(x) => write!(f, "NA/{x}"),
        }
    }
}

/// Concordant and discordant pair counts, ties in either rater excluded.
pub fn concordance(a: &[u8], b: &[u8]) -> (u64, u64) {
    let mut concordant = 0;
    let mut discordant = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let s = (a[i] as i32 - a[j] as i32) * (b[i] as i32 - b[j] as i32);
            if s > 0 {
                concordant += 1;
            } else if s < 0 {
                discordant += 1;
            }
        }
    }
    (concordant, discordant)
}

fn constant_score(s: &[u8]) -> Option<u8> {
    let first = *s.first()?;
    s.iter().all(|&x| x == first).then_some(first)
}

fn gamma_from_counts(c: u64, d: u64, raters: &[&[u8]]) -> Gamma {
    if c + d == 0 {
        // with no untied pair some rater must be constant
        let x = raters
            .iter()
            .find_map(|r| constant_score(r))
            .unwrap_or_default();
        Gamma::NotAvailable(x)
    } else {
        Gamma::Value((c as f64 - d as f64) / (c + d) as f64)
    }
}

/// Goodman-Kruskal's gamma between two raters.
pub fn gk_gamma(a: &[u8], b: &[u8]) -> Result<Gamma, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(AgreementError::TooFewItems(a.len()));
    }
    let (c, d) = concordance(a, b);
    Ok(gamma_from_counts(c, d, &[a, b]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementResult {
    pub kappa: f64,
    pub gamma: Gamma,
}

/// Kappa plus gamma; with more than two raters, concordant and discordant
/// pairs are pooled over every rater pair.
pub fn agreement(m: &RatingMatrix) -> Result<AgreementResult, AgreementError> {
    let kappa = randolph_kappa(m)?;
    if m.items() < 2 {
        return Err(AgreementError::TooFewItems(m.items()));
    }
    let cols: Vec<Vec<u8>> = (0..m.raters()).map(|r| m.rater_scores(r)).collect();
    let (mut c, mut d) = (0, 0);
    for i in 0..cols.len() {
        for j in i + 1..cols.len() {
            let (ci, di) = concordance(&cols[i], &cols[j]);
            c += ci;
            d += di;
        }
    }
    let refs: Vec<&[u8]> = cols.iter().map(Vec::as_slice).collect();
    Ok(AgreementResult {
        kappa,
        gamma: gamma_from_counts(c, d, &refs),
    })
}
