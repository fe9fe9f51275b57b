//! Corpus-level BLEU, ROUGE-L and CIDEr with one reference per hypothesis.
//!
//! Strings are tokenized with [`metric_tokens`]: case-folded, whitespace
//! split, punctuation stripped from token ends.

use std::collections::HashMap;

use thiserror::Error;

use crate::text::metric_tokens;

/// Default recall weight of the ROUGE-L F-measure.
pub const ROUGE_BETA: f64 = 1.2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("{hyps} hypotheses but {refs} references")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("BLEU order must be in 1..=4, got {0}")]
    BadOrder(usize),
    #[error("CIDEr needs at least two items, got {0}")]
    CorpusTooSmall(usize),
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

fn check_pairs(hyps: usize, refs: usize) -> Result<(), MetricError> {
    if hyps != refs {
        return Err(MetricError::LengthMismatch { hyps, refs });
    }
    if hyps == 0 {
        return Err(MetricError::EmptyCorpus);
    }
    Ok(())
}

/// `[BLEU-1, ..., BLEU-max_n]` from clipped n-gram precisions pooled over the corpus.
pub fn bleu_n<S: AsRef<str>>(
    hypotheses: &[S],
    references: &[S],
    max_n: usize,
) -> Result<Vec<f64>, MetricError> {
    check_pairs(hypotheses.len(), references.len())?;
    if !(1..=4).contains(&max_n) {
        return Err(MetricError::BadOrder(max_n));
    }
    let mut matched = vec![0usize; max_n + 1];
    let mut total = vec![0usize; max_n + 1];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hypotheses.iter().zip(references) {
        let h = metric_tokens(h.as_ref());
        let r = metric_tokens(r.as_ref());
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let hc = ngram_counts(&h, n);
            let rc = ngram_counts(&r, n);
            for (g, c) in &hc {
                matched[n] += (*c).min(rc.get(g).copied().unwrap_or(0));
                total[n] += c;
            }
        }
    }
    let bp = if hyp_len == 0 {
        0.0
    } else if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let mut out = Vec::with_capacity(max_n);
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        log_sum += if matched[n] == 0 {
            f64::NEG_INFINITY
        } else {
            (matched[n] as f64 / total[n] as f64).ln()
        };
        let score = bp * (log_sum / n as f64).exp();
        out.push(if score.is_finite() { score } else { 0.0 });
    }
    Ok(out)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F-measure, best over the references.
pub fn rouge_l<S: AsRef<str>>(hypothesis: &str, references: &[S], beta: f64) -> f64 {
    let h = metric_tokens(hypothesis);
    references
        .iter()
        .map(|r| {
            let r = metric_tokens(r.as_ref());
            let lcs = lcs_len(&h, &r) as f64;
            if lcs == 0.0 {
                return 0.0;
            }
            let p = lcs / h.len() as f64;
            let rec = lcs / r.len() as f64;
            (1.0 + beta * beta) * p * rec / (rec + beta * beta * p)
        })
        .fold(0.0, f64::max)
}

/// Mean ROUGE-L over aligned hypothesis/reference pairs.
pub fn rouge_l_corpus<S: AsRef<str>>(
    hypotheses: &[S],
    references: &[S],
    beta: f64,
) -> Result<f64, MetricError> {
    check_pairs(hypotheses.len(), references.len())?;
    let sum: f64 = hypotheses
        .iter()
        .zip(references)
        .map(|(h, r)| rouge_l(h.as_ref(), std::slice::from_ref(r), beta))
        .sum();
    Ok(sum / hypotheses.len() as f64)
}

const CIDER_MAX_N: usize = 4;
const CIDER_SCALE: f64 = 10.0;

/// Plain CIDEr: per order, cosine between tf-idf vectors (document frequency
/// over references, floored at 1), averaged over orders 1..=4, scaled by 10
/// and averaged over items.
pub fn cider<S: AsRef<str>>(hypotheses: &[S], references: &[S]) -> Result<f64, MetricError> {
    check_pairs(hypotheses.len(), references.len())?;
    if hypotheses.len() < 2 {
        return Err(MetricError::CorpusTooSmall(hypotheses.len()));
    }
    let hyps: Vec<Vec<String>> = hypotheses.iter().map(|h| metric_tokens(h.as_ref())).collect();
    let refs: Vec<Vec<String>> = references.iter().map(|r| metric_tokens(r.as_ref())).collect();
    let log_docs = (refs.len() as f64).ln();
    let mut total = 0.0;
    for n in 1..=CIDER_MAX_N {
        let ref_counts: Vec<_> = refs.iter().map(|r| ngram_counts(r, n)).collect();
        let mut df: HashMap<&[String], usize> = HashMap::new();
        for rc in &ref_counts {
            for g in rc.keys() {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let weight = |g: &[String]| log_docs - (df.get(g).copied().unwrap_or(0).max(1) as f64).ln();
        for (h, rc) in hyps.iter().zip(&ref_counts) {
            let hc = ngram_counts(h, n);
            let vh: HashMap<&[String], f64> = hc.iter().map(|(g, &c)| (*g, c as f64 * weight(g))).collect();
            let vr: HashMap<&[String], f64> = rc.iter().map(|(g, &c)| (*g, c as f64 * weight(g))).collect();
            let dot: f64 = vh.iter().map(|(g, x)| x * vr.get(g).copied().unwrap_or(0.0)).sum();
            let nh = vh.values().map(|x| x * x).sum::<f64>().sqrt();
            let nr = vr.values().map(|x| x * x).sum::<f64>().sqrt();
            if nh > 0.0 && nr > 0.0 {
                total += dot / (nh * nr);
            }
        }
    }
    Ok(CIDER_SCALE * total / (CIDER_MAX_N as f64 * hyps.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bleu_identity_and_hand_example() {
        let c = ["när tog john examen", "vem kom"];
        assert_eq!(bleu_n(&c, &c, 4).unwrap(), vec![1.0, 1.0, 1.0, 1.0]);
        let b = bleu_n(&["a b c"], &["a b d"], 2).unwrap();
        assert_relative_eq!(b[0], 2.0 / 3.0);
        assert_relative_eq!(b[1], (2.0f64 / 3.0 * 0.5).sqrt());
    }

    #[test]
    fn bleu_brevity_penalty_and_errors() {
        let b = bleu_n(&["a b"], &["a b c d"], 1).unwrap();
        assert_relative_eq!(b[0], (1.0f64 - 2.0).exp());
        let b = bleu_n(&["x y"], &["a b"], 2).unwrap();
        assert_eq!(b, vec![0.0, 0.0]);
        let empty: [&str; 0] = [];
        assert_eq!(bleu_n(&empty, &empty, 4), Err(MetricError::EmptyCorpus));
        assert_eq!(bleu_n(&["a"], &["a"], 5), Err(MetricError::BadOrder(5)));
        assert_eq!(
            bleu_n(&["a", "b"], &["a"], 1),
            Err(MetricError::LengthMismatch { hyps: 2, refs: 1 })
        );
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_l("a b c", &["a b c"], ROUGE_BETA), 1.0);
        let (p, r, b) = (2.0 / 3.0, 1.0, ROUGE_BETA);
        assert_relative_eq!(rouge_l("a b c", &["a c"], b), (1.0 + b * b) * p * r / (r + b * b * p));
        assert_eq!(rouge_l("a b", &["c d"], b), 0.0);
        assert_eq!(rouge_l("a b c", &["x", "a b c"], b), 1.0);
        assert_eq!(rouge_l_corpus(&["a b", "c"], &["a b", "c"], b).unwrap(), 1.0);
    }

    #[test]
    fn cider_basics() {
        assert_eq!(cider(&["x y", "z"], &["a b", "c"]).unwrap(), 0.0);
        assert_eq!(cider(&["a"], &["a"]), Err(MetricError::CorpusTooSmall(1)));
        let refs = ["the cat sat on the mat", "a dog ran in the park"];
        let same = cider(&refs, &refs).unwrap();
        let other = cider(&["the cat sat", "a dog ran in the park"], &refs).unwrap();
        assert!(same > other);
        assert!(same <= 10.0 + 1e-9);
    }
}
