//! Distribution of the first two words of questions, a proxy for question words.

use std::collections::HashMap;
use std::fmt;

use crate::text::metric_tokens;

/// First one or two case-folded words of a question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Opening {
    pub first: String,
    pub second: Option<String>,
}

impl fmt::Display for Opening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.second {
            Some(s) => write!(f, "{} {}", self.first, s),
            None => f.write_str(&self.first),
        }
    }
}

/// Counts sorted by descending frequency, ties broken alphabetically.
pub fn first_two_words_dist<S: AsRef<str>>(questions: &[S]) -> Vec<(Opening, usize)> {
    let mut counts: HashMap<Opening, usize> = HashMap::new();
    for q in questions {
        let toks = metric_tokens(q.as_ref());
        let Some(first) = toks.first() else { continue };
        let key = Opening {
            first: first.clone(),
            second: toks.get(1).cloned(),
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    let mut out: Vec<(Opening, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.to_string().cmp(&b.0.to_string())));
    out
}

/// Plot-ready CSV with a header row.
pub fn distribution_csv(dist: &[(Opening, usize)]) -> String {
    let mut out = String::from("first_two_words,count\n");
    for (o, c) in dist {
        let label = o.to_string();
        if label.contains([',', '"']) {
            out.push_str(&format!("\"{}\",{c}\n", label.replace('"', "\"\"")));
        } else {
            out.push_str(&format!("{label},{c}\n"));
        }
    }
    out
}
