#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use depqg::conllu::{parse_conllu, DepTree, RelPath, Token};
use depqg::induce::{build_idf, IdfModel, TrainingTriple};
use depqg::rank::{build_morph_model, build_qword_model, RankModels, Weights};
use depqg::template::{Attr, Template, TemplateExpr};
use rand::seq::SliceRandom;
use rand::Rng;

pub const GRADUATED: &str = "# sent_id = graduated
# text = John graduated in 2010
1\tJohn\tJohn\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tgraduated\tgraduate\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tin\tin\tADP\t_\t_\t4\tcase\t_\t_
4\t2010\t2010\tNUM\t_\t_\t2\tobl\t_\t_
";

pub const STOCKS: &str = "# sent_id = stocks
# text = Stocks crashed during previous summer months
1\tStocks\tstock\tNOUN\t_\tNumber=Plur\t2\tnsubj\t_\t_
2\tcrashed\tcrash\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tduring\tduring\tADP\t_\t_\t6\tcase\t_\t_
4\tprevious\tprevious\tADJ\t_\t_\t6\tamod\t_\t_
5\tsummer\tsummer\tNOUN\t_\t_\t6\tcompound\t_\t_
6\tmonths\tmonth\tNOUN\t_\tNumber=Plur\t2\tobl\t_\t_
";

pub fn tree(src: &str) -> DepTree {
    parse_conllu(src).expect("fixture parses").remove(0)
}

pub const QUESTION_WORDS: &[&str] = &["vad", "när", "vem", "var", "hur", "vilka"];
const DEPRELS: &[&str] = &["nsubj", "obj", "obl", "advmod", "amod", "case", "det", "nmod", "aux", "conj"];
const UPOS: &[&str] = &["NOUN", "VERB", "ADJ", "ADP", "PRON", "PROPN", "ADV", "DET"];

/// Random well-formed tree. Forms come from a small vocabulary so that
/// words repeat within and across sentences.
pub fn random_tree<R: Rng>(rng: &mut R, sent_id: &str, max_len: usize) -> DepTree {
    let n = rng.gen_range(2..=max_len.max(2));
    let root = rng.gen_range(1..=n as u32);
    // attach nodes in a random order, each to an already attached node
    let mut order: Vec<u32> = (1..=n as u32).filter(|&i| i != root).collect();
    order.shuffle(rng);
    let mut attached = vec![root];
    let mut heads = HashMap::new();
    for id in order {
        let h = *attached.choose(rng).unwrap();
        heads.insert(id, h);
        attached.push(id);
    }
    let tokens = (1..=n as u32)
        .map(|id| {
            let w = rng.gen_range(0..30);
            let form = if rng.gen_bool(0.1) {
                format!("W{w}")
            } else {
                format!("w{w}")
            };
            let lemma = format!("l{}", w % 20);
            let upos = *UPOS.choose(rng).unwrap();
            let (head, deprel) = match heads.get(&id) {
                Some(&h) => (h, *DEPRELS.choose(rng).unwrap()),
                None => (0, "root"),
            };
            let t = Token::new(id, &form, &lemma, upos, head, deprel);
            if rng.gen_bool(0.3) {
                t.with_feats(&[("Number", if rng.gen() { "Sing" } else { "Plur" })])
            } else {
                t
            }
        })
        .collect();
    DepTree::new(sent_id, "", tokens).expect("generated tree is valid")
}

/// Background documents in which every question word is frequent.
pub fn question_word_docs(n: usize) -> Vec<DepTree> {
    (0..n)
        .map(|i| {
            let mut toks: Vec<Token> = QUESTION_WORDS
                .iter()
                .enumerate()
                .map(|(j, w)| Token::new(j as u32 + 2, w, w, "ADV", 1, "advmod"))
                .collect();
            toks.insert(0, Token::new(1, "x", "x", "VERB", 0, "root"));
            DepTree::new(&format!("bg{i}"), "", toks).unwrap()
        })
        .collect()
}

pub fn idf_over(trees: &[DepTree]) -> IdfModel {
    let docs: Vec<Vec<&DepTree>> = trees.iter().map(|t| vec![t]).collect();
    build_idf(&docs).unwrap()
}

fn yield_text(tree: &DepTree, id: u32) -> String {
    tree.subtree_yield(id).text()
}

/// A question built from pieces of `tree` (subtree yields, node forms,
/// lemmas) and low-IDF question words, plus an answer that occurs in the
/// sentence.
pub fn random_triple<R: Rng>(rng: &mut R, tree: DepTree) -> TrainingTriple {
    let n = tree.len() as u32;
    let mut q: Vec<String> = vec![QUESTION_WORDS.choose(rng).unwrap().to_string()];
    for _ in 0..rng.gen_range(1..=3) {
        let id = rng.gen_range(1..=n);
        let tok = tree.token(id).unwrap();
        match rng.gen_range(0..4) {
            0 => q.push(yield_text(&tree, id)),
            1 => q.push(tok.lemma.clone()),
            2 => q.push(QUESTION_WORDS.choose(rng).unwrap().to_string()),
            _ => q.push(tok.form.clone()),
        }
    }
    q.push("?".into());
    let answer = if rng.gen_bool(0.5) {
        yield_text(&tree, rng.gen_range(1..=n))
    } else {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(a..=n.min(a + 2));
        (a..=b)
            .map(|i| tree.token(i).unwrap().form.clone())
            .collect::<Vec<_>>()
            .join(" ")
    };
    TrainingTriple::new(tree, &q.join(" "), &answer)
}

const LITERALS: &[&str] = &[
    "vad", "När", "?", "!", "_", "a.b", "x#1", "r", "r.nsubj", "ö", "2010", "-", "'", "l:x", "é",
];
const LABELS: &[&str] = &["nsubj", "obj", "obl", "obl:tmod", "advcl", "nmod:poss", "acl:relcl", "case", "x_y"];

pub fn random_path<R: Rng>(rng: &mut R) -> RelPath {
    let steps: Vec<&str> = (0..rng.gen_range(0..=3))
        .map(|_| *LABELS.choose(rng).unwrap())
        .collect();
    RelPath::new(&steps)
}

pub fn random_expr<R: Rng>(rng: &mut R) -> TemplateExpr {
    let hint = rng.gen_bool(0.7).then(|| rng.gen_range(1..200));
    match rng.gen_range(0..3) {
        0 => TemplateExpr::literal(LITERALS.choose(rng).unwrap()),
        1 => {
            let attr = if rng.gen() { Attr::Form } else { Attr::Lemma };
            TemplateExpr::node(random_path(rng), attr, hint)
        }
        _ => TemplateExpr::subtree(random_path(rng), hint),
    }
}

/// Arbitrary well-formed template, metadata included.
pub fn random_template<R: Rng>(rng: &mut R) -> Template {
    let q = (0..rng.gen_range(1..6)).map(|_| random_expr(rng)).collect();
    let a = (0..rng.gen_range(1..4)).map(|_| random_expr(rng)).collect();
    let mut t = Template::new(q, a);
    if rng.gen_bool(0.5) {
        t.support = rng.gen_range(1..50);
        t.sources = (0..rng.gen_range(0..4)).map(|i| format!("s{i}-{}", rng.gen_range(0..99))).collect();
    }
    if rng.gen_bool(0.5) {
        t = t.with_root_upos(Some(UPOS.choose(rng).unwrap().to_string()));
    }
    t
}

/// Models trained on `treebank` and `triples` with default settings.
pub fn models_for(treebank: &[DepTree], triples: &[TrainingTriple]) -> RankModels {
    let morph = build_morph_model(treebank, 3, 1.0).unwrap();
    let qword = build_qword_model(triples, 1.0).unwrap();
    RankModels::new(None, morph, qword, Weights::default()).unwrap()
}

// ---- brute-force oracles ----

/// Randolph's kappa by counting agreeing ordered rater pairs item by item.
pub fn kappa_oracle(rows: &[Vec<u8>], k: u8) -> f64 {
    let r = rows[0].len();
    let mut agree = 0usize;
    for row in rows {
        for a in 0..r {
            for b in 0..r {
                if a != b && row[a] == row[b] {
                    agree += 1;
                }
            }
        }
    }
    let po = agree as f64 / (rows.len() * r * (r - 1)) as f64;
    let pe = 1.0 / k as f64;
    (po - pe) / (1.0 - pe)
}

/// Pooled (C, D) over every item pair and every unordered rater pair.
pub fn gamma_counts_oracle(rows: &[Vec<u8>]) -> (u64, u64) {
    let r = rows[0].len();
    let (mut c, mut d) = (0, 0);
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            if i >= j {
                continue;
            }
            for a in 0..r {
                for b in a + 1..r {
                    let x = rows[i][a].cmp(&rows[j][a]);
                    let y = rows[i][b].cmp(&rows[j][b]);
                    use std::cmp::Ordering::Equal;
                    if x != Equal && y != Equal {
                        if x == y {
                            c += 1;
                        } else {
                            d += 1;
                        }
                    }
                }
            }
        }
    }
    (c, d)
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| w.trim_end_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// All n-grams as a list, in order, with repetitions.
fn grams(t: &[String], n: usize) -> Vec<Vec<String>> {
    if t.len() < n {
        return Vec::new();
    }
    (0..=t.len() - n).map(|i| t[i..i + n].to_vec()).collect()
}

fn count_in(g: &[String], list: &[Vec<String>]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

pub fn bleu_oracle(hyps: &[&str], refs: &[&str], max_n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let (mut c, mut r) = (0usize, 0usize);
    for (h, rf) in hyps.iter().zip(refs) {
        c += toks(h).len();
        r += toks(rf).len();
    }
    let mut precisions = Vec::new();
    for n in 1..=max_n {
        let (mut num, mut den) = (0usize, 0usize);
        for (h, rf) in hyps.iter().zip(refs) {
            let hg = grams(&toks(h), n);
            let rg = grams(&toks(rf), n);
            let mut seen: Vec<Vec<String>> = Vec::new();
            for g in &hg {
                if seen.contains(g) {
                    continue;
                }
                seen.push(g.clone());
                num += count_in(g, &hg).min(count_in(g, &rg));
            }
            den += hg.len();
        }
        precisions.push(if den == 0 { 0.0 } else { num as f64 / den as f64 });
        let bp = if c == 0 {
            0.0
        } else if c < r {
            (1.0 - r as f64 / c as f64).exp()
        } else {
            1.0
        };
        let geo = if precisions.contains(&0.0) {
            0.0
        } else {
            (precisions.iter().map(|p| p.ln()).sum::<f64>() / n as f64).exp()
        };
        out.push(bp * geo);
    }
    out
}

/// Full-table LCS.
pub fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] {
                t[i - 1][j - 1] + 1
            } else {
                t[i - 1][j].max(t[i][j - 1])
            };
        }
    }
    t[a.len()][b.len()]
}

pub fn rouge_oracle(hyps: &[&str], refs: &[&str], beta: f64) -> f64 {
    let mut sum = 0.0;
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (toks(h), toks(r));
        let l = lcs_oracle(&h, &r) as f64;
        if l > 0.0 {
            let p = l / h.len() as f64;
            let rc = l / r.len() as f64;
            sum += (1.0 + beta * beta) * p * rc / (rc + beta * beta * p);
        }
    }
    sum / hyps.len() as f64
}

pub fn cider_oracle(hyps: &[&str], refs: &[&str]) -> f64 {
    let n_docs = refs.len() as f64;
    let mut total = 0.0;
    for (h, r) in hyps.iter().zip(refs) {
        let mut item = 0.0;
        for n in 1..=4 {
            let hg = grams(&toks(h), n);
            let rg = grams(&toks(r), n);
            let df = |g: &Vec<String>| {
                refs.iter()
                    .filter(|x| grams(&toks(x), n).contains(g))
                    .count()
                    .max(1) as f64
            };
            let mut vocab: Vec<Vec<String>> = hg.iter().chain(rg.iter()).cloned().collect();
            vocab.sort();
            vocab.dedup();
            let mut dot = 0.0;
            let mut nh = 0.0;
            let mut nr = 0.0;
            for g in &vocab {
                let idf = (n_docs / df(g)).ln();
                let x = count_in(g, &hg) as f64 * idf;
                let y = count_in(g, &rg) as f64 * idf;
                dot += x * y;
                nh += x * x;
                nr += y * y;
            }
            if nh > 0.0 && nr > 0.0 {
                item += dot / (nh.sqrt() * nr.sqrt());
            }
        }
        total += 10.0 * item / 4.0;
    }
    total / hyps.len() as f64
}

/// Hand tally of opening bigrams, for checking the distribution report.
pub fn opening_counts(questions: &[&str]) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for q in questions {
        let t = toks(q);
        if t.is_empty() {
            continue;
        }
        let key = t.iter().take(2).cloned().collect::<Vec<_>>().join(" ");
        *m.entry(key).or_insert(0) += 1;
    }
    m
}
