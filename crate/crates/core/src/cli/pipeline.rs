use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::{input_err, load_conllu, load_triples, read_file, tsv_rows, write_file, CliError};
use crate::config::Config;
use crate::conllu::{group_documents, DepTree};
use crate::generate::{overgenerate_counted, GenCandidate};
use crate::induce::{build_idf, induce_all, template_stats, InductionReport, TemplateStats};
use crate::metrics::{bleu_n, cider, distribution_csv, first_two_words_dist, rouge_l_corpus, Opening};
use crate::rank::{
    basic_filter_with, build_morph_model, build_qword_model, generation_stats, mean_filter,
    read_idf, read_morph, read_qword, score_candidate, write_idf, write_morph, write_qword,
    FilterToggles, GenerationStats, RankModels, StageCounts,
};
use crate::template::{read_template_file, write_template_file, TemplateSet};

pub const IDF_FILE: &str = "idf.txt";
pub const MORPH_FILE: &str = "morph.txt";
pub const QWORD_FILE: &str = "qword.txt";

#[derive(Debug, Clone, Serialize)]
pub struct InduceReport {
    pub induction: InductionReport,
    pub missing_trees: usize,
    pub templates: TemplateStats,
}

impl std::fmt::Display for InduceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let r = &self.induction;
        let s = &self.templates.support;
        writeln!(f, "triples\t{}", r.triples + self.missing_trees)?;
        writeln!(f, "missing trees\t{}", self.missing_trees)?;
        writeln!(f, "induced\t{}", r.successes)?;
        writeln!(f, "alignment failures\t{}", r.alignment_failures)?;
        writeln!(f, "induction failures\t{}", r.induction_failures)?;
        writeln!(f, "templates\t{}", self.templates.count)?;
        write!(
            f,
            "support mean {:.2} std {:.2} median {} min {} max {}",
            s.mean, s.std, s.median, s.min, s.max
        )
    }
}

/// Induces templates from `triples_tsv` over the trees in `train_conllu`.
/// IDF comes from the same training trees.
pub fn cmd_induce(
    train_conllu: &Path,
    triples_tsv: &Path,
    out_templates: &Path,
    config: &Config,
) -> Result<InduceReport, CliError> {
    let trees = load_conllu(train_conllu)?;
    let loaded = load_triples(triples_tsv, &trees)?;
    if loaded.triples.is_empty() {
        return Err(CliError::Failed(format!(
            "{}: no usable triples",
            triples_tsv.display()
        )));
    }
    let idf = build_idf(&group_documents(&trees))?;
    let (set, induction) = induce_all(&loaded.triples, &idf, config.theta_content);
    if set.is_empty() {
        return Err(CliError::Failed(format!(
            "no template could be induced from {} triples",
            induction.triples
        )));
    }
    write_file(out_templates, &write_template_file(&set))?;
    Ok(InduceReport {
        induction,
        missing_trees: loaded.missing_trees,
        templates: template_stats(&set),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildModelsReport {
    pub idf_documents: u32,
    pub treebank_sentences: usize,
    pub morph_outcomes: usize,
    pub qword_events: usize,
    pub files: Vec<PathBuf>,
}

/// Builds the IDF and question-word models from the training triples and the
/// morphological n-gram model from the treebank files.
pub fn cmd_build_models(
    treebank: &[PathBuf],
    train_conllu: &Path,
    triples_tsv: &Path,
    models_dir: &Path,
    config: &Config,
) -> Result<BuildModelsReport, CliError> {
    let train = load_conllu(train_conllu)?;
    let idf = build_idf(&group_documents(&train))?;
    let triples = load_triples(triples_tsv, &train)?.triples;
    let qword = build_qword_model(&triples, config.alpha)?;

    let mut bank: Vec<DepTree> = Vec::new();
    for p in treebank {
        bank.extend(load_conllu(p)?);
    }
    let morph = build_morph_model(&bank, config.ngram_order, config.alpha)?;

    let files = vec![
        models_dir.join(IDF_FILE),
        models_dir.join(MORPH_FILE),
        models_dir.join(QWORD_FILE),
    ];
    write_file(&files[0], &write_idf(&idf))?;
    write_file(&files[1], &write_morph(&morph))?;
    write_file(&files[2], &write_qword(&qword))?;
    Ok(BuildModelsReport {
        idf_documents: idf.doc_count(),
        treebank_sentences: bank.len(),
        morph_outcomes: morph.outcome_count(),
        qword_events: qword.counts().values().map(|m| m.values().sum::<u64>() as usize).sum(),
        files,
    })
}

/// Reads the models written by [`cmd_build_models`]. The IDF file is optional.
pub fn load_models(models_dir: &Path, config: &Config) -> Result<RankModels, CliError> {
    let model = |name: &str| {
        let path = models_dir.join(name);
        read_file(&path).map(|text| (path, text))
    };
    let model_err = |path: PathBuf| move |source| CliError::Model { path, source };

    let (path, text) = model(MORPH_FILE)?;
    let morph = read_morph(&text, config.alpha).map_err(model_err(path))?;
    let (path, text) = model(QWORD_FILE)?;
    let qword = read_qword(&text, config.alpha).map_err(model_err(path))?;
    let idf_path = models_dir.join(IDF_FILE);
    let idf = if idf_path.exists() {
        let text = read_file(&idf_path)?;
        Some(read_idf(&text).map_err(model_err(idf_path))?)
    } else {
        None
    };
    Ok(RankModels::new(idf, morph, qword, config.weights)?)
}

/// Ranked survivors and stage counts for one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceOutput {
    pub candidates: Vec<GenCandidate>,
    pub counts: StageCounts,
    /// Applications or scorings that failed after the guard held.
    pub dropped: usize,
}

/// Overgenerate, score, basic-filter and mean-filter; survivors sorted by
/// descending score, ties in template order.
pub fn generate_for_tree(
    ts: &TemplateSet,
    tree: &DepTree,
    models: &RankModels,
    filters: FilterToggles,
) -> SentenceOutput {
    let og = overgenerate_counted(ts, tree);
    let mut dropped = og.dropped;
    let mut scored = Vec::with_capacity(og.candidates.len());
    for mut c in og.candidates {
        let t = &ts.templates[c.template_id];
        match score_candidate(&mut c, tree, t, models) {
            Ok(_) => scored.push(c),
            Err(e) => {
                log::debug!("scoring template {} on {}: {e}", c.template_id, tree.sent_id());
                dropped += 1;
            }
        }
    }
    let generated = scored.len();
    let basic = basic_filter_with(scored, filters);
    let after_basic = basic.len();
    let mut kept = mean_filter(basic);
    kept.sort_by(|a, b| {
        let (x, y) = (a.score.unwrap_or(f64::NEG_INFINITY), b.score.unwrap_or(f64::NEG_INFINITY));
        y.total_cmp(&x)
    });
    SentenceOutput {
        counts: StageCounts {
            generated,
            after_basic,
            after_mean: kept.len(),
        },
        candidates: kept,
        dropped,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateReport {
    pub stats: GenerationStats,
    pub per_sentence: BTreeMap<String, StageCounts>,
    pub dropped: usize,
    pub written: usize,
}

impl std::fmt::Display for GenerateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = &self.stats;
        writeln!(f, "sentences\t{}\tset size\t{}", s.sentences, s.set_size)?;
        writeln!(f, "stage\ttotal\tsentences\tmean\tstd\tmedian\tmin\tmax")?;
        for (name, st) in [
            ("generated", &s.generated),
            ("after basic filter", &s.after_basic),
            ("after mean filter", &s.after_mean),
        ] {
            let p = &st.per_sentence;
            writeln!(
                f,
                "{name}\t{}\t{}\t{:.2}\t{:.2}\t{}\t{}\t{}",
                st.total, st.sentences_with_any, p.mean, p.std, p.median, p.min, p.max
            )?;
        }
        write!(f, "sentences with output after mean filter\t{:.1}%", s.after_mean_pct)
    }
}

/// Runs the full pipeline over every sentence of `input_conllu` and writes
/// the survivors as newline-delimited JSON, sentence by sentence.
pub fn cmd_generate(
    templates: &Path,
    input_conllu: &Path,
    models_dir: &Path,
    out: &Path,
    config: &Config,
) -> Result<GenerateReport, CliError> {
    let models = load_models(models_dir, config)?;
    let ts = read_template_file(&read_file(templates)?).map_err(|source| CliError::Template {
        path: templates.to_path_buf(),
        source,
    })?;
    let trees = load_conllu(input_conllu)?;
    let outputs: Vec<SentenceOutput> = trees
        .par_iter()
        .map(|tree| generate_for_tree(&ts, tree, &models, config.filters))
        .collect();

    let mut ndjson = String::new();
    let mut per_sentence = BTreeMap::new();
    let mut dropped = 0;
    let mut written = 0;
    for (tree, o) in trees.iter().zip(&outputs) {
        for c in &o.candidates {
            ndjson.push_str(&serde_json::to_string(c).expect("candidate serializes"));
            ndjson.push('\n');
        }
        written += o.candidates.len();
        dropped += o.dropped;
        per_sentence.insert(tree.sent_id().to_string(), o.counts);
    }
    write_file(out, &ndjson)?;
    Ok(GenerateReport {
        stats: generation_stats(&per_sentence, None),
        per_sentence,
        dropped,
        written,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub items: usize,
    pub bleu: Vec<f64>,
    pub rouge_l: f64,
    /// Absent for single-item corpora.
    pub cider: Option<f64>,
}

impl MetricsReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        for (i, b) in self.bleu.iter().enumerate() {
            let _ = writeln!(out, "BLEU-{}\t{b:.4}", i + 1);
        }
        let _ = writeln!(out, "ROUGE-L\t{:.4}", self.rouge_l);
        match self.cider {
            Some(c) => {
                let _ = writeln!(out, "CIDEr\t{c:.4}");
            }
            None => out.push_str("CIDEr\t-\n"),
        }
        out
    }
}

/// Scores a TSV of `id`, `hypothesis`, `reference` rows.
pub fn cmd_metrics(tsv: &Path, out: Option<&Path>, config: &Config) -> Result<MetricsReport, CliError> {
    let text = read_file(tsv)?;
    let mut hyps = Vec::new();
    let mut refs = Vec::new();
    for (line, cols) in tsv_rows(&text, "id\t") {
        if cols.len() != 3 {
            return Err(input_err(
                tsv,
                line,
                format!("expected 3 columns (id, hypothesis, reference), got {}", cols.len()),
            ));
        }
        hyps.push(cols[1]);
        refs.push(cols[2]);
    }
    let bleu = bleu_n(&hyps, &refs, 4)?;
    let rouge_l = rouge_l_corpus(&hyps, &refs, config.rouge_beta)?;
    let cider = if hyps.len() >= 2 {
        Some(cider(&hyps, &refs)?)
    } else {
        log::warn!("CIDEr needs at least two items; skipped");
        None
    };
    let report = MetricsReport {
        items: hyps.len(),
        bleu,
        rouge_l,
        cider,
    };
    if let Some(out) = out {
        write_file(out, &report.to_tsv())?;
    }
    Ok(report)
}

/// First-two-words distribution of a question file. With `column` (1-based),
/// questions are taken from that tab-separated column; otherwise each line
/// is one question.
pub fn cmd_stats(
    questions: &Path,
    column: Option<usize>,
    out_csv: &Path,
) -> Result<Vec<(Opening, usize)>, CliError> {
    let text = read_file(questions)?;
    let mut qs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match column {
            None => qs.push(line),
            Some(c) => match line.split('\t').nth(c.saturating_sub(1)) {
                Some(q) if c > 0 => qs.push(q),
                _ => return Err(input_err(questions, i + 1, format!("no column {c}"))),
            },
        }
    }
    let dist = first_two_words_dist(&qs);
    write_file(out_csv, &distribution_csv(&dist))?;
    Ok(dist)
}
