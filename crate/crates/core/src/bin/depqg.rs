use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use depqg::cli;
use depqg::Config;

#[derive(Parser)]
#[command(name = "depqg", version, about = "Dependency-template question generation")]
struct Args {
    /// TOML config file (defaults apply to missing keys)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Induce templates from training triples
    Induce {
        /// CoNLL-U trees of the training sentences
        #[arg(long)]
        conllu: PathBuf,
        /// TSV: sent_id, question, answer
        #[arg(long)]
        triples: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Build the IDF, morphological n-gram and question-word models
    BuildModels {
        /// Treebank CoNLL-U files for the morphological model
        #[arg(long, required = true, num_args = 1..)]
        treebank: Vec<PathBuf>,
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        triples: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Overgenerate, rank and filter questions for unseen sentences
    Generate {
        #[arg(long)]
        templates: PathBuf,
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        models: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Pair generated and gold QA-pairs into a shuffled evaluation set
    ExportSurvey {
        /// TSV: sent_id, set, sentence, question, answer
        #[arg(long)]
        gold: PathBuf,
        /// Output of `generate`
        #[arg(long)]
        generated: PathBuf,
        /// Overrides the config seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Serve the judgement survey API
    Serve {
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Overrides the config seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Inter-annotator agreement per criterion
    Iaa {
        /// Judgement store or export
        #[arg(long)]
        store: PathBuf,
        /// Evaluation set, to split by dev/test and gold/generated
        #[arg(long)]
        triples: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// BLEU, ROUGE-L and CIDEr over a TSV of id, hypothesis, reference
    Metrics {
        input: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// First-two-words distribution of questions as CSV
    Stats {
        questions: PathBuf,
        /// 1-based TSV column holding the question
        #[arg(long)]
        column: Option<usize>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = Config::load_or_default(args.config.as_deref())?;
    match args.cmd {
        Cmd::Induce { conllu, triples, out } => {
            println!("{}", cli::cmd_induce(&conllu, &triples, &out, &config)?);
        }
        Cmd::BuildModels {
            treebank,
            conllu,
            triples,
            out,
        } => {
            let r = cli::cmd_build_models(&treebank, &conllu, &triples, &out, &config)?;
            println!(
                "idf documents\t{}\ntreebank sentences\t{}\nmorph outcomes\t{}\nqword events\t{}",
                r.idf_documents, r.treebank_sentences, r.morph_outcomes, r.qword_events
            );
        }
        Cmd::Generate {
            templates,
            conllu,
            models,
            out,
        } => {
            println!("{}", cli::cmd_generate(&templates, &conllu, &models, &out, &config)?);
        }
        Cmd::ExportSurvey {
            gold,
            generated,
            seed,
            out,
        } => {
            let ts = cli::cmd_export_survey(&gold, &generated, seed.unwrap_or(config.seed), &out)?;
            println!("evaluation triples\t{}", ts.len());
        }
        Cmd::Serve {
            triples,
            store,
            bind,
            seed,
        } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(cli::serve_survey(&triples, &store, &bind, seed.unwrap_or(config.seed)))?;
        }
        Cmd::Iaa { store, triples, out } => {
            print!("{}", cli::cmd_iaa(&store, triples.as_deref(), out.as_deref())?.to_tsv());
        }
        Cmd::Metrics { input, out } => {
            print!("{}", cli::cmd_metrics(&input, out.as_deref(), &config)?.to_tsv());
        }
        Cmd::Stats { questions, column, out } => {
            for (o, c) in cli::cmd_stats(&questions, column, &out)?.iter().take(20) {
                println!("{c}\t{o}");
            }
        }
    }
    Ok(())
}
