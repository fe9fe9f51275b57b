//! Question generation by dependency-tree templates.
//!
//! Templates are induced from (sentence, question, answer) triples whose
//! sentences come as CoNLL-U trees ([`induce`]). At generation time every
//! template is fired at an unseen tree ([`generate`]) and the candidates are
//! scored and filtered ([`rank`]). [`metrics`] holds the evaluation tooling and
//! [`cli`] the command implementations and the survey service.

pub mod cli;
pub mod config;
pub mod conllu;
pub mod generate;
pub mod induce;
pub mod metrics;
pub mod rank;
pub mod stats;
pub mod template;
pub mod text;

pub use config::Config;
pub use conllu::{parse_conllu, DepTree, RelPath, Token};
pub use generate::{apply_template, guard_matches, overgenerate, GenCandidate};
pub use induce::{build_idf, induce_all, induce_pair, template_stats, IdfModel, TrainingTriple};
pub use rank::{basic_filter, mean_filter, score_candidate, RankModels};
pub use template::{parse_template_line, render_template, Template, TemplateExpr, TemplateSet};
