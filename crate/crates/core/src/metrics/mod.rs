//! Evaluation: automatic NLG metrics, inter-annotator agreement and the
//! question-opening distribution.

pub mod agreement;
pub mod distribution;
pub mod nlg;

pub use agreement::{
    agreement, gk_gamma, randolph_kappa, AgreementError, AgreementResult, Criterion, Direction,
    Gamma, RatingMatrix, LIKERT_POINTS,
};
pub use distribution::{distribution_csv, first_two_words_dist, Opening};
pub use nlg::{bleu_n, cider, rouge_l, rouge_l_corpus, MetricError, ROUGE_BETA};
