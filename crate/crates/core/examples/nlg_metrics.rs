//! Corpus-level BLEU-1..4, ROUGE-L and CIDEr for generated questions against
//! one reference each.
//!
//! cargo run --example nlg_metrics

use depqg::metrics::{bleu_n, cider, rouge_l, rouge_l_corpus, ROUGE_BETA};

fn main() -> anyhow::Result<()> {
    let hyps = [
        "när tog John examen ?",
        "vad köpte hon i maj ?",
        "vem besökte Rom ?",
        "var bor familjen nu ?",
    ];
    let refs = [
        "när tog John sin examen ?",
        "vad köpte Anna i maj ?",
        "vem var det som besökte Rom ?",
        "var bor familjen ?",
    ];
    for (n, b) in bleu_n(&hyps, &refs, 4)?.iter().enumerate() {
        println!("BLEU-{}  {b:.4}", n + 1);
    }
    println!("ROUGE-L {:.4}", rouge_l_corpus(&hyps, &refs, ROUGE_BETA)?);
    println!("CIDEr   {:.4}", cider(&hyps, &refs)?);

    println!();
    for (h, r) in hyps.iter().zip(&refs) {
        println!("{:.3}  {h}  |  {r}", rouge_l(h, &[r], ROUGE_BETA));
    }
    Ok(())
}
