//! How questions open: counts of their first two words, written as CSV.
//!
//! cargo run --example question_word_distribution [questions.txt]

use depqg::metrics::{distribution_csv, first_two_words_dist};

const SAMPLE: &str = "Vad gör hon?
vad gör han efter jobbet?
När kom tåget?
Vad heter hunden?
Vem ringde?
När kom du hem?
Varför?
";

fn main() -> anyhow::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p)?,
        None => SAMPLE.to_string(),
    };
    let questions: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let dist = first_two_words_dist(&questions);
    print!("{}", distribution_csv(&dist));
    let total: usize = dist.iter().map(|(_, c)| c).sum();
    if let Some((top, c)) = dist.first() {
        println!("\nmost common opening: \"{top}\" ({:.0}% of {total})", 100.0 * *c as f64 / total as f64);
    }
    Ok(())
}
