//! Parse, render, merge and store templates.
//!
//! cargo run --example template_language

use depqg::template::{read_template_file, write_template_file};
use depqg::{parse_template_line, render_template, TemplateExpr, TemplateSet};

fn main() -> anyhow::Result<()> {
    let lines = [
        "vad gör [r.nsubj#1] <r.advcl#2> ?\t<r.advcl#2>",
        "när [r] [r.nsubj#1] ?\t<r.obl#4>\t3\ts1,s7,s9\tVERB",
        "vem [r.lemma] ?\t[r.nsubj#1]",
    ];
    let mut set = TemplateSet::new();
    for line in lines {
        let t = parse_template_line(line)?;
        println!("{}", render_template(&t));
        for e in t.question.iter().chain(&t.answer) {
            let kind = match e {
                TemplateExpr::Literal(_) => "literal",
                TemplateExpr::Node { .. } => "node",
                TemplateExpr::Subtree { .. } => "subtree",
            };
            print!("  {kind}");
        }
        println!();
        set.insert(t);
    }

    // same question and answer: support adds up, sources are merged
    set.insert(parse_template_line("vem [r.lemma] ?\t[r.nsubj#1]\t1\ts42")?);
    println!("\n{} templates after merging", set.len());

    let file = write_template_file(&set);
    print!("{file}");
    assert_eq!(write_template_file(&read_template_file(&file)?), file);

    for bad in ["vad [r.nsubj ?\tx", "only a question", "[r.nsubj#x] ?\tx"] {
        println!("{bad:?}: {}", parse_template_line(bad).unwrap_err());
    }
    Ok(())
}
