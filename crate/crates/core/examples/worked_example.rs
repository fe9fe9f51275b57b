//! Induce one template from a single training pair and fire it at a new
//! sentence.
//!
//! cargo run --example worked_example

use depqg::{apply_template, build_idf, guard_matches, induce_pair, parse_conllu, render_template, TrainingTriple};

const TRAIN: &str = "# sent_id = train-1
# text = John graduated in 2010
1\tJohn\tJohn\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tgraduated\tgraduate\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tin\tin\tADP\t_\t_\t4\tcase\t_\t_
4\t2010\t2010\tNUM\t_\t_\t2\tobl\t_\t_
";

const UNSEEN: &str = "# sent_id = new-1
# text = Stocks crashed during previous summer months
1\tStocks\tstock\tNOUN\t_\tNumber=Plur\t2\tnsubj\t_\t_
2\tcrashed\tcrash\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tduring\tduring\tADP\t_\t_\t6\tcase\t_\t_
4\tprevious\tprevious\tADJ\t_\t_\t6\tamod\t_\t_
5\tsummer\tsummer\tNOUN\t_\t_\t6\tcompound\t_\t_
6\tmonths\tmonth\tNOUN\t_\tNumber=Plur\t2\tobl\t_\t_
";

fn main() -> anyhow::Result<()> {
    let train = parse_conllu(TRAIN)?;
    let idf = build_idf(&[train.as_slice()])?;
    let triple = TrainingTriple::new(train[0].clone(), "When did John graduate?", "in 2010");
    let template = induce_pair(&triple, &idf, depqg::induce::DEFAULT_THETA_CONTENT)?;
    println!("template: {}", render_template(&template));

    let unseen = parse_conllu(UNSEEN)?.remove(0);
    println!("guard holds on {:?}: {}", unseen.text(), guard_matches(&template, &unseen));
    let c = apply_template(&template, 0, &unseen)?;
    println!("Q: {}\nA: {}", c.question, c.answer);
    Ok(())
}
