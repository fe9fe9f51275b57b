//! The full pipeline in memory: induce templates from a few training pairs,
//! build the ranking models and generate ranked questions for new sentences.
//!
//! cargo run --example overgenerate_and_rank

use depqg::cli::generate_for_tree;
use depqg::conllu::group_documents;
use depqg::rank::{build_morph_model, build_qword_model, FilterToggles, Weights};
use depqg::{build_idf, induce_all, parse_conllu, render_template, Config, RankModels, TrainingTriple};

const TRAIN: &str = "# newdoc
# sent_id = t1
# text = Anna bought a car in May
1\tAnna\tAnna\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tbought\tbuy\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\ta\ta\tDET\t_\t_\t4\tdet\t_\t_
4\tcar\tcar\tNOUN\t_\tNumber=Sing\t2\tobj\t_\t_
5\tin\tin\tADP\t_\t_\t6\tcase\t_\t_
6\tMay\tMay\tPROPN\t_\t_\t2\tobl\t_\t_

# newdoc
# sent_id = t2
# text = Peter visited Rome in 2019
1\tPeter\tPeter\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tvisited\tvisit\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tRome\tRome\tPROPN\t_\t_\t2\tobj\t_\t_
4\tin\tin\tADP\t_\t_\t5\tcase\t_\t_
5\t2019\t2019\tNUM\t_\t_\t2\tobl\t_\t_

# newdoc
# sent_id = t3
# text = What did the children see and when did they leave
1\tWhat\twhat\tPRON\t_\t_\t4\tobj\t_\t_
2\tdid\tdo\tAUX\t_\tTense=Past\t4\taux\t_\t_
3\tthe\tthe\tDET\t_\t_\t4\tdet\t_\t_
4\tchildren\tchild\tNOUN\t_\tNumber=Plur\t0\troot\t_\t_
5\tsee\tsee\tVERB\t_\t_\t4\tacl\t_\t_
6\tand\tand\tCCONJ\t_\t_\t10\tcc\t_\t_
7\twhen\twhen\tADV\t_\t_\t10\tadvmod\t_\t_
8\tdid\tdo\tAUX\t_\tTense=Past\t10\taux\t_\t_
9\tthey\tthey\tPRON\t_\t_\t10\tnsubj\t_\t_
10\tleave\tleave\tVERB\t_\t_\t4\tconj\t_\t_

# newdoc
# sent_id = t4
# text = Who knows what they did and when
1\tWho\twho\tPRON\t_\t_\t2\tnsubj\t_\t_
2\tknows\tknow\tVERB\t_\tTense=Pres\t0\troot\t_\t_
3\twhat\twhat\tPRON\t_\t_\t5\tobj\t_\t_
4\tthey\tthey\tPRON\t_\t_\t5\tnsubj\t_\t_
5\tdid\tdo\tVERB\t_\tTense=Past\t2\tccomp\t_\t_
6\tand\tand\tCCONJ\t_\t_\t7\tcc\t_\t_
7\twhen\twhen\tADV\t_\t_\t5\tconj\t_\t_
";

const NEW: &str = "# sent_id = n1
# text = Maria sold her house in June
1\tMaria\tMaria\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tsold\tsell\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\ther\tshe\tPRON\t_\t_\t4\tnmod:poss\t_\t_
4\thouse\thouse\tNOUN\t_\tNumber=Sing\t2\tobj\t_\t_
5\tin\tin\tADP\t_\t_\t6\tcase\t_\t_
6\tJune\tJune\tPROPN\t_\t_\t2\tobl\t_\t_

# sent_id = n2
# text = Tom met Lisa in Paris
1\tTom\tTom\tPROPN\t_\t_\t2\tnsubj\t_\t_
2\tmet\tmeet\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\tLisa\tLisa\tPROPN\t_\t_\t2\tobj\t_\t_
4\tin\tin\tADP\t_\t_\t5\tcase\t_\t_
5\tParis\tParis\tPROPN\t_\t_\t2\tobl\t_\t_
";

fn main() -> anyhow::Result<()> {
    let config = Config::default();
    let train = parse_conllu(TRAIN)?;
    // question words occur in the IDF corpus, so they count as function words
    let idf = build_idf(&group_documents(&train))?;

    let pairs = [
        ("t1", "What did Anna buy?", "a car"),
        ("t1", "When did Anna buy a car?", "in May"),
        ("t2", "Who visited Rome?", "Peter"),
        ("t2", "What did Peter visit?", "Rome"),
    ];
    let triples: Vec<TrainingTriple> = pairs
        .iter()
        .map(|(id, q, a)| {
            let tree = train.iter().find(|t| t.sent_id() == *id).unwrap().clone();
            TrainingTriple::new(tree, q, a)
        })
        .collect();

    let (templates, report) = induce_all(&triples, &idf, config.theta_content);
    println!("{} of {} pairs induced:", report.successes, report.triples);
    for t in templates.iter() {
        println!("  {}", render_template(t));
    }

    let morph = build_morph_model(&train, config.ngram_order, config.alpha)?;
    let qword = build_qword_model(&triples, config.alpha)?;
    let models = RankModels::new(Some(idf), morph, qword, Weights::default())?;

    for tree in parse_conllu(NEW)? {
        let out = generate_for_tree(&templates, &tree, &models, FilterToggles::default());
        println!(
            "\n{} ({} generated, {} after basic filter, {} kept)",
            tree.text(),
            out.counts.generated,
            out.counts.after_basic,
            out.counts.after_mean
        );
        for c in &out.candidates {
            println!("  {:8.3}  {}  ->  {}", c.score.unwrap_or(f64::NAN), c.question, c.answer);
        }
    }
    Ok(())
}
