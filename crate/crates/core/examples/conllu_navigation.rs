//! Parse CoNLL-U and move around a tree with relation paths.
//!
//! cargo run --example conllu_navigation [file.conllu]

use depqg::{parse_conllu, RelPath};

const SAMPLE: &str = "# sent_id = s1
# text = Han köpte en röd bil och en cykel
1\tHan\than\tPRON\t_\tCase=Nom\t2\tnsubj\t_\t_
2\tköpte\tköpa\tVERB\t_\tTense=Past\t0\troot\t_\t_
3\ten\ten\tDET\t_\t_\t5\tdet\t_\t_
4\tröd\tröd\tADJ\t_\t_\t5\tamod\t_\t_
5\tbil\tbil\tNOUN\t_\t_\t2\tobj\t_\t_
6\toch\toch\tCCONJ\t_\t_\t8\tcc\t_\t_
7\ten\ten\tDET\t_\t_\t8\tdet\t_\t_
8\tcykel\tcykel\tNOUN\t_\t_\t5\tconj\t_\t_
";

fn main() -> anyhow::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(p)?,
        None => SAMPLE.to_string(),
    };
    for tree in parse_conllu(&text)? {
        println!("{} ({} tokens): {}", tree.sent_id(), tree.len(), tree.text());
        for tok in tree.tokens() {
            let path = tree.path_to(tok.id);
            let back = tree.resolve_path(&path, Some(tok.id))?;
            assert_eq!(back.id, tok.id);
            println!("  {:>2} {:<10} {:<16} subtree: {}", tok.id, tok.form, path.to_string(), tree.subtree_yield(tok.id).text());
        }
    }

    // without a hint the leftmost complete route wins
    let tree = parse_conllu(SAMPLE)?.remove(0);
    let det: RelPath = "r.obj.det".parse()?;
    println!("r.obj.det -> {}", tree.resolve_path(&det, None)?.form);
    match tree.resolve_path(&"r.iobj".parse()?, None) {
        Ok(t) => println!("r.iobj -> {}", t.form),
        Err(e) => println!("r.iobj -> {e}"),
    }
    Ok(())
}
