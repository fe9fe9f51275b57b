//! Inter-annotator agreement on 4-point Likert scores: Randolph's kappa and
//! Goodman-Kruskal's gamma, including the case where gamma is undefined.
//!
//! cargo run --example agreement

use depqg::metrics::{agreement, gk_gamma, randolph_kappa, Criterion, RatingMatrix};

fn main() -> anyhow::Result<()> {
    // rows are items, columns are judges
    let rows = vec![
        vec![4, 4, 3],
        vec![3, 3, 3],
        vec![1, 2, 1],
        vec![2, 2, 2],
        vec![4, 3, 4],
        vec![1, 1, 2],
    ];
    let m = RatingMatrix::likert(rows)?;
    let r = agreement(&m)?;
    println!("{} items x {} judges: kappa {:.3}, gamma {}", m.items(), m.raters(), r.kappa, r.gamma);

    // one judge always answers 2: no untied pair, gamma is reported as NA/2
    let a = [1, 2, 3, 4];
    let b = [2, 2, 2, 2];
    println!("constant judge: gamma {}", gk_gamma(&a, &b)?);
    let m = RatingMatrix::from_raters(&[a.to_vec(), b.to_vec()], 4)?;
    println!("constant judge: kappa {:.3}", randolph_kappa(&m)?);

    // full disagreement on ordering
    println!("reversed: gamma {}", gk_gamma(&[1, 2, 3, 4], &[4, 3, 2, 1])?);

    println!("\ncriteria:");
    for c in Criterion::ALL {
        println!("  {c} {}  {}", c.arrow(), c.statement());
    }
    Ok(())
}
