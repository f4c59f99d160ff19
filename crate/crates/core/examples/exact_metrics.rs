//! Closed-form expected fragment likelihoods for two candidates scored
//! against a known generating model.
//!
//! ```text
//! cargo run --example exact_metrics
//! ```

use fraghmm::exact::{dominance_threshold, growth_ratios, ComparisonOperators};
use fraghmm::fixtures::{reference_hmm1, reference_hmm2};

fn main() -> fraghmm::Result<()> {
    let truth = reference_hmm2();
    let other = reference_hmm1();

    let ops = ComparisonOperators::new(&truth, &truth, &other)?;
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "r", "mu(truth)", "mu(other)", "difference", "variance");
    for row in ops.table(10)? {
        println!(
            "{:>3} {:>12.6} {:>12.6} {:>12.6} {:>12.3e}",
            row.r, row.mu_1, row.mu_2, row.mu_12, row.sigma2
        );
    }

    let ratios = growth_ratios(&truth, &other, 40)?;
    let last = ratios.ratios.last().unwrap();
    println!(
        "\ndecay of the other candidate: mu({})/mu({}) = {:.6}, Perron root {:.6}",
        last.r + 1,
        last.r,
        last.ratio,
        ratios.lambda_max
    );

    match dominance_threshold(&truth, &truth, &other, 30)? {
        Some(r) => println!("the generating model scores higher for every r from {r} to 30"),
        None => println!("no dominance up to r = 30"),
    }
    Ok(())
}
