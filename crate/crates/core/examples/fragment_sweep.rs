//! Sampled Z-tests over a range of fragment lengths on a simulated series.
//!
//! ```text
//! cargo run --example fragment_sweep
//! ```

use fraghmm::fixtures::{reference_hmm1, reference_hmm2};
use fraghmm::fragment_test::sweep;
use fraghmm::hmm::simulate;
use fraghmm::report::{CompareReport, Format};

fn main() -> fraghmm::Result<()> {
    let (h1, h2) = (reference_hmm1(), reference_hmm2());
    let y = simulate(&h2, 4560, 7)?;

    // HMM2 generated the data, so negative Z values favour it.
    let result = sweep(&y, &h1, &h2, 3, 7, 1000, 0)?;
    for t in &result.results {
        println!(
            "r = {}: p(model1 better) = {:.3e}, p(model2 better) = {:.3e}",
            t.r,
            t.p_value,
            t.p_value_favoring_second()
        );
    }
    println!();
    print!("{}", CompareReport::new(&h1, &h2, result).render(Format::Text)?);
    Ok(())
}
