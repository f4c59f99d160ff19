//! Seeded simulation, and the likelihood of the simulated series under the
//! generating model and a rival.
//!
//! ```text
//! cargo run --example simulate_series
//! ```

use fraghmm::fixtures::{reference_hmm1, reference_hmm2};
use fraghmm::hmm::{fragment_likelihood, log_likelihood_full, simulate};

fn main() -> fraghmm::Result<()> {
    let truth = reference_hmm2();
    let y = simulate(&truth, 2000, 99)?;
    assert_eq!(y, simulate(&truth, 2000, 99)?);

    let mut counts = vec![0usize; y.alphabet_size()];
    for &s in y.symbols() {
        counts[s] += 1;
    }
    println!("symbol counts {counts:?}, stationary symbol law {:?}", truth.symbol_distribution());

    for h in [&truth, &reference_hmm1()] {
        let ll = log_likelihood_full(h, &y)?;
        let head = fragment_likelihood(h, y.window(0, 5))?;
        println!("{}: log-likelihood {:.2}, first five symbols {:.5}", h.label(), ll.value, head);
    }
    Ok(())
}
