//! Baum-Welch fits with three and four hidden states on one simulated series.
//!
//! ```text
//! cargo run --release --example fit_models
//! ```

use fraghmm::baum_welch::{fit, FitConfig};
use fraghmm::fixtures::reference_hmm2;
use fraghmm::hmm::{log_likelihood_full, simulate};

fn main() -> fraghmm::Result<()> {
    let y = simulate(&reference_hmm2(), 4560, 3)?;

    for states in [3, 4] {
        let cfg = FitConfig {
            n_restarts: 3,
            ..FitConfig::new(states, 1)
        };
        let res = fit(&y, &cfg)?;
        let full = log_likelihood_full(&res.model, &y)?;
        println!(
            "{states} states: {} EM iterations (converged: {}), restart {} won, log-likelihood {:.2}",
            res.iterations_used, res.converged, res.restart, full.value
        );
        println!("{}", res.model.to_json()?);
    }
    Ok(())
}
