//! The whole workflow in one place: readings, discretisation, two fitted
//! models, and the sampled and exact comparisons between them.
//!
//! ```text
//! cargo run --release --example pipeline
//! ```

use fraghmm::baum_welch::{fit, FitConfig};
use fraghmm::fixtures::reference_hmm2;
use fraghmm::fragment_test::sweep;
use fraghmm::hmm::simulate;
use fraghmm::ingest::{discretize, RawSeries};
use fraghmm::report::{CompareReport, ExactReport, Format};

fn main() -> fraghmm::Result<()> {
    let truth = reference_hmm2();
    let latent = simulate(&truth, 4560, 5)?;
    let values = latent
        .symbols()
        .iter()
        .enumerate()
        .map(|(i, &s)| 20.0 * s as f64 + (i % 13) as f64)
        .collect();
    let series = RawSeries {
        values,
        source: "simulated".into(),
        column: "reading".into(),
        missing: 0,
    };
    let (y, spec) = discretize(&series, 3)?;
    println!("tercile cut points {:?}", spec.cut_points);

    let small = fit(&y, &FitConfig::new(3, 1))?.model.with_label("fit-3");
    let large = fit(&y, &FitConfig::new(4, 1))?.model.with_label("fit-4");

    let sampled = sweep(&y, &small, &large, 3, 7, 1000, 0)?;
    print!("\n{}", CompareReport::new(&small, &large, sampled).render(Format::Text)?);

    // Only possible here because the generating model is known.
    let exact = ExactReport::compute(&truth, &small, &large, 3, 7)?;
    print!("\n{}", exact.render(Format::Text)?);
    Ok(())
}
