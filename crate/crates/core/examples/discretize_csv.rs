//! Tercile discretisation of a CSV column, then reuse of the saved cut
//! points on fresh readings.
//!
//! ```text
//! cargo run --example discretize_csv
//! ```

use std::fs;

use fraghmm::ingest::{discretize, load_csv, DiscretizationSpec, MissingPolicy};

fn main() -> fraghmm::Result<()> {
    let dir = std::env::temp_dir().join("fraghmm-discretize-example");
    fs::create_dir_all(&dir).map_err(|e| fraghmm::Error::io(&dir, e))?;
    let csv = dir.join("ozone.csv");
    let readings = "hour,ozone\n0,31.5\n1,28.0\n2,\n3,45.2\n4,52.9\n5,40.1\n6,22.4\n7,35.0\n8,61.3\n";
    fs::write(&csv, readings).map_err(|e| fraghmm::Error::io(&csv, e))?;

    let series = load_csv(&csv, "ozone", MissingPolicy::ForwardFill, b',')?;
    let (seq, spec) = discretize(&series, 3)?;
    println!("{} readings, {} filled", series.values.len(), series.missing);
    println!("cut points {:?}", spec.cut_points);
    println!("symbols    {:?}", seq.symbols());

    let spec_path = dir.join("ozone.spec.json");
    spec.save(&spec_path)?;
    let reloaded = DiscretizationSpec::load(&spec_path)?;
    let fresh = [20.0, 33.0, 70.0];
    for v in fresh {
        let s = reloaded.symbol(v);
        println!("{v:>5} -> {} ({})", s, reloaded.labels[s]);
    }
    Ok(())
}
