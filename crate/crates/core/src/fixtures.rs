//! Bundled models.
//!
//! `reference_hmm1` (3 hidden states) and `reference_hmm2` (4 hidden states)
//! are two models fitted to tercile-discretised daily ozone readings, with
//! three observable categories each. Their entries carry six
//! decimals, so rows are renormalised on load.

use crate::hmm::Hmm;

pub const HMM1_JSON: &str = include_str!("../fixtures/hmm1.json");
pub const HMM2_JSON: &str = include_str!("../fixtures/hmm2.json");

pub fn reference_hmm1() -> Hmm {
    Hmm::from_json(HMM1_JSON).expect("bundled HMM1 fixture is valid")
}

pub fn reference_hmm2() -> Hmm {
    Hmm::from_json(HMM2_JSON).expect("bundled HMM2 fixture is valid")
}

/// A small well-mixed two-state, two-symbol model used in examples and tests.
pub fn two_state_example() -> Hmm {
    Hmm::from_rows(
        "two-state",
        &[vec![0.9, 0.1], vec![0.2, 0.8]],
        &[vec![0.8, 0.2], vec![0.3, 0.7]],
    )
    .expect("valid two-state model")
}
