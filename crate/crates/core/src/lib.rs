//! Fragment-based comparison of discrete hidden Markov models.
//!
//! Candidate models are compared through `μ_j(r)`, the expected likelihood
//! under model `j` of a length-`r` fragment drawn from the data-generating
//! model. The crate provides
//!
//! * exact values of `μ_j(r)`, of the variance of paired likelihood
//!   differences, and of the spectral growth rates, via Kronecker operators
//!   ([`exact`]);
//! * Monte-Carlo estimates from fragments sampled out of an observed series
//!   and a one-sided Z-test between two candidates ([`fragment_test`]);
//! * the supporting pipeline: CSV ingestion and quantile discretisation
//!   ([`ingest`]), Baum-Welch fitting ([`baum_welch`]), simulation and
//!   likelihoods ([`hmm`]), and report rendering ([`report`]).
//!
//! ```
//! use fraghmm::{exact, fixtures};
//!
//! let truth = fixtures::reference_hmm2();
//! let candidate = fixtures::reference_hmm1();
//! let mu_candidate = exact::exact_mu(&truth, &candidate, 3).unwrap();
//! let mu_truth = exact::exact_mu(&truth, &truth, 3).unwrap();
//! assert!(mu_truth > mu_candidate);
//! ```

pub mod baum_welch;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod hmm;
pub mod ingest;
pub mod matrix;
pub mod report;

pub use error::{Error, Result};
pub use hmm::{Hmm, Sequence};
pub use matrix::{Matrix, ProbVector, StochasticMatrix};
