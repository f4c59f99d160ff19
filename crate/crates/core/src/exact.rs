//! Closed-form fragment metrics.
//!
//! For a data-generating model `h0` and a candidate `hj` over the same
//! alphabet, `μ_j(r) = Σ_s l₀(s) l_j(s)` over all `K^r` fragments. Summing
//! the forward factorisation over fragments collapses it to
//!
//! ```text
//! μ_j(r) = (π₀ ⊗ π_j) W_j^r 1,    W_j = Σ_m M₀(m) ⊗ M_j(m)
//!                                    = (P₀ ⊗ P_j) · Diag(vec(S_j S₀ᵀ))
//! ```
//!
//! where `vec` stacks columns, so entry `a·N_j + b` of the diagonal is
//! `Σ_m S₀[a,m] S_j[b,m]`. The same construction with three factors gives
//! `E[l_a(s) l_b(s)]`, from which the second moment `E[(L₁ − L₂)²]` and the
//! variance of the paired differences follow.
//!
//! Powers of the operators are never formed; the left vector is pushed
//! through the operator `r` times.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hmm::{symbol_operator, Hmm};
use crate::matrix::{
    dominant_eigenvalue, kronecker, kronecker_vec, DominantEigen, Matrix, ProbVector,
    POWER_MAX_ITERS, POWER_TOL,
};

/// Negative rounding slack tolerated before a second moment or variance is
/// treated as a numerical failure.
pub const NEGATIVE_SLACK: f64 = 1e-14;

/// `W_j` together with its left vector `π₀ ⊗ π_j`.
#[derive(Clone, Debug)]
pub struct PairOperator {
    pub w: Matrix,
    pub left: ProbVector,
    pub dims: (usize, usize),
}

/// `Σ_m M₀(m) ⊗ M_a(m) ⊗ M_b(m)` with left vector `π₀ ⊗ π_a ⊗ π_b`.
#[derive(Clone, Debug)]
pub struct TripleOperator {
    pub w3: Matrix,
    pub left: ProbVector,
}

fn check_alphabets(models: &[&Hmm]) -> Result<usize> {
    let k = models[0].n_symbols();
    for h in &models[1..] {
        if h.n_symbols() != k {
            return Err(Error::AlphabetMismatch {
                left: k,
                right: h.n_symbols(),
            });
        }
    }
    Ok(k)
}

fn check_r(r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("fragment length must be ≥ 1".into()));
    }
    Ok(())
}

/// Builds `W_j` as the direct sum over symbols. In debug builds the result
/// is checked against the `(P₀ ⊗ P_j)·Diag(vec(S_j S₀ᵀ))` factorisation.
pub fn pair_operator(h0: &Hmm, hj: &Hmm) -> Result<PairOperator> {
    let k = check_alphabets(&[h0, hj])?;
    let d = h0.n_states() * hj.n_states();
    let mut w = Matrix::zeros(d, d);
    for m in 0..k {
        let term = kronecker(
            &symbol_operator(h0, m)?.matrix,
            &symbol_operator(hj, m)?.matrix,
        )?;
        w = w.add(&term)?;
    }
    debug_assert!(
        pair_operator_product_form(h0, hj)?.max_abs_diff(&w) < 1e-12,
        "direct-sum and product-form pair operators disagree"
    );
    Ok(PairOperator {
        w,
        left: h0.stationary().kron(hj.stationary()),
        dims: (h0.n_states(), hj.n_states()),
    })
}

/// `(P₀ ⊗ P_j) · Diag(vec(S_j S₀ᵀ))` with column-stacking `vec`.
pub fn pair_operator_product_form(h0: &Hmm, hj: &Hmm) -> Result<Matrix> {
    check_alphabets(&[h0, hj])?;
    let s0 = h0.emission().matrix();
    let sj = hj.emission().matrix();
    let cross = sj.matmul(&s0.transpose())?; // N_j × N₀
    // Column-major vec: column a (a state of h0) first, rows b within it.
    let mut diag = Vec::with_capacity(h0.n_states() * hj.n_states());
    for a in 0..cross.cols() {
        for b in 0..cross.rows() {
            diag.push(cross[(b, a)]);
        }
    }
    kronecker(h0.transition().matrix(), hj.transition().matrix())?.matmul(&Matrix::diag(&diag)?)
}

pub fn triple_operator(h0: &Hmm, ha: &Hmm, hb: &Hmm) -> Result<TripleOperator> {
    let k = check_alphabets(&[h0, ha, hb])?;
    let d = h0.n_states() * ha.n_states() * hb.n_states();
    let mut w3 = Matrix::zeros(d, d);
    for m in 0..k {
        let pair = kronecker(
            &symbol_operator(h0, m)?.matrix,
            &symbol_operator(ha, m)?.matrix,
        )?;
        w3 = w3.add(&kronecker(&pair, &symbol_operator(hb, m)?.matrix)?)?;
    }
    let left = kronecker_vec(
        &kronecker_vec(h0.stationary().as_slice(), ha.stationary().as_slice()),
        hb.stationary().as_slice(),
    );
    Ok(TripleOperator {
        w3,
        left: ProbVector::new(left)?,
    })
}

/// `leftᵀ W^r 1` for r = 1..=r_max, in one pass.
fn power_sums(left: &ProbVector, w: &Matrix, r_max: usize) -> Vec<f64> {
    let mut v = left.as_slice().to_vec();
    (0..r_max)
        .map(|_| {
            v = w.left_mul(&v);
            v.iter().sum()
        })
        .collect()
}

fn power_sum(left: &ProbVector, w: &Matrix, r: usize) -> f64 {
    *power_sums(left, w, r).last().expect("r ≥ 1")
}

impl PairOperator {
    /// `μ(r)` for r = 1..=r_max.
    pub fn mu_sequence(&self, r_max: usize) -> Vec<f64> {
        power_sums(&self.left, &self.w, r_max)
    }

    pub fn mu(&self, r: usize) -> Result<f64> {
        check_r(r)?;
        Ok(power_sum(&self.left, &self.w, r))
    }

    pub fn dominant_eigenvalue(&self) -> Result<DominantEigen> {
        dominant_eigenvalue(&self.w, POWER_TOL, POWER_MAX_ITERS)
    }
}

impl TripleOperator {
    pub fn moment(&self, r: usize) -> Result<f64> {
        check_r(r)?;
        Ok(power_sum(&self.left, &self.w3, r))
    }
}

/// Expected fragment likelihood `μ_j(r)` of `hj` under data from `h0`;
/// equivalently the probability that independent length-`r` outputs of the
/// two models coincide.
pub fn exact_mu(h0: &Hmm, hj: &Hmm, r: usize) -> Result<f64> {
    check_r(r)?;
    pair_operator(h0, hj)?.mu(r)
}

/// `E[L_j(r)²] = Σ_s l₀(s) l_j(s)²`.
pub fn likelihood_second_moment(h0: &Hmm, hj: &Hmm, r: usize) -> Result<f64> {
    triple_operator(h0, hj, hj)?.moment(r)
}

/// Variance of a single fragment likelihood `L_j(r)` under `h0`.
pub fn likelihood_variance(h0: &Hmm, hj: &Hmm, r: usize) -> Result<f64> {
    let m2 = likelihood_second_moment(h0, hj, r)?;
    let mu = exact_mu(h0, hj, r)?;
    clamp_nonnegative(m2 - mu * mu, "likelihood variance")
}

fn clamp_nonnegative(x: f64, what: &str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -NEGATIVE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("{what} evaluated to {x:e}")))
    }
}

/// Second moment `E[(L₁(r) − L₂(r))²]` of the paired difference:
/// `T(1,1) − 2·T(1,2) + T(2,2)` with `T(a,b) = E[L_a L_b]`.
pub fn second_moment(h0: &Hmm, h1: &Hmm, h2: &Hmm, r: usize) -> Result<f64> {
    check_r(r)?;
    check_alphabets(&[h0, h1, h2])?;
    let t11 = triple_operator(h0, h1, h1)?.moment(r)?;
    let t12 = triple_operator(h0, h1, h2)?.moment(r)?;
    let t22 = triple_operator(h0, h2, h2)?.moment(r)?;
    clamp_nonnegative(t11 - 2.0 * t12 + t22, "second moment")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactComparison {
    pub r: usize,
    pub mu_1: f64,
    pub mu_2: f64,
    /// `μ₁(r) − μ₂(r)`.
    pub mu_12: f64,
    /// `E[(L₁ − L₂)²]`.
    pub second_moment: f64,
    /// `E[(L₁ − L₂)²] − (μ₁ − μ₂)²`.
    pub sigma2: f64,
    pub lambda_1: f64,
    pub lambda_2: f64,
}

/// All operators needed to compare two candidates against one truth.
/// Build once, then evaluate at as many fragment lengths as needed.
#[derive(Clone, Debug)]
pub struct ComparisonOperators {
    pub w1: PairOperator,
    pub w2: PairOperator,
    t11: TripleOperator,
    t12: TripleOperator,
    t22: TripleOperator,
    lambda_1: f64,
    lambda_2: f64,
}

impl ComparisonOperators {
    pub fn new(h0: &Hmm, h1: &Hmm, h2: &Hmm) -> Result<Self> {
        check_alphabets(&[h0, h1, h2])?;
        let w1 = pair_operator(h0, h1)?;
        let w2 = pair_operator(h0, h2)?;
        let lambda_1 = w1.dominant_eigenvalue()?.value;
        let lambda_2 = w2.dominant_eigenvalue()?.value;
        Ok(ComparisonOperators {
            w1,
            w2,
            t11: triple_operator(h0, h1, h1)?,
            t12: triple_operator(h0, h1, h2)?,
            t22: triple_operator(h0, h2, h2)?,
            lambda_1,
            lambda_2,
        })
    }

    /// Rows for r = 1..=r_max.
    pub fn table(&self, r_max: usize) -> Result<Vec<ExactComparison>> {
        let mu1 = self.w1.mu_sequence(r_max);
        let mu2 = self.w2.mu_sequence(r_max);
        let t11 = power_sums(&self.t11.left, &self.t11.w3, r_max);
        let t12 = power_sums(&self.t12.left, &self.t12.w3, r_max);
        let t22 = power_sums(&self.t22.left, &self.t22.w3, r_max);
        (0..r_max)
            .map(|i| {
                let second = clamp_nonnegative(t11[i] - 2.0 * t12[i] + t22[i], "second moment")?;
                let mu_12 = mu1[i] - mu2[i];
                Ok(ExactComparison {
                    r: i + 1,
                    mu_1: mu1[i],
                    mu_2: mu2[i],
                    mu_12,
                    second_moment: second,
                    sigma2: clamp_nonnegative(second - mu_12 * mu_12, "variance")?,
                    lambda_1: self.lambda_1,
                    lambda_2: self.lambda_2,
                })
            })
            .collect()
    }

    pub fn at(&self, r: usize) -> Result<ExactComparison> {
        check_r(r)?;
        Ok(self.table(r)?.pop().expect("r ≥ 1"))
    }
}

pub fn exact_comparison(h0: &Hmm, h1: &Hmm, h2: &Hmm, r: usize) -> Result<ExactComparison> {
    check_r(r)?;
    ComparisonOperators::new(h0, h1, h2)?.at(r)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthRatio {
    /// Denominator length; the ratio is `μ(r+1) / μ(r)`.
    pub r: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRatios {
    pub ratios: Vec<GrowthRatio>,
    /// Perron root of `W_j`, the limit of the ratios.
    pub lambda_max: f64,
}

/// Exact `μ(r+1)/μ(r)` for r = 1..=r_max. A ratio whose denominator is zero
/// is reported as NaN.
pub fn growth_ratios(h0: &Hmm, hj: &Hmm, r_max: usize) -> Result<GrowthRatios> {
    if r_max < 2 {
        return Err(Error::InvalidArgument("growth ratios need r_max ≥ 2".into()));
    }
    let op = pair_operator(h0, hj)?;
    let mu = op.mu_sequence(r_max + 1);
    let ratios = (1..=r_max)
        .map(|r| GrowthRatio {
            r,
            ratio: if mu[r - 1] > 0.0 { mu[r] / mu[r - 1] } else { f64::NAN },
        })
        .collect();
    Ok(GrowthRatios {
        ratios,
        lambda_max: op.dominant_eigenvalue()?.value,
    })
}

/// Smallest `r*` in `1..=r_max` with `μ₁(r) > μ₂(r)` for every `r` in
/// `r*..=r_max`, or `None` when `μ₁(r_max) ≤ μ₂(r_max)`. Ties count as no
/// dominance.
pub fn dominance_threshold(h0: &Hmm, h1: &Hmm, h2: &Hmm, r_max: usize) -> Result<Option<usize>> {
    check_r(r_max)?;
    check_alphabets(&[h0, h1, h2])?;
    let mu1 = pair_operator(h0, h1)?.mu_sequence(r_max);
    let mu2 = pair_operator(h0, h2)?.mu_sequence(r_max);
    Ok(threshold_from_sequences(&mu1, &mu2))
}

pub(crate) fn threshold_from_sequences(mu1: &[f64], mu2: &[f64]) -> Option<usize> {
    let mut threshold = None;
    for r in (1..=mu1.len()).rev() {
        if mu1[r - 1] > mu2[r - 1] {
            threshold = Some(r);
        } else {
            break;
        }
    }
    threshold
}
