//! Maximum-likelihood fitting of discrete HMMs by Baum-Welch (EM).
//!
//! Each restart draws the rows of `P` and `S` from a symmetric Dirichlet(1)
//! using its own generator (seeded with `seed + restart`), starts from a
//! uniform initial-state distribution and alternates scaled
//! forward-backward expectations with closed-form updates. The initial-state
//! distribution is a free parameter during EM only; the exported [`Hmm`]
//! uses the stationary distribution of the fitted transition matrix.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::hmm::{seeded_rng, Hmm, Sequence};
use crate::matrix::{Matrix, StochasticMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    pub n_states: usize,
    pub max_iters: usize,
    /// Stop once the relative log-likelihood improvement drops below this.
    pub tol: f64,
    pub seed: u64,
    pub n_restarts: usize,
}

impl FitConfig {
    pub fn new(n_states: usize, seed: u64) -> Self {
        FitConfig {
            n_states,
            max_iters: 1000,
            tol: 1e-6,
            seed,
            n_restarts: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_states == 0 {
            return Err(Error::InvalidArgument("n_states must be ≥ 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be ≥ 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidArgument("n_restarts must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: Hmm,
    /// Log-likelihood at each E-step, under the EM start distribution.
    pub log_likelihood_trace: Vec<f64>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Symbols that never occur in the training series; their emission
    /// columns are zero.
    pub absent_symbols: Vec<usize>,
    /// Start distribution estimated by EM (not part of the exported model).
    pub start_distribution: Vec<f64>,
    /// Index of the restart that won.
    pub restart: usize,
}

impl FitResult {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood_trace.last().expect("trace is never empty")
    }
}

struct Params {
    start: Vec<f64>,
    trans: Vec<f64>, // n × n row-major
    emit: Vec<f64>,  // n × k row-major
    n: usize,
    k: usize,
}

struct Expectations {
    log_likelihood: f64,
    gamma_first: Vec<f64>,
    trans_counts: Vec<f64>,
    emit_counts: Vec<f64>,
}

fn dirichlet_row<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / sum).collect()
}

impl Params {
    fn random(n: usize, k: usize, seed: u64) -> Params {
        let mut rng = seeded_rng(seed);
        let trans = (0..n).flat_map(|_| dirichlet_row(&mut rng, n)).collect();
        let emit = (0..n).flat_map(|_| dirichlet_row(&mut rng, k)).collect();
        Params {
            start: vec![1.0 / n as f64; n],
            trans,
            emit,
            n,
            k,
        }
    }

    /// Scaled forward-backward pass accumulating sufficient statistics.
    fn expectations(&self, y: &[usize]) -> Result<Expectations> {
        let (n, k, len) = (self.n, self.k, y.len());
        let mut alpha = vec![0.0; len * n];
        let mut scale = vec![0.0; len];

        for t in 0..len {
            let (prev, cur) = alpha.split_at_mut(t * n);
            let cur = &mut cur[..n];
            if t == 0 {
                cur.copy_from_slice(&self.start);
            } else {
                let prev = &prev[(t - 1) * n..];
                for (i, &a) in prev.iter().enumerate() {
                    for (c, &p) in cur.iter_mut().zip(&self.trans[i * n..(i + 1) * n]) {
                        *c += a * p;
                    }
                }
            }
            for (j, c) in cur.iter_mut().enumerate() {
                *c *= self.emit[j * k + y[t]];
            }
            let c: f64 = cur.iter().sum();
            if !(c > 0.0) {
                return Err(Error::Numerical(format!(
                    "forward pass vanished at position {t}"
                )));
            }
            cur.iter_mut().for_each(|x| *x /= c);
            scale[t] = c;
        }

        let mut beta = vec![1.0; n];
        let mut next_beta = vec![0.0; n];
        let mut trans_counts = vec![0.0; n * n];
        let mut emit_counts = vec![0.0; n * k];
        let mut gamma_first = vec![0.0; n];
        for t in (0..len).rev() {
            let a = &alpha[t * n..(t + 1) * n];
            for i in 0..n {
                let g = a[i] * beta[i];
                emit_counts[i * k + y[t]] += g;
                if t == 0 {
                    gamma_first[i] = g;
                }
            }
            if t == 0 {
                break;
            }
            // ξ_{t−1}(i, j) = α_{t−1}(i) P_ij S_j(y_t) β_t(j) / c_t
            let a_prev = &alpha[(t - 1) * n..t * n];
            let c = scale[t];
            for j in 0..n {
                let eb = self.emit[j * k + y[t]] * beta[j] / c;
                for i in 0..n {
                    trans_counts[i * n + j] += a_prev[i] * self.trans[i * n + j] * eb;
                }
            }
            for i in 0..n {
                next_beta[i] = (0..n)
                    .map(|j| self.trans[i * n + j] * self.emit[j * k + y[t]] * beta[j])
                    .sum::<f64>()
                    / c;
            }
            std::mem::swap(&mut beta, &mut next_beta);
        }

        Ok(Expectations {
            log_likelihood: scale.iter().map(|c| c.ln()).sum(),
            gamma_first,
            trans_counts,
            emit_counts,
        })
    }

    fn maximize(&mut self, e: &Expectations) {
        let (n, k) = (self.n, self.k);
        let total: f64 = e.gamma_first.iter().sum();
        if total > 0.0 {
            self.start = e.gamma_first.iter().map(|g| g / total).collect();
        }
        normalize_rows(&mut self.trans, &e.trans_counts, n);
        normalize_rows(&mut self.emit, &e.emit_counts, k);
    }

    fn to_hmm(&self, label: &str) -> Result<Hmm> {
        Hmm::new(
            label,
            StochasticMatrix::new(Matrix::new(self.n, self.n, self.trans.clone())?)?,
            StochasticMatrix::new(Matrix::new(self.n, self.k, self.emit.clone())?)?,
        )
    }
}

/// Rows with zero expected mass keep their previous values.
fn normalize_rows(target: &mut [f64], counts: &[f64], width: usize) {
    for (row, cnt) in target.chunks_mut(width).zip(counts.chunks(width)) {
        let sum: f64 = cnt.iter().sum();
        if sum > 0.0 {
            row.iter_mut().zip(cnt).for_each(|(r, c)| *r = c / sum);
        }
    }
}

struct RestartOutcome {
    params: Params,
    trace: Vec<f64>,
    converged: bool,
}

fn run_restart(y: &[usize], n: usize, k: usize, cfg: &FitConfig, seed: u64) -> Result<RestartOutcome> {
    let mut params = Params::random(n, k, seed);
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    for iter in 0..cfg.max_iters {
        let e = params.expectations(y)?;
        let ll = e.log_likelihood;
        if let Some(&prev) = trace.last() {
            trace.push(ll);
            if ll - prev < cfg.tol * prev.abs() {
                converged = true;
                break;
            }
        } else {
            trace.push(ll);
        }
        if iter + 1 == cfg.max_iters {
            break;
        }
        params.maximize(&e);
    }
    Ok(RestartOutcome {
        params,
        trace,
        converged,
    })
}

fn absent_symbols(y: &Sequence) -> Vec<usize> {
    let mut seen = vec![false; y.alphabet_size()];
    y.symbols().iter().for_each(|&s| seen[s] = true);
    seen.iter()
        .enumerate()
        .filter_map(|(s, &v)| (!v).then_some(s))
        .collect()
}

/// Closed form for a single hidden state: emissions are the empirical
/// symbol frequencies.
fn fit_single_state(y: &Sequence, label: &str) -> Result<FitResult> {
    let k = y.alphabet_size();
    let mut counts = vec![0.0; k];
    y.symbols().iter().for_each(|&s| counts[s] += 1.0);
    let n = y.len() as f64;
    let freq: Vec<f64> = counts.iter().map(|c| c / n).collect();
    let ll = counts
        .iter()
        .zip(&freq)
        .filter(|(c, _)| **c > 0.0)
        .map(|(c, f)| c * f.ln())
        .sum();
    let model = Hmm::from_rows(label, &[vec![1.0]], &[freq])?;
    Ok(FitResult {
        model,
        log_likelihood_trace: vec![ll],
        converged: true,
        iterations_used: 1,
        absent_symbols: absent_symbols(y),
        start_distribution: vec![1.0],
        restart: 0,
    })
}

/// Fits an `n_states` model to `y`, keeping the best restart by final
/// log-likelihood. Restarts whose transition matrix has no unique
/// stationary distribution are discarded.
pub fn fit(y: &Sequence, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if y.len() < cfg.n_states {
        return Err(Error::InvalidArgument(format!(
            "series of length {} is shorter than the number of states {}",
            y.len(),
            cfg.n_states
        )));
    }
    let label = format!("fit-{}-states", cfg.n_states);
    if cfg.n_states == 1 {
        return fit_single_state(y, &label);
    }

    let mut best: Option<FitResult> = None;
    for restart in 0..cfg.n_restarts {
        let seed = cfg.seed.wrapping_add(restart as u64);
        let out = run_restart(y.symbols(), cfg.n_states, y.alphabet_size(), cfg, seed)?;
        let model = match out.params.to_hmm(&label) {
            Ok(m) => m,
            Err(Error::ReducibleChain) => continue,
            Err(e) => return Err(e),
        };
        let candidate = FitResult {
            model,
            iterations_used: out.trace.len(),
            log_likelihood_trace: out.trace,
            converged: out.converged,
            absent_symbols: absent_symbols(y),
            start_distribution: out.params.start.clone(),
            restart,
        };
        let better = best
            .as_ref()
            .is_none_or(|b| candidate.final_log_likelihood() > b.final_log_likelihood());
        if better {
            best = Some(candidate);
        }
    }
    best.ok_or(Error::AllRestartsReducible)
}

/// Iteration-by-iteration log-likelihood as CSV (`iteration,log_likelihood`).
pub fn loglik_trace_report(res: &FitResult) -> String {
    let mut out = String::from("iteration,log_likelihood\n");
    for (i, ll) in res.log_likelihood_trace.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, ll).expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_mu;
    use crate::fixtures::{reference_hmm2, two_state_example};
    use crate::hmm::{log_likelihood_full, simulate};

    #[test]
    fn single_state_is_empirical_frequency() {
        let y = Sequence::new(vec![0, 1, 1, 2, 1, 0, 1, 1], 3).unwrap();
        let res = fit(&y, &FitConfig::new(1, 0)).unwrap();
        let row = res.model.emission().matrix().row(0).to_vec();
        assert_eq!(row, vec![0.25, 0.625, 0.125]);
        assert_eq!(res.iterations_used, 1);
        assert!(res.converged);
        let ll = log_likelihood_full(&res.model, &y).unwrap().value;
        assert!((ll - res.final_log_likelihood()).abs() < 1e-12);
        assert_eq!(loglik_trace_report(&res).lines().count(), 2);
    }

    #[test]
    fn traces_are_monotone() {
        let truth = reference_hmm2();
        for (seed, n_states) in [(1, 2), (2, 3), (3, 4)] {
            let y = simulate(&truth, 1500, seed).unwrap();
            let mut cfg = FitConfig::new(n_states, seed);
            cfg.max_iters = 200;
            let res = fit(&y, &cfg).unwrap();
            for w in res.log_likelihood_trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-8, "{} then {}", w[0], w[1]);
            }
            assert_eq!(res.iterations_used, res.log_likelihood_trace.len());
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let y = simulate(&reference_hmm2(), 800, 5).unwrap();
        let mut cfg = FitConfig::new(3, 17);
        cfg.n_restarts = 2;
        cfg.max_iters = 100;
        let a = fit(&y, &cfg).unwrap();
        let b = fit(&y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model.to_json().unwrap(), b.model.to_json().unwrap());
    }

    #[test]
    fn fitted_rows_are_stochastic() {
        let y = simulate(&reference_hmm2(), 1000, 8).unwrap();
        let res = fit(&y, &FitConfig::new(3, 8)).unwrap();
        let m = &res.model;
        for mat in [m.transition().matrix(), m.emission().matrix()] {
            for i in 0..mat.rows() {
                assert!((mat.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn recovers_identifiable_model_in_mu() {
        let truth = Hmm::from_rows(
            "truth",
            &[vec![0.95, 0.05], vec![0.1, 0.9]],
            &[vec![0.9, 0.1], vec![0.15, 0.85]],
        )
        .unwrap();
        let y = simulate(&truth, 50_000, 3).unwrap();
        let res = fit(&y, &FitConfig::new(2, 3)).unwrap();
        let self_mu = exact_mu(&truth, &truth, 4).unwrap();
        let fit_mu = exact_mu(&truth, &res.model, 4).unwrap();
        assert!((self_mu - fit_mu).abs() < 1e-3, "{self_mu} vs {fit_mu}");
    }

    #[test]
    fn absent_symbol_column_goes_to_zero() {
        let base = simulate(&two_state_example(), 500, 4).unwrap();
        let y = base.with_alphabet(3).unwrap();
        let mut cfg = FitConfig::new(2, 4);
        cfg.max_iters = 50;
        let res = fit(&y, &cfg).unwrap();
        assert_eq!(res.absent_symbols, vec![2]);
        assert!(res.model.emission().matrix().column(2).iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn max_iters_caps_the_trace() {
        let y = simulate(&reference_hmm2(), 600, 2).unwrap();
        let mut cfg = FitConfig::new(4, 2);
        cfg.max_iters = 3;
        cfg.tol = 1e-300;
        let res = fit(&y, &cfg).unwrap();
        assert_eq!(res.iterations_used, 3);
        assert!(!res.converged);
        let csv = loglik_trace_report(&res);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().starts_with("3,"));
    }

    #[test]
    fn invalid_configs() {
        let y = Sequence::new(vec![0, 1], 2).unwrap();
        assert!(fit(&y, &FitConfig::new(0, 1)).is_err());
        assert!(fit(&y, &FitConfig::new(3, 1)).is_err());
        let mut cfg = FitConfig::new(2, 1);
        cfg.tol = 0.0;
        assert!(fit(&y, &cfg).is_err());
    }
}
