//! Discrete-emission hidden Markov models.
//!
//! A model carries its transition matrix `P` (N×N), emission matrix `S`
//! (N×K) and the stationary distribution `π` of `P`, which is always
//! recomputed from `P` and used as the initial-state law. The likelihood
//! of a fragment `y_1..y_r` is
//!
//! ```text
//! l(y) = πᵀ M(y_1) M(y_2) ⋯ M(y_r) 1,    M(m) = P · Diag(S[:, m])
//! ```
//!
//! Short fragments are evaluated with raw products; whole series go
//! through the scaled forward recursion in [`log_likelihood_full`].

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{stationary_distribution, Matrix, ProbVector, StochasticMatrix};

/// Row-sum tolerance applied when loading model files. Published matrices
/// are commonly rounded to six decimals, so their rows are only within a
/// few 1e-6 of one.
pub const LOAD_ROW_SUM_TOL: f64 = 1e-5;

/// Generator used for every seeded draw in this crate: ChaCha8 seeded via
/// `seed_from_u64`, which is portable and stable across platforms.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hmm {
    label: String,
    transition: StochasticMatrix,
    emission: StochasticMatrix,
    stationary: ProbVector,
}

/// On-disk form of a model. The stationary distribution is never stored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HmmFile {
    pub label: String,
    pub transition: Vec<Vec<f64>>,
    pub emission: Vec<Vec<f64>>,
}

impl Hmm {
    pub fn new(
        label: impl Into<String>,
        transition: StochasticMatrix,
        emission: StochasticMatrix,
    ) -> Result<Self> {
        if transition.rows() != transition.cols() {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix is {}x{}",
                transition.rows(),
                transition.cols()
            )));
        }
        if emission.rows() != transition.rows() {
            return Err(Error::DimensionMismatch(format!(
                "emission matrix has {} rows for {} hidden states",
                emission.rows(),
                transition.rows()
            )));
        }
        let stationary = stationary_distribution(&transition)?;
        Ok(Hmm {
            label: label.into(),
            transition,
            emission,
            stationary,
        })
    }

    pub fn from_rows(
        label: impl Into<String>,
        transition: &[Vec<f64>],
        emission: &[Vec<f64>],
    ) -> Result<Self> {
        Hmm::new(
            label,
            StochasticMatrix::from_rows(transition)?,
            StochasticMatrix::from_rows(emission)?,
        )
    }

    /// Builds a model from file contents, renormalising rows that are within
    /// [`LOAD_ROW_SUM_TOL`] of one.
    pub fn from_file_repr(repr: &HmmFile) -> Result<Self> {
        let p = StochasticMatrix::with_tolerance(
            Matrix::from_rows(&repr.transition)?,
            LOAD_ROW_SUM_TOL,
        )?;
        let s = StochasticMatrix::with_tolerance(
            Matrix::from_rows(&repr.emission)?,
            LOAD_ROW_SUM_TOL,
        )?;
        Hmm::new(repr.label.clone(), p, s)
    }

    pub fn to_file_repr(&self) -> HmmFile {
        HmmFile {
            label: self.label.clone(),
            transition: self.transition.matrix().to_rows(),
            emission: self.emission.matrix().to_rows(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Hmm::from_file_repr(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_repr())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Hmm::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Parse {
                path: path.to_path_buf(),
                line: j.line(),
                message: j.to_string(),
            },
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn n_states(&self) -> usize {
        self.transition.rows()
    }

    pub fn n_symbols(&self) -> usize {
        self.emission.cols()
    }

    pub fn transition(&self) -> &StochasticMatrix {
        &self.transition
    }

    pub fn emission(&self) -> &StochasticMatrix {
        &self.emission
    }

    pub fn stationary(&self) -> &ProbVector {
        &self.stationary
    }

    /// Stationary symbol distribution `πᵀ S`.
    pub fn symbol_distribution(&self) -> Vec<f64> {
        self.emission.matrix().left_mul(self.stationary.as_slice())
    }
}

/// Encoded observation series over `{0, …, K−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl Sequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= alphabet_size) {
            return Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size,
            });
        }
        Ok(Sequence {
            symbols,
            alphabet_size,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The length-`r` window starting at `start`.
    pub fn window(&self, start: usize, r: usize) -> &[usize] {
        &self.symbols[start..start + r]
    }

    /// Same symbols reinterpreted over a larger (or equal) alphabet.
    pub fn with_alphabet(self, alphabet_size: usize) -> Result<Self> {
        Sequence::new(self.symbols, alphabet_size)
    }

    /// Parses one base-10 symbol per line. Blank lines are ignored. Without
    /// an explicit alphabet the size is inferred as `max + 1`.
    pub fn parse(text: &str, alphabet_size: Option<usize>, path: &Path) -> Result<Self> {
        let mut symbols = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let s = line.parse::<usize>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("invalid symbol {line:?}: {e}"),
            })?;
            symbols.push(s);
        }
        let k = match alphabet_size {
            Some(k) => k,
            None => symbols.iter().max().map_or(0, |m| m + 1),
        };
        Sequence::new(symbols, k)
    }

    pub fn load(path: impl AsRef<Path>, alphabet_size: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Sequence::parse(&text, alphabet_size, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.symbols.len() * 2);
        for s in &self.symbols {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// `M(m) = P · Diag(S[:, m])`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolOperator {
    pub matrix: Matrix,
    pub symbol: usize,
}

pub fn symbol_operator(h: &Hmm, symbol: usize) -> Result<SymbolOperator> {
    if symbol >= h.n_symbols() {
        return Err(Error::SymbolOutOfRange {
            symbol,
            alphabet_size: h.n_symbols(),
        });
    }
    let column = h.emission.matrix().column(symbol);
    let matrix = h.transition.matrix().matmul(&Matrix::diag(&column)?)?;
    Ok(SymbolOperator { matrix, symbol })
}

fn check_symbols(h: &Hmm, symbols: &[usize]) -> Result<()> {
    match symbols.iter().find(|&&s| s >= h.n_symbols()) {
        Some(&symbol) => Err(Error::SymbolOutOfRange {
            symbol,
            alphabet_size: h.n_symbols(),
        }),
        None => Ok(()),
    }
}

/// One step of the forward recursion: `v ← (vᵀ P) ∘ S[:, y]`.
#[inline]
fn forward_step(h: &Hmm, v: &[f64], y: usize, out: &mut [f64]) {
    let p = h.transition.matrix();
    let s = h.emission.matrix();
    out.iter_mut().for_each(|o| *o = 0.0);
    for (i, &vi) in v.iter().enumerate() {
        if vi == 0.0 {
            continue;
        }
        for (o, &pij) in out.iter_mut().zip(p.row(i)) {
            *o += vi * pij;
        }
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o *= s[(j, y)];
    }
}

/// Exact probability of a short fragment (raw products, no rescaling).
pub fn fragment_likelihood(h: &Hmm, fragment: &[usize]) -> Result<f64> {
    if fragment.is_empty() {
        return Err(Error::EmptySequence);
    }
    check_symbols(h, fragment)?;
    Ok(fragment_likelihood_unchecked(h, fragment))
}

/// [`fragment_likelihood`] without validation, for hot loops over fragments
/// that are already known to be in range.
pub(crate) fn fragment_likelihood_unchecked(h: &Hmm, fragment: &[usize]) -> f64 {
    let mut v = h.stationary.as_slice().to_vec();
    let mut next = vec![0.0; v.len()];
    for &y in fragment {
        forward_step(h, &v, y, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    v.iter().sum()
}

/// Full-series log-likelihood from the scaled forward recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogLikelihood {
    /// `ln l(y)`, or `-inf` when the series is impossible under the model.
    pub value: f64,
    /// Position at which the forward vector vanished, if it did.
    pub impossible_at: Option<usize>,
}

impl LogLikelihood {
    pub fn is_impossible(&self) -> bool {
        self.impossible_at.is_some()
    }
}

/// Scaled forward algorithm with the stationary distribution as initial law.
pub fn log_likelihood_full(h: &Hmm, y: &Sequence) -> Result<LogLikelihood> {
    if y.alphabet_size() > h.n_symbols() {
        return Err(Error::AlphabetMismatch {
            left: y.alphabet_size(),
            right: h.n_symbols(),
        });
    }
    let mut v = h.stationary.as_slice().to_vec();
    let mut next = vec![0.0; v.len()];
    let mut total = 0.0;
    for (t, &sym) in y.symbols().iter().enumerate() {
        forward_step(h, &v, sym, &mut next);
        let c: f64 = next.iter().sum();
        if c == 0.0 {
            return Ok(LogLikelihood {
                value: f64::NEG_INFINITY,
                impossible_at: Some(t),
            });
        }
        total += c.ln();
        next.iter_mut().for_each(|x| *x /= c);
        std::mem::swap(&mut v, &mut next);
    }
    Ok(LogLikelihood {
        value: total,
        impossible_at: None,
    })
}

/// Draws from a discrete distribution by inverse CDF.
pub(crate) fn draw_categorical<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the last cumulative sum.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Simulates `n` observations: `x₁ ~ π`, `y_t ~ S[x_t, ·]`,
/// `x_{t+1} ~ P[x_t, ·]`. Same seed, same output.
pub fn simulate(h: &Hmm, n: usize, seed: u64) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("simulation length must be ≥ 1".into()));
    }
    let mut rng = seeded_rng(seed);
    let p = h.transition.matrix();
    let s = h.emission.matrix();
    let mut state = draw_categorical(&mut rng, h.stationary.as_slice());
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        symbols.push(draw_categorical(&mut rng, s.row(state)));
        state = draw_categorical(&mut rng, p.row(state));
    }
    Sequence::new(symbols, h.n_symbols())
}
